"""Per-halving shrink of the equivalence interval width.

For random small X the width behaves like c1*t + c2*t^2 in the scale t, so
the ratio between consecutive halvings tends to 2 from above or below
depending on the sign of c2.  This prints the measured ratios.

    python scripts/equivalence_sweep.py --instances 10 --dim 12 --eps 0.25
"""
import argparse

import numpy as np

from qig.manifold import equivalence_constants, shifted_base
from qig.models import ensemble_seeds, random_instance


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--dim", type=int, default=12)
    ap.add_argument("--eps", type=float, default=0.25)
    ap.add_argument("--halvings", type=int, default=6)
    ap.add_argument("--y-samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=8)
    args = ap.parse_args()
    print("instance,halving,width,ratio")
    for i, ss in enumerate(ensemble_seeds(args.seed, args.instances)):
        rng = np.random.default_rng(ss)
        base, X = random_instance(rng.integers(2**63), args.dim, size=0.25)  # half the hood radius at beta0 = 1/2
        G = [rng.standard_normal((args.dim, args.dim)) for _ in range(args.y_samples)]
        Ys = [(g + g.T) / 2 for g in G]
        prev = None
        for k in range(args.halvings + 1):
            lo, hi = equivalence_constants(base, shifted_base(base, X.matrix / 2**k), "eps",
                                           eps=args.eps, Ys=Ys)
            w = hi - lo
            print(f"{i},{k},{w:.17g},{(prev / w) if prev else float('nan'):.6f}")
            prev = w


if __name__ == "__main__":
    main()

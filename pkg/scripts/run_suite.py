"""Run every config in configs/ and write results/<name>.csv.

    python scripts/run_suite.py [--only NAME ...] [--format json]
"""
import argparse
import sys
import time
from pathlib import Path

from qig.cli import main as qig_main

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--only", nargs="*")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--out-dir", default=str(ROOT / "results"))
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(exist_ok=True)
    status = 0
    for cfg in sorted((ROOT / "configs").glob("*.json")):
        if args.only and cfg.stem not in args.only:
            continue
        t0 = time.perf_counter()
        code = qig_main(["run", "--config", str(cfg), "--format", args.format,
                         "--out", str(out / f"{cfg.stem}.{args.format}")])
        print(f"{cfg.stem:22s} exit={code} {time.perf_counter() - t0:6.2f}s")
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())

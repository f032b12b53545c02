"""Named experiment runners.

Each runner takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentResult` whose rows are emitted as one table.  Ensemble
members get independent child seeds and are evaluated through :func:`pmap`,
which preserves instance order.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import expm

from .geometry import (exp_mixture, mix_mixture, mixture_membership_probe, parallel_transport,
                       tangent, trace_distance)
from .gibbs import gibbs_state, regularized_mean, semibound_check, trace_tail
from .manifold import Atlas, center, chart, equivalence_constants, extend, shifted_base
from .models import (ModelSpec, ensemble_seeds, laplacian_spectrum_family, leading_blocks,
                     make_base, make_perturbation, oscillator_levels, relative_ladder)
from .perturbation import BasePoint, eps_grid, norm_profile, norm_zero, relative_bound_form

EXPERIMENTS = ("norms", "monotonicity", "relative-bound", "gibbs", "trace-tail",
               "lambda-independence", "equivalence", "atlas", "transport", "mixtures", "probe")


class ConfigError(ValueError):
    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    experiment: str
    model: ModelSpec
    ensemble_size: int = 10
    eps_grid_points: int = 21
    seed: int = 0
    output_path: str | None = None
    format: str = "csv"

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment", f"unknown experiment {self.experiment!r}; "
                              f"expected one of {', '.join(EXPERIMENTS)}")
        if not isinstance(self.ensemble_size, int) or self.ensemble_size < 1:
            raise ConfigError("ensemble_size", "must be an integer >= 1")
        if not isinstance(self.eps_grid_points, int) or self.eps_grid_points < 2:
            raise ConfigError("eps_grid_points", "must be an integer >= 2")
        if not isinstance(self.seed, int):
            raise ConfigError("seed", "must be an integer")
        if self.format not in ("csv", "json"):
            raise ConfigError("format", "must be 'csv' or 'json'")
        return self

    def to_dict(self):
        d = asdict(self)
        d["model"] = self.model.to_dict()
        return d


@dataclass
class ExperimentResult:
    columns: list
    rows: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations


def worker_count() -> int:
    n = int(os.environ.get("QIG_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


def pmap(fn, items):
    items = list(items)
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# -- instance generation -----------------------------------------------------

def _instance(cfg: ExperimentConfig, ss, size_frac=None):
    """Base point and a small perturbation for one ensemble member."""
    rng = np.random.default_rng(ss)
    model = cfg.model
    if model.family == "random_spd":
        params = dict(model.params, seed=int(rng.integers(2**63)))
        model = ModelSpec(model.family, model.dim, params, model.beta0)
    base = make_base(model)
    frac = rng.uniform(0.05, 0.95) if size_frac is None else size_frac
    kind = model.params.get("perturbation", "random_symmetric")
    X = make_perturbation(model, kind, frac * base.radius, seed=int(rng.integers(2**63)), base=base)
    return base, X, rng


def _seeds(cfg):
    return list(enumerate(ensemble_seeds(cfg.seed, cfg.ensemble_size)))


def _random_sym(rng, n):
    G = rng.standard_normal((n, n))
    return (G + G.T) / 2.0


# -- runners -----------------------------------------------------------------

def run_norms(cfg):
    grid = eps_grid(cfg.eps_grid_points)

    def one(item):
        i, ss = item
        base, X, _ = _instance(cfg, ss)
        p = norm_profile(base, X, grid)
        rows = [(i, "omega", 0.5, p.omega), (i, "zero", 0.0, p.zero)]
        rows += [(i, "eps", e, v) for e, v in p.eps_grid]
        ok = abs(p.eps_grid[0][1] - p.zero) <= 1e-12 and abs(p.eps_grid[-1][1] - p.omega) <= 1e-12
        ok = ok and all(p.zero <= v <= p.omega + 1e-10 for _, v in p.eps_grid)
        return rows, ok

    res = ExperimentResult(["instance", "norm", "eps", "value"])
    for i, (rows, ok) in enumerate(pmap(one, _seeds(cfg))):
        res.rows += rows
        if not ok:
            res.violations.append({"instance": i, "rows": rows})
    return res


def run_monotonicity(cfg):
    grid = eps_grid(cfg.eps_grid_points)

    def one(item):
        i, ss = item
        base, X, _ = _instance(cfg, ss)
        p = norm_profile(base, X, grid)
        return [(i, e, v) for e, v in p.eps_grid], p.is_monotone(1e-10)

    res = ExperimentResult(["instance", "eps", "norm"])
    for i, (rows, ok) in enumerate(pmap(one, _seeds(cfg))):
        res.rows += rows
        if not ok:
            res.violations.append({"instance": i, "rows": rows})
    res.summary = {"instances": cfg.ensemble_size, "violations": len(res.violations)}
    return res


def run_relative_bound(cfg):
    b_grid = cfg.model.params.get("b_grid", list(np.linspace(0.0, 2.0, 11)))

    def one(item):
        i, ss = item
        base, X, _ = _instance(cfg, ss)
        rb = relative_bound_form(base, X, b_grid)
        n0 = norm_zero(base, X)
        lo = float(np.linalg.eigvalsh(base.H.matrix + X.matrix)[0])
        ok = (rb.a <= n0 + 1e-9 and semibound_check(base, X, rb)
              and lo >= (1.0 - rb.a) - rb.b - 1e-9)
        rows = [(i, b, a, "grid", n0, lo) for b, a in rb.curve]
        rows.append((i, rb.b, rb.a, "optimum", n0, lo))
        return rows, ok

    res = ExperimentResult(["instance", "b", "a", "point", "norm_zero", "min_eig_H0_plus_X"])
    for i, (rows, ok) in enumerate(pmap(one, _seeds(cfg))):
        res.rows += rows
        if not ok:
            res.violations.append({"instance": i, "rows": rows})
    return res


def run_gibbs(cfg):
    def one(item):
        i, ss = item
        base, X, rng = _instance(cfg, ss)
        s = gibbs_state(base, X)
        alpha = float(rng.uniform(-10, 10))
        s2 = gibbs_state(base, X.shifted(alpha))
        w = s.rho.eigenvalues
        shift_err = float(np.max(np.abs(s.rho.matrix - s2.rho.matrix)))
        tr = float(np.trace(s.rho.matrix).real)
        ok = abs(tr - 1) <= 1e-10 and w[0] >= -1e-12 and shift_err <= 1e-12 and s.beta_class < 1
        return (i, s.logZ, tr, float(w[0]), s.beta_class, alpha, shift_err), ok

    res = ExperimentResult(["instance", "logZ", "trace", "min_eig_rho", "beta_class", "alpha",
                            "shift_abs_err"])
    for i, (row, ok) in enumerate(pmap(one, _seeds(cfg))):
        res.rows.append(row)
        if not ok:
            res.violations.append({"instance": i, "row": row})
    return res


def trace_tail_setup(model: ModelSpec, dims, diag=-0.1, hop=0.05):
    """Nested family for ``H0 + X`` and the exponent ``beta_X``."""
    nmax = max(dims)
    if model.family == "oscillator":
        h = oscillator_levels(nmax, float(model.params.get("spacing", 1.0)))
        X = relative_ladder(h, diag, hop)
        a = relative_bound_form(BasePoint(np.diag(h), model.beta0), X).a
        return leading_blocks(np.diag(h) + X), model.beta0 / (1.0 - a), a
    if model.family == "laplacian1d":
        length = model.params.get("length")
        fam = laplacian_spectrum_family(None if length is None else float(length),
                                        float(model.params.get("amplitude", 0.0)))
        return fam, model.beta0, 0.0
    raise ConfigError("model.family", "trace-tail needs a nested family (oscillator or laplacian1d)")


def run_trace_tail(cfg):
    p = cfg.model.params
    dims = [int(d) for d in p.get("dims", [25, 50, 100, 200, 400, 800])]
    family, beta_x, a = trace_tail_setup(cfg.model, dims, p.get("ladder_diag", -0.1),
                                         p.get("ladder_hop", 0.05))
    factors = p.get("beta_factors", [1.05, 1.2, 2.0])
    tol = float(p.get("tail_tol", 1e-12))
    res = ExperimentResult(["beta", "beta_factor", "N", "partial_trace", "converged", "a"])
    reports = pmap(lambda f: trace_tail(family, beta_x * f, dims, tol), factors)
    for f, rep in zip(factors, reports):
        for n, t in zip(rep.dims, rep.partial_traces):
            res.rows.append((rep.beta, f, n, t, rep.converged, a))
        if not rep.converged:
            res.violations.append({"beta": rep.beta, "partial_traces": rep.partial_traces})
    res.summary = {"beta_X": beta_x, "a": a}
    return res


def run_lambda_independence(cfg):
    lams = [round(0.1 * k, 1) for k in range(1, 10)]

    def one(item):
        i, ss = item
        base, X, rng = _instance(cfg, ss)
        s = gibbs_state(base, X)
        Y = _random_sym(rng, base.dim)
        vals = [regularized_mean(s, Y, lam) for lam in lams]
        ref = vals[4]
        spread = max(abs(v - ref) for v in vals)
        return [(i, lam, v) for lam, v in zip(lams, vals)], spread <= 1e-9 * (1 + abs(ref))

    res = ExperimentResult(["instance", "lambda", "mean"])
    for i, (rows, ok) in enumerate(pmap(one, _seeds(cfg))):
        res.rows += rows
        if not ok:
            res.violations.append({"instance": i, "rows": rows})
    return res


def run_equivalence(cfg):
    p = cfg.model.params
    kind = p.get("norm_kind", "zero")
    eps = p.get("eps")
    n_y = int(p.get("y_samples", 200))
    halvings = int(p.get("halvings", 4))

    def one(item):
        i, ss = item
        base, X, rng = _instance(cfg, ss, size_frac=0.5)
        Ys = [_random_sym(rng, base.dim) for _ in range(n_y)]
        rows, widths = [], []
        for k in range(halvings + 1):
            bX = shifted_base(base, X.matrix / 2**k)
            lo, hi = equivalence_constants(base, bX, kind, eps=eps, Ys=Ys)
            widths.append(hi - lo)
            rows.append((i, k, norm_zero(base, X) / 2**k, lo, hi, hi - lo))
        ok = all(0 < r[3] <= r[4] < np.inf for r in rows)
        ok = ok and all(b < a for a, b in zip(widths, widths[1:]))
        return rows, ok

    res = ExperimentResult(["instance", "halving", "norm_zero_X", "c_low", "c_high", "width"])
    for i, (rows, ok) in enumerate(pmap(one, _seeds(cfg))):
        res.rows += rows
        if not ok:
            res.violations.append({"instance": i, "rows": rows})
    return res


def run_atlas(cfg):
    """Reach ``steps * X`` by repeated extension and compare with one shot.

    ``X`` has zero-norm ``step_frac * radius`` at the starting chart.  A step
    that is not small at the current chart stops that chain and is reported.

    ``params.atlas_in`` continues from a saved atlas; the final atlas of the
    last instance is written to ``params.atlas_out`` (or ``<out>.atlas.json``).
    """
    p = cfg.model.params
    steps = int(p.get("steps", 2))
    frac = float(p.get("step_frac", 0.3))
    atlas_out = p.get("atlas_out") or (cfg.output_path and cfg.output_path + ".atlas.json")
    root_atlas = None
    if p.get("atlas_in"):
        with open(p["atlas_in"]) as fh:
            root_atlas = Atlas.from_json(fh.read())

    def one(item):
        i, ss = item
        base, X, _ = _instance(cfg, ss)
        atlas = root_atlas if root_atlas is not None else Atlas(base)
        start = atlas.current
        X = X.matrix * (frac * start.radius / norm_zero(start, X))
        rows = []
        for k in range(steps):
            n = norm_zero(atlas.current, X)
            accepted = n < atlas.current.radius
            rows.append((i, k, "step_norm", n, atlas.current.radius, atlas.current.beta0, accepted))
            if not accepted:
                # an honest rejection, not a property failure
                return rows, True, None
            atlas = extend(atlas, X)
        E = expm(-(start.H.matrix + steps * X))
        err = float(np.max(np.abs(atlas.state().rho.matrix - E / np.trace(E))))
        rows.append((i, steps, "state_err", err, atlas.current.radius, atlas.beta, True))
        return rows, err <= 1e-10 and atlas.beta < 1, atlas

    res = ExperimentResult(["instance", "step", "quantity", "value", "radius", "beta", "accepted"])
    atlas = None
    for i, (rows, ok, at) in enumerate(pmap(one, _seeds(cfg))):
        res.rows += rows
        atlas = at or atlas
        if not ok:
            res.violations.append({"instance": i, "rows": rows})
    if atlas_out and atlas is not None:
        with open(atlas_out, "w") as fh:
            fh.write(atlas.to_json())
        res.summary["atlas_json"] = atlas_out
    return res


def run_transport(cfg):
    n_paths = int(cfg.model.params.get("paths", 5))

    def one(item):
        i, ss = item
        base, X, rng = _instance(cfg, ss)
        target = shifted_base(base, X)
        v = tangent(base, _random_sym(rng, base.dim))
        outs = []
        for _ in range(n_paths):
            mids = [shifted_base(base, t * X.matrix) for t in np.sort(rng.uniform(0, 1, 3))]
            outs.append(parallel_transport(v, base, target, [base, *mids, target]))
        ref = outs[0].score.Xhat.matrix
        same = all(np.array_equal(o.score.Xhat.matrix, ref) for o in outs)
        back = parallel_transport(outs[0], target, base)
        rt = float(np.max(np.abs(back.score.Xhat.matrix - v.score.Xhat.matrix)))
        mean = regularized_mean(target.state, outs[0].score.Xhat)
        return (i, n_paths, same, rt, mean), same and rt <= 1e-12 and abs(mean) <= 1e-9

    res = ExperimentResult(["instance", "paths", "bitwise_identical", "roundtrip_err", "mean_at_target"])
    for i, (row, ok) in enumerate(pmap(one, _seeds(cfg))):
        res.rows.append(row)
        if not ok:
            res.violations.append({"instance": i, "row": row})
    return res


def run_mixtures(cfg):
    lams = (0.0, 0.25, 0.5, 0.75, 1.0)

    def one(item):
        i, ss = item
        base, X, rng = _instance(cfg, ss)
        _, Y, _ = _instance(cfg, rng.integers(2**63))
        Y = Y.matrix * (rng.uniform(0.05, 0.95) * base.radius / norm_zero(base, Y))
        sX, sY = gibbs_state(base, X), gibbs_state(base, Y)
        xh, yh = center(base, X).Xhat.matrix, center(base, Y).Xhat.matrix
        rows, ok = [], True
        for lam in lams:
            e = exp_mixture(base, X, Y, lam)
            lin = float(np.max(np.abs(chart(base, e).Xhat.matrix - (lam * xh + (1 - lam) * yh))))
            td = trace_distance(e.rho, mix_mixture(sX, sY, lam))
            rows.append((i, lam, td, lin))
            ok = ok and lin <= 1e-9
        ok = ok and rows[0][2] <= 1e-12 and rows[-1][2] <= 1e-12
        return rows, ok

    res = ExperimentResult(["instance", "lambda", "trace_distance_plus_minus", "chart_linearity_err"])
    for i, (rows, ok) in enumerate(pmap(one, _seeds(cfg))):
        res.rows += rows
        if not ok:
            res.violations.append({"instance": i, "rows": rows})
    return res


def run_probe(cfg):
    def one(item):
        i, ss = item
        base, X, rng = _instance(cfg, ss)
        _, Y, _ = _instance(cfg, rng.integers(2**63))
        Y = Y.matrix * (rng.uniform(0.05, 0.95) * base.radius / norm_zero(base, Y))
        sX, sY = gibbs_state(base, X), gibbs_state(base, Y)
        rep = mixture_membership_probe(base, sX, sY, 0.5)
        return (i, rep.lam, rep.norms.get("zero", np.nan), rep.norms.get("omega", np.nan),
                rep.in_hood, rep.singular)

    res = ExperimentResult(["instance", "lambda", "zero_norm", "omega_norm", "in_hood", "singular"])
    res.rows = pmap(one, _seeds(cfg))
    res.summary = {"in_hood": sum(bool(r[4]) for r in res.rows), "total": len(res.rows)}
    return res


RUNNERS = {
    "norms": run_norms,
    "monotonicity": run_monotonicity,
    "relative-bound": run_relative_bound,
    "gibbs": run_gibbs,
    "trace-tail": run_trace_tail,
    "lambda-independence": run_lambda_independence,
    "equivalence": run_equivalence,
    "atlas": run_atlas,
    "transport": run_transport,
    "mixtures": run_mixtures,
    "probe": run_probe,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.validate().experiment](cfg)

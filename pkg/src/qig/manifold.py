"""Charts, centered scores, shifted-base norms and atlas extension."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, HoodRadiusError, NotSmallError, ProvenanceError
from .gibbs import GibbsState, gibbs_state, regularized_mean
from .linalg import HermitianOperator, as_hermitian, check_same_dim, shift_to_unit_floor
from .perturbation import BasePoint, next_beta, norm, relative_bound_form

CENTER_LAMBDA = 0.5
QUOTIENT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Score:
    """Centered coordinate ``Xhat = X - (rho . X) I`` at a base point."""

    Xhat: HermitianOperator
    base_ref: str

    @property
    def dim(self) -> int:
        return self.Xhat.dim


def center(base: BasePoint, X) -> Score:
    X = as_hermitian(X)
    check_same_dim(base.H, X)
    m = regularized_mean(base.state, X, CENTER_LAMBDA)
    return Score(X.shifted(-m), base.label)


def equivalent_mod_identity(X, Y, tol: float = QUOTIENT_TOL) -> bool:
    """``X ~ Y`` iff ``X - Y`` is a real multiple of the identity."""
    X, Y = as_hermitian(X), as_hermitian(Y)
    check_same_dim(X, Y)
    D = X.matrix - Y.matrix
    n = D.shape[0]
    resid = D - (np.trace(D).real / n) * np.eye(n)
    return bool(np.linalg.norm(resid, 2) <= tol)


def chart(base: BasePoint, state: GibbsState) -> Score:
    """Coordinate of ``state`` in the chart at ``base``.

    The perturbation is recovered as ``H_eff - H0``, which differs from the
    generating ``X`` by an identity shift; centering removes it.
    """
    if state.dim != base.dim:
        raise DimensionMismatch(f"state dim {state.dim} != base dim {base.dim}")
    if state.base_ref != base.label:
        raise ProvenanceError(f"state was built over base {state.base_ref}, not {base.label}")
    return center(base, state.H_eff - base.H)


def inverse_chart(base: BasePoint, s: Score, kind: str = "zero", eps: float | None = None) -> GibbsState:
    if s.base_ref != base.label:
        raise ProvenanceError(f"score is centered at {s.base_ref}, not {base.label}")
    n = norm(base, s.Xhat, kind, eps)
    if not n < base.radius:
        raise HoodRadiusError(f"score lies outside the hood: norm {n!r} >= radius {base.radius!r}",
                              norm=n, radius=base.radius)
    return gibbs_state(base, s.Xhat)


def shifted_base(base: BasePoint, X, b_grid=(0.0,)) -> BasePoint:
    """Base point at ``H0 + X`` (renormalized to ``>= I``) with exponent ``beta0/(1-a)``."""
    a = relative_bound_form(base, X, b_grid).a
    H, _ = shift_to_unit_floor(base.H + as_hermitian(X))
    return BasePoint(H, next_beta(base.beta0, a))


def norm_at(baseX: BasePoint, Y, kind: str = "zero", eps: float | None = None) -> float:
    """Perturbation norm with every Hamiltonian replaced by ``baseX.H``."""
    return norm(baseX, Y, kind, eps)


def _random_symmetric(rng: np.random.Generator, n: int) -> np.ndarray:
    G = rng.standard_normal((n, n))
    return (G + G.T) / 2.0


def norm_ratios(base0: BasePoint, baseX: BasePoint, Ys, kind: str = "zero",
                eps: float | None = None) -> np.ndarray:
    return np.array([norm_at(baseX, Y, kind, eps) / norm_at(base0, Y, kind, eps) for Y in Ys])


def equivalence_constants(base0: BasePoint, baseX: BasePoint, kind: str = "zero",
                          ensemble_size: int = 200, eps: float | None = None,
                          rng=None, Ys=None) -> tuple[float, float]:
    """Empirical ``(min, max)`` of ``||Y||(X) / ||Y||(0)`` over random ``Y``.

    Evidence for norm equivalence, not a proof; pass ``Ys`` to reuse a fixed
    ensemble across base points.
    """
    check_same_dim(base0.H, baseX.H)
    if Ys is None:
        rng = np.random.default_rng(rng)
        Ys = [_random_symmetric(rng, base0.dim) for _ in range(ensemble_size)]
    r = norm_ratios(base0, baseX, Ys, kind, eps)
    return float(r.min()), float(r.max())


# -- atlas -----------------------------------------------------------------

@dataclass(frozen=True)
class AtlasStep:
    Y: HermitianOperator
    a: float
    beta: float


@dataclass(frozen=True, eq=False)
class Atlas:
    """Root base point plus a chain of small extension steps."""

    root: BasePoint
    steps: tuple = ()
    current: BasePoint | None = None

    def __post_init__(self):
        if self.current is None:
            object.__setattr__(self, "current", self.root)

    @property
    def beta(self) -> float:
        return self.current.beta0

    @property
    def total_perturbation(self) -> np.ndarray:
        """Sum of all step perturbations (identity shifts not included)."""
        out = np.zeros_like(self.root.H.matrix)
        for st in self.steps:
            out = out + st.Y.matrix
        return out

    def state(self) -> GibbsState:
        """Gibbs state at the current base."""
        return self.current.state

    def to_json(self) -> str:
        return json.dumps(atlas_to_dict(self))

    @classmethod
    def from_json(cls, text: str) -> "Atlas":
        return atlas_from_dict(json.loads(text))


def extend(atlas: Atlas, Y, kind: str = "zero", eps: float | None = None, b_grid=(0.0,)) -> Atlas:
    """Append a step ``Y`` that is small at the current base."""
    cur = atlas.current
    Y = as_hermitian(Y)
    check_same_dim(cur.H, Y)
    n = norm(cur, Y, kind, eps)
    if not n < cur.radius:
        raise NotSmallError(
            f"step is not small at the current base: norm {n!r} >= 1 - beta = {cur.radius!r}",
            norm=n, radius=cur.radius)
    a = relative_bound_form(cur, Y, b_grid).a
    H, _ = shift_to_unit_floor(cur.H + Y)
    nxt = BasePoint(H, next_beta(cur.beta0, min(a, n)))
    return Atlas(atlas.root, atlas.steps + (AtlasStep(Y, a, nxt.beta0),), nxt)


def _encode(m: np.ndarray):
    m = np.asarray(m)
    if np.iscomplexobj(m):
        return {"real": m.real.tolist(), "imag": m.imag.tolist()}
    return {"real": m.tolist()}


def _decode(d) -> np.ndarray:
    m = np.array(d["real"], dtype=float)
    if "imag" in d:
        m = m + 1j * np.array(d["imag"], dtype=float)
    return m


def atlas_to_dict(atlas: Atlas) -> dict:
    return {
        "root": {"H": _encode(atlas.root.H.matrix), "beta0": atlas.root.beta0,
                 "spectrum": atlas.root.levels.tolist()},
        "steps": [{"Y": _encode(s.Y.matrix), "a": s.a, "beta": s.beta} for s in atlas.steps],
        "current": {"H": _encode(atlas.current.H.matrix), "beta0": atlas.current.beta0},
    }


def atlas_from_dict(d: dict) -> Atlas:
    root = BasePoint(_decode(d["root"]["H"]), float(d["root"]["beta0"]))
    steps = tuple(AtlasStep(HermitianOperator(_decode(s["Y"])), float(s["a"]), float(s["beta"]))
                  for s in d["steps"])
    cur = d.get("current")
    current = BasePoint(_decode(cur["H"]), float(cur["beta0"])) if cur else root
    return Atlas(root, steps, current)

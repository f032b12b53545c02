"""Perturbation classes at a base Hamiltonian and their norms.

For a base ``H >= I`` with resolvent ``R = H^{-1}`` the three norms of a
symmetric perturbation ``X`` are

* omega (operator-bounded):  ``||X R||``
* zero (form-bounded):        ``||R^{1/2} X R^{1/2}||``
* eps, ``0 <= eps <= 1/2``:   ``||R^{1/2+eps} X R^{1/2-eps}||``

All three are evaluated in the eigenbasis of ``H``, where the resolvent
powers are diagonal scalings; the spectral norm is unitarily invariant so
this is exact.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DimensionMismatch, NotSmallError
from .linalg import HermitianOperator, as_hermitian, operator_norm, shift_to_unit_floor

BASE_MIN_EIG_TOL = 1e-12
DEFAULT_EPS_POINTS = 21
BISECTION_STEPS = 50
PLATEAU_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BasePoint:
    """A base Hamiltonian ``H >= I`` together with its trace-class exponent.

    ``beta0`` is declared, not inferred: on a truncation every ``exp(-b H)``
    is trace class, so the exponent belongs to the model being truncated.
    """

    H: HermitianOperator
    beta0: float

    def __post_init__(self):
        object.__setattr__(self, "H", as_hermitian(self.H))
        if not 0.0 < self.beta0 < 1.0:
            raise ValueError(f"beta0 must lie in (0, 1), got {self.beta0}")
        lo = self.H.eigenvalues[0]
        if lo < 1.0 - BASE_MIN_EIG_TOL:
            raise ValueError(f"base Hamiltonian must satisfy H >= I; min eigenvalue {lo!r}")

    @classmethod
    def normalized(cls, H, beta0: float) -> "BasePoint":
        """Shift ``H`` by a multiple of the identity so its minimum eigenvalue is 1."""
        Hs, _ = shift_to_unit_floor(H)
        return cls(Hs, beta0)

    @property
    def dim(self) -> int:
        return self.H.dim

    @property
    def radius(self) -> float:
        """Hood radius ``1 - beta0``."""
        return 1.0 - self.beta0

    @property
    def levels(self) -> np.ndarray:
        return self.H.eigenvalues

    @property
    def basis(self) -> np.ndarray:
        return self.H.spectrum.eigenvectors

    @cached_property
    def R(self) -> HermitianOperator:
        return HermitianOperator(self.H.spectrum.reconstruct(1.0 / self.levels))

    @cached_property
    def label(self) -> str:
        h = hashlib.sha1(np.ascontiguousarray(self.H.matrix).tobytes())
        h.update(repr(float(self.beta0)).encode())
        return h.hexdigest()[:16]

    @cached_property
    def state(self):
        from .gibbs import gibbs_state
        return gibbs_state(self, np.zeros((self.dim, self.dim)))

    def rotate(self, X) -> np.ndarray:
        """Matrix of ``X`` in the eigenbasis of ``H``."""
        m = np.asarray(X.matrix if isinstance(X, HermitianOperator) else X)
        if m.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"perturbation shape {m.shape} does not match base dim {self.dim}")
        U = self.basis
        return U.conj().T @ m @ U


@dataclass(frozen=True)
class PerturbationNorms:
    omega: float
    zero: float
    eps_grid: list = field(default_factory=list)  # [(eps, value), ...]

    def is_monotone(self, rel_tol: float = 1e-10) -> bool:
        vals = [v for _, v in self.eps_grid]
        return all(b >= a - rel_tol * max(abs(a), 1.0) for a, b in zip(vals, vals[1:]))


@dataclass(frozen=True)
class RelativeBound:
    a: float
    b: float
    kind: str  # "form" or "operator"
    curve: tuple = ()  # ((b, a(b)), ...) over the supplied grid


def _check_eps(eps: float):
    if not 0.0 <= eps <= 0.5:
        raise ValueError(f"eps must lie in [0, 1/2], got {eps}")


def _weighted_norm(base: BasePoint, Xt: np.ndarray, eps: float) -> float:
    logh = np.log(base.levels)
    left = np.exp(-(0.5 + eps) * logh)
    right = np.exp(-(0.5 - eps) * logh)
    return operator_norm(left[:, None] * Xt * right[None, :])


def norm_eps(base: BasePoint, X, eps: float) -> float:
    """``||R^{1/2+eps} X R^{1/2-eps}||`` at ``base``."""
    _check_eps(eps)
    return _weighted_norm(base, base.rotate(X), eps)


def norm_zero(base: BasePoint, X) -> float:
    return norm_eps(base, X, 0.0)


def norm_omega(base: BasePoint, X) -> float:
    # ||R X|| = ||X R|| for symmetric X; the eps=1/2 weighting is R X
    return norm_eps(base, X, 0.5)


def norm(base: BasePoint, X, kind: str = "zero", eps: float | None = None) -> float:
    """Dispatch on ``kind`` in {"omega", "zero", "eps"}."""
    if kind == "omega":
        return norm_omega(base, X)
    if kind == "zero":
        return norm_zero(base, X)
    if kind == "eps":
        if eps is None:
            raise ValueError("kind='eps' needs an eps value")
        return norm_eps(base, X, eps)
    raise ValueError(f"unknown norm kind {kind!r}")


def eps_grid(points: int = DEFAULT_EPS_POINTS) -> np.ndarray:
    if points < 2:
        raise ValueError("an eps grid needs at least two points")
    return np.linspace(0.0, 0.5, points)


def norm_profile(base: BasePoint, X, grid=None) -> PerturbationNorms:
    """All three norms, with the eps-norm sampled on ``grid``."""
    grid = eps_grid() if grid is None else np.asarray(grid, dtype=float)
    Xt = base.rotate(X)
    values = []
    for e in grid:
        _check_eps(e)
        values.append((float(e), _weighted_norm(base, Xt, float(e))))
    return PerturbationNorms(
        omega=_weighted_norm(base, Xt, 0.5),
        zero=_weighted_norm(base, Xt, 0.0),
        eps_grid=values,
    )


def quotient_norm(base: BasePoint, X, kind: str = "zero", eps: float | None = None):
    """``min_alpha ||X + alpha I||`` and its minimizer.

    For the zero-norm ``W(alpha) = R^{1/2}(X + alpha I)R^{1/2}`` is Hermitian
    and both its extreme eigenvalues increase with ``alpha``, so the optimum
    is the root of ``lambda_max + lambda_min``.  The other norms are convex
    in ``alpha`` and handled by a bounded scalar search.
    """
    e = {"omega": 0.5, "zero": 0.0}.get(kind, eps)
    if e is None:
        raise ValueError("kind='eps' needs an eps value")
    _check_eps(e)
    Xt = base.rotate(X)
    f0 = _weighted_norm(base, Xt, e)
    if f0 == 0.0:
        return 0.0, 0.0
    if e == 0.0:
        s = 1.0 / np.sqrt(base.levels)
        M = s[:, None] * Xt * s[None, :]
        d = s * s

        def ends(a):
            w = np.linalg.eigvalsh(M + np.diag(a * d))
            return w[0], w[-1]

        def g(a):
            lo, hi = ends(a)
            return lo + hi

        # Weyl: g(a) <= 2 f0 + 2 a min(d) for a < 0, and symmetrically
        span = 1.01 * f0 / d.min()
        alpha = brentq(g, -span, span, xtol=1e-15 * max(1.0, span), rtol=4 * np.finfo(float).eps)
        lo, hi = ends(alpha)
        val = 0.5 * (hi - lo)
        return (float(val), float(alpha)) if val < f0 else (f0, 0.0)
    eye = np.eye(base.dim)
    f = lambda a: _weighted_norm(base, Xt + a * eye, e)  # noqa: E731
    # ||R|| = 1, so |alpha| > 2 f0 cannot beat alpha = 0
    res = minimize_scalar(f, bounds=(-2.0 * f0, 2.0 * f0), method="bounded",
                          options={"xatol": 1e-13 * max(1.0, f0)})
    if res.fun < f0:
        return float(res.fun), float(res.x)
    return f0, 0.0


def is_small(base: BasePoint, X, kind: str = "zero", eps: float | None = None) -> bool:
    """Strict test ``||X|| < 1 - beta0`` in the selected norm."""
    return norm(base, X, kind, eps) < base.radius


# -- relative bounds -------------------------------------------------------

def _form_a(base: BasePoint, Xt: np.ndarray, b: float) -> float:
    s = 1.0 / np.sqrt(base.levels)
    n = base.dim
    up = s[:, None] * (Xt - b * np.eye(n)) * s[None, :]
    down = s[:, None] * (-Xt - b * np.eye(n)) * s[None, :]
    top = max(np.linalg.eigvalsh(up)[-1], np.linalg.eigvalsh(down)[-1])
    return float(max(0.0, top))


def _operator_a(base: BasePoint, Xt: np.ndarray, b: float) -> float:
    # X^2 <= a^2 H^2 + b^2 I certifies ||X psi|| <= a ||H psi|| + b ||psi||
    r = 1.0 / base.levels
    X2 = Xt.conj().T @ Xt - b * b * np.eye(base.dim)
    top = np.linalg.eigvalsh(r[:, None] * X2 * r[None, :])[-1]
    return float(np.sqrt(max(0.0, top)))


def _minimize_over_b(a_of_b, b_grid, kind: str) -> RelativeBound:
    grid = np.asarray(b_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("b_grid must be nonempty")
    if np.any(grid < 0) or np.any(np.diff(grid) < 0):
        raise ValueError("b_grid must be nonnegative and ascending")
    values = [a_of_b(b) for b in grid]
    a_min = min(values)
    k = int(np.argmin(values))
    best_b, best_a = float(grid[k]), values[k]
    if a_min <= PLATEAU_TOL and k > 0:
        # a(b) is strictly decreasing while positive, so the only plateau is
        # a = 0: bisect for the smallest b that reaches it
        lo, hi = float(grid[k - 1]), float(grid[k])
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            if a_of_b(mid) <= a_min:
                hi = mid
            else:
                lo = mid
        best_b, best_a = hi, a_of_b(hi)
    curve = tuple((float(b), float(v)) for b, v in zip(grid, values))
    return RelativeBound(a=float(best_a), b=best_b, kind=kind, curve=curve)


def relative_bound_form(base: BasePoint, X, b_grid=(0.0,)) -> RelativeBound:
    """Smallest grid-certified ``a`` with ``+-X <= a H + b I``.

    For each ``b`` the optimal ``a`` is the largest eigenvalue of
    ``H^{-1/2}(+-X - b I)H^{-1/2}`` (clipped at zero).  The default grid
    ``(0,)`` is the truncation-faithful choice: with ``b >= ||X||`` every
    truncated perturbation has ``a = 0``.
    """
    Xt = base.rotate(X)
    return _minimize_over_b(lambda b: _form_a(base, Xt, b), b_grid, "form")


def relative_bound_operator(base: BasePoint, X, b_grid=(0.0,)) -> RelativeBound:
    Xt = base.rotate(X)
    return _minimize_over_b(lambda b: _operator_a(base, Xt, b), b_grid, "operator")


def next_beta(beta0: float, a: float) -> float:
    """``beta0 / (1 - a)`` for an admissible ``a < 1 - beta0``.

    Just below the boundary the quotient can round to 1.0; the exact value is
    below 1, so the largest float under 1 is returned instead.
    """
    if not a < 1.0 - beta0:
        raise NotSmallError(f"relative bound {a!r} >= 1 - beta = {1.0 - beta0!r}", norm=a, radius=1.0 - beta0)
    return min(beta0 / (1.0 - a), float(np.nextafter(1.0, 0.0)))

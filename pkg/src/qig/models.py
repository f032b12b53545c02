"""Base Hamiltonians and perturbation families on finite truncations.

Families
--------
oscillator
    ``diag(1, 1+s, 1+2s, ...)`` with spacing ``s``; truncations are leading
    blocks of one another.
laplacian1d
    Dirichlet second-difference matrix ``tridiag(-1, 2, -1) / h^2`` plus an
    optional harmonic potential, shifted to ``>= I``.  Refining ``dim``
    refines the grid, so truncations are *not* block nested.
random_spd
    Eigenvalues log-uniform in ``[1, lam_max]`` in a Haar-random basis.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import ortho_group, unitary_group

from .linalg import HermitianOperator, shift_to_unit_floor
from .perturbation import BasePoint, norm

FAMILIES = ("oscillator", "laplacian1d", "random_spd")
PERTURBATION_KINDS = ("bounded", "diagonal", "offdiagonal", "potential", "random_symmetric")


@dataclass(frozen=True)
class ModelSpec:
    family: str
    dim: int
    params: dict = field(default_factory=dict)
    beta0: float = 0.5

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}; expected one of {FAMILIES}")
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if not 0.0 < self.beta0 < 1.0:
            raise ValueError(f"beta0 must lie in (0, 1), got {self.beta0}")

    def with_dim(self, dim: int) -> "ModelSpec":
        return ModelSpec(self.family, dim, dict(self.params), self.beta0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(family=d["family"], dim=int(d["dim"]), params=dict(d.get("params", {})),
                   beta0=float(d.get("beta0", 0.5)))


def oscillator_levels(dim: int, spacing: float = 1.0) -> np.ndarray:
    return 1.0 + spacing * np.arange(dim, dtype=float)


def laplacian_matrix(n: int, length: float | None = None, amplitude: float = 0.0) -> np.ndarray:
    """Dirichlet ``tridiag(-1, 2, -1)/h^2`` on ``n`` interior points, plus ``amplitude * (x - 1/2)^2``.

    With ``length=None`` the grid spacing is 1 (no ``1/h^2`` scaling).
    """
    h = 1.0 if length is None else length / (n + 1)
    T = (2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)) / h**2
    if amplitude:
        x = np.arange(1, n + 1) / (n + 1)
        T = T + np.diag(amplitude * (x - 0.5) ** 2)
    return T


def haar_basis(dim: int, rng, complex_: bool = False) -> np.ndarray:
    if dim == 1:
        return np.ones((1, 1), dtype=complex if complex_ else float)
    group = unitary_group if complex_ else ortho_group
    return group.rvs(dim, random_state=rng)


def _rng(spec: ModelSpec, seed=None) -> np.random.Generator:
    return np.random.default_rng(spec.params.get("seed", 0) if seed is None else seed)


def make_base(spec: ModelSpec) -> BasePoint:
    p = spec.params
    n = spec.dim
    if spec.family == "oscillator":
        spacing = float(p.get("spacing", 1.0))
        if spacing <= 0:
            raise ValueError("oscillator spacing must be positive")
        H = np.diag(oscillator_levels(n, spacing))
    elif spec.family == "laplacian1d":
        length = p.get("length")
        H = laplacian_matrix(n, None if length is None else float(length), float(p.get("amplitude", 0.0)))
    else:
        lam_max = float(p.get("lam_max", 100.0))
        if lam_max < 1.0:
            raise ValueError("lam_max must be >= 1")
        rng = _rng(spec)
        levels = np.exp(rng.uniform(0.0, np.log(lam_max), n))
        U = haar_basis(n, rng, bool(p.get("complex", False)))
        H = (U * levels) @ U.conj().T
    Hs, _ = shift_to_unit_floor(HermitianOperator(H))
    return BasePoint(Hs, spec.beta0)


def _direction(spec: ModelSpec, base: BasePoint, kind: str, rng) -> np.ndarray:
    n = spec.dim
    U, h = base.basis, base.levels
    if kind == "bounded":
        G = rng.standard_normal((n, n))
        G = (G + G.T) / 2.0
        return G / np.linalg.norm(G, 2)
    if kind == "diagonal":
        # commutes with H: a random relative reweighting of each level
        g = rng.uniform(-1.0, 1.0, n)
        return (U * (g * h)) @ U.conj().T
    if kind == "offdiagonal":
        # unit hopping between neighbouring levels of H
        A = np.eye(n, k=1) + np.eye(n, k=-1)
        return U @ A @ U.conj().T
    if kind == "potential":
        x = np.arange(1, n + 1) / (n + 1)
        return np.diag((x - 0.5) ** 2)
    if kind == "random_symmetric":
        G = rng.standard_normal((n, n))
        G = (G + G.T) / 2.0
        q = h ** 0.25
        return U @ (q[:, None] * G * q[None, :]) @ U.conj().T
    raise ValueError(f"unknown perturbation kind {kind!r}; expected one of {PERTURBATION_KINDS}")


def make_perturbation(spec: ModelSpec, kind: str, scale: float, norm_kind: str = "zero",
                      eps: float | None = None, seed=None, base: BasePoint | None = None) -> HermitianOperator:
    """A symmetric perturbation of the given ``kind`` with ``norm(base, X) == scale``."""
    if not np.isfinite(scale):
        raise ValueError("scale must be finite")
    base = make_base(spec) if base is None else base
    D = _direction(spec, base, kind, _rng(spec, seed))
    n = norm(base, D, norm_kind, eps)
    if n == 0.0:
        raise ValueError(f"perturbation direction {kind!r} vanishes at dim {spec.dim}; cannot scale")
    return HermitianOperator(D * (scale / n))


def relative_ladder(levels, diag: float, hop: float) -> np.ndarray:
    """Tridiagonal ``X`` with ``X_nn = diag*h_n`` and ``X_{n,n+1} = hop*sqrt(h_n h_{n+1})``.

    Its leading blocks are the truncations of one fixed form-bounded
    perturbation of ``diag(levels)``.
    """
    h = np.asarray(levels, dtype=float)
    off = hop * np.sqrt(h[:-1] * h[1:])
    return np.diag(diag * h) + np.diag(off, 1) + np.diag(off, -1)


def leading_blocks(M):
    """``N -> M[:N, :N]`` for nested truncation studies."""
    M = np.asarray(M)

    def family(N: int) -> np.ndarray:
        if N > M.shape[0]:
            raise ValueError(f"truncation {N} exceeds the stored dimension {M.shape[0]}")
        return M[:N, :N]

    return family


def laplacian_spectrum_family(length: float | None = None, amplitude: float = 0.0):
    """``N -> spectrum`` of the ``N``-point laplacian, shifted to ``>= 1``.

    Refinement is not block nested, so only spectral sums are meaningful.
    """
    def family(N: int) -> np.ndarray:
        w = np.linalg.eigvalsh(laplacian_matrix(N, length, amplitude))
        return w - w[0] + 1.0

    return family


def ensemble_seeds(seed: int, n: int) -> list:
    """Independent child seeds for ``n`` ensemble members."""
    return np.random.SeedSequence(seed).spawn(n)


def random_instance(seed, dim: int, lam_max: float = 100.0, beta0: float = 0.5,
                    size: float | None = None, kind: str = "random_symmetric"):
    """Random ``(base, X)`` with ``||X||_0 = size`` (default uniform in the hood)."""
    rng = np.random.default_rng(seed)
    spec = ModelSpec("random_spd", dim, {"lam_max": lam_max, "seed": int(rng.integers(2**63))}, beta0)
    base = make_base(spec)
    if size is None:
        size = rng.uniform(0.05, 0.95) * base.radius
    X = make_perturbation(spec, kind, size, seed=int(rng.integers(2**63)), base=base)
    return base, X

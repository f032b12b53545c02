"""Exponential (+1) affine structure, its parallel transport, and the
density-matrix (-1) mixture used for contrast."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotSmallError, ProvenanceError
from .gibbs import GibbsState, gibbs_state
from .linalg import HermitianOperator, as_hermitian, check_same_dim
from .manifold import Score, center
from .perturbation import BasePoint, is_small, norm, quotient_norm

SINGULAR_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class TangentVector:
    score: Score

    @property
    def base_ref(self) -> str:
        return self.score.base_ref


def tangent(base: BasePoint, X) -> TangentVector:
    """Tangent vector at ``base`` of the curve ``t -> rho_{tX}``."""
    return TangentVector(center(base, X))


def exp_mixture(base: BasePoint, X, Y, lam: float) -> GibbsState:
    """(+1)-mixture ``rho_{lam X + (1-lam) Y}``."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    X, Y = as_hermitian(X), as_hermitian(Y)
    for name, P in (("X", X), ("Y", Y)):
        if not is_small(base, P):
            raise NotSmallError(f"{name} is not small at the base point")
    return gibbs_state(base, HermitianOperator(lam * X.matrix + (1.0 - lam) * Y.matrix))


def mix_mixture(sX: GibbsState, sY: GibbsState, lam: float) -> HermitianOperator:
    """(-1)-mixture ``lam rho_X + (1-lam) rho_Y``."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    check_same_dim(sX.rho, sY.rho)
    return HermitianOperator(lam * sX.rho.matrix + (1.0 - lam) * sY.rho.matrix)


def trace_distance(rho, sigma) -> float:
    D = np.asarray(rho) - np.asarray(sigma)
    return 0.5 * float(np.abs(np.linalg.eigvalsh(D)).sum())


def parallel_transport(v: TangentVector, source: BasePoint, target: BasePoint, path=None) -> TangentVector:
    """(+1)-parallel transport: re-center the same line ``{Z + alpha I}`` at ``target``.

    ``path`` is validated but never enters the computation, so the result is
    path independent by construction.
    """
    if v.base_ref != source.label:
        raise ProvenanceError(f"tangent vector lives at {v.base_ref}, not at {source.label}")
    if path is not None:
        path = list(path)
        if not path or path[0].label != source.label or path[-1].label != target.label:
            raise ValueError("path endpoints do not match source and target")
        for p in path:
            check_same_dim(p.H, source.H)
    return TangentVector(center(target, v.score.Xhat))


@dataclass(frozen=True)
class ProbeReport:
    lam: float
    singular: bool
    min_eigenvalue: float
    norms: dict = field(default_factory=dict)  # best representative, per kind
    raw_norms: dict = field(default_factory=dict)  # D = K - H0 as recovered
    alpha: float = 0.0
    in_hood: bool = False


def mixture_membership_probe(base: BasePoint, sX: GibbsState, sY: GibbsState, lam: float,
                             kinds=("zero", "omega")) -> ProbeReport:
    """Diagnostic: does the (-1)-mixture happen to lie in the hood of ``base``?

    Recovers ``K = -log sigma`` (up to identity shift), takes ``D = K - H0``
    and minimizes each norm over the line ``D + alpha I``.  A single
    truncation cannot settle membership in general.
    """
    kinds = tuple(dict.fromkeys(("zero",) + tuple(kinds)))
    sigma = mix_mixture(sX, sY, lam)
    w, V = np.linalg.eigh(sigma.matrix)
    if w[0] < SINGULAR_FLOOR:
        return ProbeReport(lam=lam, singular=True, min_eigenvalue=float(w[0]))
    K = (V * -np.log(w)) @ V.conj().T
    D = K - base.H.matrix
    norms, raw = {}, {}
    alpha = 0.0
    for kind in kinds:
        raw[kind] = norm(base, D, kind)
        val, a = quotient_norm(base, D, kind)
        norms[kind] = val
        if kind == "zero":
            alpha = float(a)
    return ProbeReport(lam=lam, singular=False, min_eigenvalue=float(w[0]), norms=norms,
                       raw_norms=raw, alpha=alpha,
                       in_hood=bool(norms.get("zero", np.inf) < base.radius))

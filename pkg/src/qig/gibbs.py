"""Perturbed Gibbs states, regularized means and trace-class diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import NotSmallError
from .linalg import HermitianOperator, as_hermitian, check_same_dim, eigvalsh_fast, shift_to_unit_floor
from .perturbation import BasePoint, RelativeBound, next_beta, quotient_norm, relative_bound_form

SEMIBOUND_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GibbsState:
    """``rho = exp(-H_eff) / Z`` with ``H_eff = H0 + X + shift*I >= I``.

    ``logZ`` is the log partition function of ``H_eff`` (the free energy
    Psi); the unshifted generator's value is ``logZ + shift``.
    """

    rho: HermitianOperator
    logZ: float
    H_eff: HermitianOperator
    beta_class: float
    X: HermitianOperator
    shift: float
    base_ref: str
    bound: RelativeBound | None = None

    @property
    def dim(self) -> int:
        return self.rho.dim

    @property
    def free_energy(self) -> float:
        return self.logZ

    @property
    def log_partition_unshifted(self) -> float:
        return self.logZ + self.shift

    @cached_property
    def populations(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (clipped at 0) and eigenvectors of ``rho`` itself."""
        w, V = np.linalg.eigh(self.rho.matrix)
        return np.clip(w, 0.0, None), V


def _boltzmann(H_eff: HermitianOperator):
    mu = H_eff.eigenvalues
    w = np.exp(-(mu - mu[0]))
    Z = w.sum()
    rho = H_eff.spectrum.reconstruct(w / Z)
    return HermitianOperator(rho), float(-mu[0] + math.log(Z))


def gibbs_state(base: BasePoint, X, b_grid=(0.0,)) -> GibbsState:
    """Construct the state of the form sum ``H0 + X`` for a form-small ``X``.

    The state depends only on the line ``{X + alpha I}``, so smallness and
    the relative bound are evaluated on its best representative.
    """
    X = as_hermitian(X)
    check_same_dim(base.H, X)
    n0, alpha = quotient_norm(base, X, "zero")
    if not n0 < base.radius:
        raise NotSmallError(
            f"perturbation is not small: min over identity shifts of ||X||_0 is {n0!r} "
            f">= 1 - beta0 = {base.radius!r}",
            norm=n0, radius=base.radius)
    bound = relative_bound_form(base, X.shifted(alpha), b_grid)
    H_eff, shift = shift_to_unit_floor(base.H + X)
    rho, logZ = _boltzmann(H_eff)
    return GibbsState(
        rho=rho, logZ=logZ, H_eff=H_eff,
        beta_class=next_beta(base.beta0, bound.a),
        X=X, shift=float(shift), base_ref=base.label, bound=bound,
    )


def semibound_check(base: BasePoint, X, bound: RelativeBound) -> bool:
    """Whether ``H0 + X`` is bounded below by ``-b``."""
    lo = (base.H + as_hermitian(X)).eigenvalues[0]
    return bool(lo >= -bound.b - SEMIBOUND_TOL)


def regularized_mean(state: GibbsState, X, lam: float = 0.5) -> float:
    """``Tr(rho^lam X rho^(1-lam))`` using the eigendecomposition of ``rho``."""
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    m = X.matrix if isinstance(X, HermitianOperator) else np.asarray(X)
    check_same_dim(state.rho, m)
    p, V = state.populations
    Vh = V.conj().T
    left = (V * p ** lam) @ Vh
    right = (V * p ** (1.0 - lam)) @ Vh
    return float(np.real(np.einsum("ij,ji->", left, m @ right)))


@dataclass(frozen=True)
class TraceTailReport:
    beta: float
    dims: list
    partial_traces: list
    converged: bool
    tail_estimate: float


def _spectrum_of(obj) -> np.ndarray:
    if isinstance(obj, HermitianOperator):
        return obj.eigenvalues
    arr = np.asarray(obj)
    if arr.ndim == 1:
        return np.sort(arr.real)
    return eigvalsh_fast(arr)


def trace_tail(H_family: Callable, beta: float, dims, tail_tol: float = 1e-12) -> TraceTailReport:
    """Partial traces ``Tr exp(-beta H^(N))`` along a sequence of truncations.

    ``H_family(N)`` returns the truncated Hamiltonian (or its spectrum as a
    1-D array).  Convergence requires the last two increments (or the only
    one) to be below ``tail_tol``.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    dims = sorted(int(d) for d in dims)
    traces = [float(np.exp(-beta * _spectrum_of(H_family(n))).sum()) for n in dims]
    incs = np.diff(traces)
    if math.isinf(tail_tol):
        converged = True
    elif incs.size == 0:
        converged = False
    else:
        k = min(2, incs.size)
        converged = bool(np.all(np.abs(incs[-k:]) < tail_tol))
    if incs.size == 0:
        tail = 0.0 if math.isinf(tail_tol) else math.inf
    elif incs.size >= 2 and incs[-2] > 0 and 0 <= incs[-1] < incs[-2]:
        r = incs[-1] / incs[-2]
        tail = float(incs[-1] * r / (1.0 - r))
    else:
        tail = float(abs(incs[-1])) if incs[-1] == 0 else math.inf
    return TraceTailReport(beta=float(beta), dims=dims, partial_traces=traces,
                           converged=converged, tail_estimate=tail)


def cp_membership(state: GibbsState, p: float) -> tuple[bool, float]:
    """Schatten-type sum ``sum_i lambda_i^p`` of the density matrix.

    Every truncation is finite, so the flag only reports a finite value;
    growth of the sum across truncations is the actual diagnostic.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    lam, _ = state.populations
    total = float(np.sum(lam[lam > 0] ** p))
    return math.isfinite(total), total

"""Dense Hermitian spectral kernel.

Every matrix function in the package goes through a full eigendecomposition.
Operators are immutable; the spectral decomposition is computed once on first
use and cached on the instance.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .errors import DimensionMismatch, DomainError, NumericalError

ASYMMETRY_WARN = 1e-8
NEG_POWER_FLOOR = 1e-14


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns, unitary

    def reconstruct(self, values=None):
        """Return ``U diag(values) U*`` (defaults to the eigenvalues)."""
        w = self.eigenvalues if values is None else values
        U = self.eigenvectors
        return (U * w) @ U.conj().T


class HermitianOperator:
    """A dense self-adjoint matrix.

    The input is symmetrized as ``(A + A*)/2``; a warning is issued when the
    discarded anti-Hermitian part exceeds ``1e-8`` in max-abs.
    """

    def __init__(self, entries):
        if isinstance(entries, HermitianOperator):
            m = entries.matrix
        else:
            m = np.array(entries)
            if m.ndim == 0:
                m = m.reshape(1, 1)
            if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
                raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
            if not np.iscomplexobj(m):
                m = m.astype(float)
            asym = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
            if asym > ASYMMETRY_WARN:
                warnings.warn(f"input is not Hermitian (asymmetry {asym:.3g}); symmetrizing",
                              stacklevel=2)
            m = 0.5 * (m + m.conj().T)
            if np.iscomplexobj(m) and not np.any(m.imag):
                m = m.real.copy()
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    @cached_property
    def spectrum(self) -> SpectralDecomposition:
        return spectral(self)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    def __array__(self, dtype=None, copy=None):
        return self._m if dtype is None else self._m.astype(dtype)

    def __add__(self, other):
        return HermitianOperator(self._m + _mat(other))

    __radd__ = __add__

    def __sub__(self, other):
        return HermitianOperator(self._m - _mat(other))

    def __rsub__(self, other):
        return HermitianOperator(_mat(other) - self._m)

    def __neg__(self):
        return HermitianOperator(-self._m)

    def __mul__(self, t):
        if not np.isscalar(t) or np.iscomplexobj(t):
            return NotImplemented
        return HermitianOperator(float(t) * self._m)

    __rmul__ = __mul__

    def shifted(self, alpha: float) -> "HermitianOperator":
        """``A + alpha * I``."""
        return HermitianOperator(self._m + alpha * np.eye(self.dim))

    def __repr__(self):
        return f"HermitianOperator(dim={self.dim})"


def _mat(A) -> np.ndarray:
    if isinstance(A, HermitianOperator):
        return A.matrix
    if np.isscalar(A):
        raise TypeError("scalar operands are ambiguous; use .shifted(alpha) for alpha*I")
    return np.asarray(A)


def as_hermitian(A) -> HermitianOperator:
    return A if isinstance(A, HermitianOperator) else HermitianOperator(A)


def identity(dim: int) -> HermitianOperator:
    return HermitianOperator(np.eye(dim))


def spectral(A) -> SpectralDecomposition:
    """Eigendecomposition with ascending eigenvalues."""
    m = A.matrix if isinstance(A, HermitianOperator) else np.asarray(A)
    if is_diagonal(m):
        d = np.real(np.diag(m))
        order = np.argsort(d, kind="stable")
        w = d[order].copy()
        U = np.eye(m.shape[0], dtype=m.dtype)[:, order]
        w.setflags(write=False)
        U.setflags(write=False)
        return SpectralDecomposition(w, U)
    try:
        w, U = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise NumericalError("eigendecomposition produced non-finite eigenvalues")
    w.setflags(write=False)
    U.setflags(write=False)
    return SpectralDecomposition(w, U)


def is_diagonal(m: np.ndarray) -> bool:
    return not np.any(m - np.diag(np.diag(m)))


def eigvalsh_fast(m: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues, using the diagonal or real tridiagonal structure when present."""
    m = np.asarray(m)
    if is_diagonal(m):
        return np.sort(np.real(np.diag(m)))
    if not np.iscomplexobj(m) and m.shape[0] > 2:
        off = np.diag(m, 1)
        if not np.any(np.triu(m, 2)) and not np.any(np.tril(m, -2)):
            return eigvalsh_tridiagonal(np.diag(m).copy(), off.copy())
    return np.linalg.eigvalsh(m)


def _is_nonneg_int(t: float) -> bool:
    return float(t).is_integer() and t >= 0


def _apply(fn: str, w: np.ndarray, param) -> np.ndarray:
    if fn == "exp":
        return np.exp(w)
    if fn == "negexp":
        beta = 1.0 if param is None else float(param)
        return np.exp(-beta * w)
    if fn == "log":
        if w[0] <= 0:
            raise DomainError(f"log requires positive spectrum; eigenvalue {w[0]!r}")
        return np.log(w)
    if fn == "power":
        if param is None:
            raise ValueError("power requires an exponent")
        t = float(param)
        if _is_nonneg_int(t):
            return w ** t
        if t < 0 and w[0] < NEG_POWER_FLOOR:
            raise DomainError(f"power({t}) requires eigenvalues >= {NEG_POWER_FLOOR}; "
                              f"eigenvalue {w[0]!r}")
        if w[0] <= 0:
            raise DomainError(f"power({t}) requires positive spectrum; eigenvalue {w[0]!r}")
        return w ** t
    raise ValueError(f"unknown matrix function {fn!r}")


def matrix_fn(A, fn: str, param=None) -> HermitianOperator:
    """Apply a scalar function to the spectrum of ``A``.

    ``fn`` is one of ``"exp"``, ``"log"``, ``"power"`` (exponent ``param``)
    or ``"negexp"`` (``exp(-param * A)``, default ``param=1``).
    """
    A = as_hermitian(A)
    sd = A.spectrum
    return HermitianOperator(sd.reconstruct(_apply(fn, sd.eigenvalues, param)))


def operator_norm(A) -> float:
    """Largest singular value (spectral norm)."""
    m = _mat(A)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def check_same_dim(*ops):
    dims = {np.shape(_mat(o))[0] for o in ops}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")


def shift_to_unit_floor(A):
    """Return ``(A + alpha I, alpha)`` with the minimum eigenvalue moved to 1.

    A second pass absorbs the roundoff of the first shift so the result is
    never below 1.
    """
    A = as_hermitian(A)
    alpha = 1.0 - A.eigenvalues[0]
    out = A.shifted(alpha)
    lo = out.eigenvalues[0]
    if lo < 1.0:
        alpha += 1.0 - lo
        out = A.shifted(alpha)
    return out, alpha

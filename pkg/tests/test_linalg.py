import warnings

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from qig.errors import DimensionMismatch, DomainError
from qig.linalg import (HermitianOperator, eigvalsh_fast, matrix_fn, operator_norm,
                        shift_to_unit_floor, spectral)


def random_spd(rng, n, lo=0.5, hi=20.0):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (Q * rng.uniform(lo, hi, n)) @ Q.T


def test_spectral_diagonal_orders_ascending():
    sd = spectral(HermitianOperator(np.diag([2.0, 1.0])))
    np.testing.assert_array_equal(sd.eigenvalues, [1.0, 2.0])
    P = np.abs(sd.eigenvectors)
    np.testing.assert_array_equal(P, [[0, 1], [1, 0]])


def test_spectral_identity():
    np.testing.assert_array_equal(spectral(HermitianOperator(np.eye(3))).eigenvalues, [1, 1, 1])


def test_spectral_all_ones_2x2():
    # characteristic polynomial l^2 - 2l = 0
    np.testing.assert_allclose(spectral(HermitianOperator([[1, 1], [1, 1]])).eigenvalues,
                               [0.0, 2.0], atol=1e-14)


def test_spectral_invariants(rng):
    for n in (1, 3, 17, 40):
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A = HermitianOperator(A + A.conj().T)
        sd = A.spectrum
        U = sd.eigenvectors
        assert np.all(np.diff(sd.eigenvalues) >= 0)
        err = np.linalg.norm(sd.reconstruct() - A.matrix, 2)
        assert err <= 1e-10 * max(1.0, operator_norm(A))
        assert np.linalg.norm(U.conj().T @ U - np.eye(n), 2) <= 1e-10


def test_symmetrization_warns_above_threshold():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        HermitianOperator([[1.0, 1e-10], [0.0, 1.0]])
    with pytest.warns(UserWarning):
        A = HermitianOperator([[1.0, 1e-3], [0.0, 1.0]])
    np.testing.assert_array_equal(A.matrix, A.matrix.T)


def test_rejects_non_square():
    with pytest.raises(DimensionMismatch):
        HermitianOperator(np.zeros((2, 3)))


def test_operator_is_immutable():
    A = HermitianOperator(np.eye(2))
    with pytest.raises(ValueError):
        A.matrix[0, 0] = 5.0


def test_power_minus_one_diagonal():
    np.testing.assert_allclose(matrix_fn(np.diag([1.0, 2.0]), "power", -1).matrix,
                               np.diag([1.0, 0.5]), atol=0)


def test_negexp_diagonal():
    np.testing.assert_allclose(matrix_fn(np.diag([1.0, 2.0]), "negexp", 1.0).matrix,
                               np.diag(np.exp([-1.0, -2.0])), rtol=1e-15)


def test_sqrt_squared(rng):
    A = random_spd(rng, 12)
    S = matrix_fn(A, "power", 0.5).matrix
    np.testing.assert_allclose(S @ S, A, rtol=0, atol=1e-10 * np.linalg.norm(A, 2))


def test_exp_matches_scipy(rng):
    A = random_spd(rng, 9, -2.0, 2.0)
    np.testing.assert_allclose(matrix_fn(A, "exp").matrix, sla.expm(A), rtol=1e-12, atol=1e-12)


def test_log_domain_error_names_eigenvalue():
    with pytest.raises(DomainError, match="-1"):
        matrix_fn(np.diag([-1.0, 2.0]), "log")


def test_negative_power_floor_is_hard_error():
    with pytest.raises(DomainError):
        matrix_fn(np.diag([1e-15, 1.0]), "power", -0.5)
    with pytest.raises(DomainError):
        matrix_fn(np.diag([0.0, 1.0]), "power", 0.5)
    # nonnegative integer powers are defined everywhere
    np.testing.assert_allclose(matrix_fn(np.diag([-2.0, 1.0]), "power", 2).matrix, np.diag([4.0, 1.0]))


def test_operator_norm_examples():
    assert operator_norm(np.diag([3.0, -5.0])) == 5.0
    assert operator_norm(np.zeros((4, 4))) == 0.0
    # A*A = diag(1, 0.25) so singular values {1, 1/2}
    assert operator_norm(np.array([[0.0, 0.5], [1.0, 0.0]])) == pytest.approx(1.0, abs=1e-15)


@given(st.integers(0, 2**32 - 1), st.floats(-2, 2), st.floats(-2, 2))
def test_power_group_law(seed, s, t):
    A = random_spd(np.random.default_rng(seed), 6, 1.0, 10.0)
    lhs = matrix_fn(A, "power", s).matrix @ matrix_fn(A, "power", t).matrix
    rhs = matrix_fn(A, "power", s + t).matrix
    assert np.linalg.norm(lhs - rhs, 2) <= 1e-9 * np.linalg.norm(rhs, 2)


@given(st.integers(0, 2**32 - 1))
def test_exp_log_roundtrip(seed):
    A = random_spd(np.random.default_rng(seed), 7, 0.1, 30.0)
    back = matrix_fn(matrix_fn(A, "log"), "exp").matrix
    assert np.linalg.norm(back - A, 2) <= 1e-9 * np.linalg.norm(A, 2)


@given(st.integers(0, 2**32 - 1))
def test_operator_norm_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((2, 8, 8))
    assert operator_norm(A @ B) <= operator_norm(A) * operator_norm(B) + 1e-12


def test_eigvalsh_fast_structured(rng):
    d = rng.uniform(1, 5, 30)
    e = rng.standard_normal(29)
    T = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    np.testing.assert_allclose(eigvalsh_fast(T), np.linalg.eigvalsh(T), atol=1e-12)
    np.testing.assert_array_equal(eigvalsh_fast(np.diag(d)), np.sort(d))


def test_shift_to_unit_floor(rng):
    A = HermitianOperator(random_spd(rng, 10, -3.0, 4.0))
    B, alpha = shift_to_unit_floor(A)
    assert B.eigenvalues[0] >= 1.0
    assert B.eigenvalues[0] - 1.0 < 1e-12
    np.testing.assert_allclose(B.matrix - A.matrix, alpha * np.eye(10), atol=1e-14)

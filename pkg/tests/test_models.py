import numpy as np
import pytest

from qig.models import (ModelSpec, laplacian_spectrum_family, leading_blocks, make_base,
                        make_perturbation, random_instance, relative_ladder)
from qig.perturbation import norm, norm_omega, norm_zero


def test_oscillator_levels():
    np.testing.assert_array_equal(make_base(ModelSpec("oscillator", 5)).H.matrix, np.diag([1., 2, 3, 4, 5]))
    b = make_base(ModelSpec("oscillator", 3, {"spacing": 0.5}, beta0=0.2))
    np.testing.assert_array_equal(b.levels, [1.0, 1.5, 2.0])
    assert b.beta0 == 0.2


@pytest.mark.parametrize("n", [1, 2, 7, 40])
def test_laplacian_spectrum_oracle(n):
    b = make_base(ModelSpec("laplacian1d", n))
    k = np.arange(1, n + 1)
    w = 2 - 2 * np.cos(k * np.pi / (n + 1))
    np.testing.assert_allclose(b.levels, w - w[0] + 1.0, atol=1e-12)
    assert np.count_nonzero(np.triu(b.H.matrix, 2)) == 0


def test_laplacian_scaled_and_potential():
    n, L = 30, 2.0
    h = L / (n + 1)
    b = make_base(ModelSpec("laplacian1d", n, {"length": L}))
    k = np.arange(1, n + 1)
    w = (2 - 2 * np.cos(k * np.pi / (n + 1))) / h**2
    np.testing.assert_allclose(b.levels, w - w[0] + 1.0, rtol=1e-11)
    bp = make_base(ModelSpec("laplacian1d", n, {"amplitude": 5.0}))
    assert not np.allclose(bp.levels, make_base(ModelSpec("laplacian1d", n)).levels)


def test_laplacian_spectrum_family():
    fam = laplacian_spectrum_family()
    np.testing.assert_allclose(fam(9), make_base(ModelSpec("laplacian1d", 9)).levels, atol=1e-12)


def test_random_spd_seeded_and_bounded():
    spec = ModelSpec("random_spd", 12, {"seed": 7, "lam_max": 50.0})
    a, b = make_base(spec), make_base(spec)
    np.testing.assert_array_equal(a.H.matrix, b.H.matrix)
    assert a.levels[0] >= 1.0 - 1e-12 and a.levels[-1] <= 50.0 + 1e-9
    c = make_base(ModelSpec("random_spd", 12, {"seed": 8, "lam_max": 50.0}))
    assert not np.array_equal(a.H.matrix, c.H.matrix)
    z = make_base(ModelSpec("random_spd", 6, {"seed": 1, "complex": True}))
    assert np.iscomplexobj(z.H.matrix)


def test_oscillator_is_block_nested():
    big = make_base(ModelSpec("oscillator", 10)).H.matrix
    small = make_base(ModelSpec("oscillator", 6)).H.matrix
    np.testing.assert_array_equal(big[:6, :6], small)


def test_spec_validation_and_roundtrip():
    with pytest.raises(ValueError):
        ModelSpec("harmonic", 3)
    with pytest.raises(ValueError):
        ModelSpec("oscillator", 0)
    with pytest.raises(ValueError):
        ModelSpec("oscillator", 3, beta0=1.0)
    spec = ModelSpec("random_spd", 4, {"seed": 3}, 0.4)
    assert ModelSpec.from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("kind", ["bounded", "diagonal", "offdiagonal", "potential", "random_symmetric"])
@pytest.mark.parametrize("norm_kind", ["zero", "omega"])
def test_perturbation_scaled(kind, norm_kind):
    spec = ModelSpec("laplacian1d", 12)
    X = make_perturbation(spec, kind, 0.37, norm_kind, seed=2)
    assert norm(make_base(spec), X, norm_kind) == pytest.approx(0.37, rel=1e-12)
    np.testing.assert_array_equal(X.matrix, X.matrix.T)


def test_bounded_kind_omega_below_operator_norm():
    spec = ModelSpec("oscillator", 20)
    X = make_perturbation(spec, "bounded", 2.0, seed=1)
    assert norm_omega(make_base(spec), X) <= np.linalg.norm(X.matrix, 2)


def test_offdiagonal_reproduces_worked_example():
    X = make_perturbation(ModelSpec("oscillator", 2), "offdiagonal", 1.0, "omega")
    np.testing.assert_allclose(X.matrix, [[0, 1], [1, 0]], atol=1e-15)


def test_potential_is_multiplication_operator():
    X = make_perturbation(ModelSpec("laplacian1d", 9), "potential", 0.1)
    assert np.count_nonzero(X.matrix - np.diag(np.diag(X.matrix))) == 0


def test_zero_direction_rejected():
    with pytest.raises(ValueError):
        make_perturbation(ModelSpec("oscillator", 1), "offdiagonal", 0.1)
    with pytest.raises(ValueError):
        make_perturbation(ModelSpec("oscillator", 3), "nonsense", 0.1)


def test_perturbation_determinism():
    spec = ModelSpec("random_spd", 8, {"seed": 4})
    a = make_perturbation(spec, "random_symmetric", 0.2, seed=9)
    b = make_perturbation(spec, "random_symmetric", 0.2, seed=9)
    np.testing.assert_array_equal(a.matrix, b.matrix)


def test_relative_ladder_nested_and_bounded():
    h = np.arange(1.0, 401.0)
    X = relative_ladder(h, -0.1, 0.05)
    fam = leading_blocks(X)
    np.testing.assert_array_equal(fam(50), relative_ladder(h[:50], -0.1, 0.05))
    # relative bound approaches |diag| + 2 |hop|
    from qig.perturbation import BasePoint
    a = norm_zero(BasePoint(np.diag(h), 0.5), X)
    assert 0.19 < a <= 0.2 + 1e-12
    with pytest.raises(ValueError):
        fam(401)


def test_random_instance_in_hood():
    base, X = random_instance(0, 10)
    assert norm_zero(base, X) < base.radius

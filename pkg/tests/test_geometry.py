import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qig.errors import NotSmallError
from qig.geometry import (exp_mixture, mix_mixture, mixture_membership_probe, parallel_transport,
                          tangent, trace_distance)
from qig.gibbs import gibbs_state, regularized_mean
from qig.manifold import center, chart, shifted_base
from qig.models import random_instance
from qig.perturbation import BasePoint

# non-commuting witness on H0 = diag(1, 2)
WIT_X = np.array([[0.0, 0.3], [0.3, 0.0]])
WIT_Y = np.diag([0.3, -0.3])


@pytest.fixture
def base2():
    return BasePoint(np.diag([1.0, 2.0]), 0.5)


def test_exp_mixture_endpoints(base2):
    sX, sY = gibbs_state(base2, WIT_X), gibbs_state(base2, WIT_Y)
    np.testing.assert_allclose(exp_mixture(base2, WIT_X, WIT_Y, 1.0).rho.matrix, sX.rho.matrix, atol=1e-15)
    np.testing.assert_allclose(exp_mixture(base2, WIT_X, WIT_Y, 0.0).rho.matrix, sY.rho.matrix, atol=1e-15)
    for lam in (0.2, 0.7):
        np.testing.assert_allclose(exp_mixture(base2, WIT_X, WIT_X, lam).rho.matrix, sX.rho.matrix,
                                   atol=1e-15)


def test_exp_mixture_commuting_closed_form(base2):
    X, Y = np.diag([0.2, -0.1]), np.diag([-0.3, 0.1])
    lam = 0.25
    levels = np.array([1.0, 2.0]) + lam * np.diag(X) + (1 - lam) * np.diag(Y)
    w = np.exp(-levels)
    np.testing.assert_allclose(np.diag(exp_mixture(base2, X, Y, lam).rho.matrix), w / w.sum(), atol=1e-15)


def test_exp_mixture_rejects_large(base2):
    with pytest.raises(NotSmallError):
        exp_mixture(base2, 0.9 * np.diag([1.0, -2.0]), WIT_Y, 0.5)
    with pytest.raises(ValueError):
        exp_mixture(base2, WIT_X, WIT_Y, 1.5)


def test_mix_mixture_basic(base2):
    sX, sY = gibbs_state(base2, WIT_X), gibbs_state(base2, WIT_Y)
    np.testing.assert_array_equal(mix_mixture(sX, sY, 1.0).matrix, sX.rho.matrix)
    np.testing.assert_array_equal(mix_mixture(sX, sY, 0.0).matrix, sY.rho.matrix)
    np.testing.assert_allclose(mix_mixture(sX, sX, 0.4).matrix, sX.rho.matrix, atol=1e-16)
    m = mix_mixture(sX, sY, 0.3)
    assert abs(np.trace(m.matrix) - 1) < 1e-14 and m.eigenvalues[0] > 0


def test_witness_mixtures_differ(base2):
    sX, sY = gibbs_state(base2, WIT_X), gibbs_state(base2, WIT_Y)
    d = trace_distance(exp_mixture(base2, WIT_X, WIT_Y, 0.5).rho, mix_mixture(sX, sY, 0.5))
    assert d > 1e-6


def test_commuting_mixtures_still_differ_but_are_diagonal(base2):
    X, Y = np.diag([0.2, 0.0]), np.diag([-0.2, 0.0])
    sX, sY = gibbs_state(base2, X), gibbs_state(base2, Y)
    e = exp_mixture(base2, X, Y, 0.5).rho.matrix
    m = mix_mixture(sX, sY, 0.5).matrix
    assert e[0, 1] == 0.0 and m[0, 1] == 0.0
    # exponential mixture at 1/2 is the unperturbed state; linear mixture is not
    np.testing.assert_allclose(e, base2.state.rho.matrix, atol=1e-15)
    assert trace_distance(e, m) > 1e-4


@pytest.mark.parametrize("seed", range(8))
def test_affine_chart_linearity(seed):
    base, X = random_instance(seed, 6, size=0.3)
    _, Y = random_instance(seed + 50, 6, size=0.3)
    from qig.perturbation import norm_zero
    Y = Y.matrix * (0.3 / norm_zero(base, Y))
    xh, yh = center(base, X).Xhat.matrix, center(base, Y).Xhat.matrix
    for lam in (0.0, 0.3, 0.5, 1.0):
        got = chart(base, exp_mixture(base, X, Y, lam)).Xhat.matrix
        assert np.max(np.abs(got - (lam * xh + (1 - lam) * yh))) <= 1e-9


def test_transport_identity_when_same_base():
    base, X = random_instance(0, 5)
    v = tangent(base, X)
    w = parallel_transport(v, base, base, [base])
    np.testing.assert_allclose(w.score.Xhat.matrix, v.score.Xhat.matrix, atol=1e-15)


def test_transport_is_path_independent_bitwise():
    base, X = random_instance(1, 6, size=0.2)
    _, Z = random_instance(2, 6)
    target = shifted_base(base, X)
    mids = [shifted_base(base, t * X.matrix) for t in (0.2, 0.5, 0.8)]
    v = tangent(base, Z)
    a = parallel_transport(v, base, target, [base, target])
    b = parallel_transport(v, base, target, [base] + mids + [target])
    c = parallel_transport(v, base, target, [base] + mids[::-1] + [target])
    assert np.array_equal(a.score.Xhat.matrix, b.score.Xhat.matrix)
    assert np.array_equal(a.score.Xhat.matrix, c.score.Xhat.matrix)


def test_transport_endpoint_mismatch():
    base, X = random_instance(1, 4, size=0.2)
    target = shifted_base(base, X)
    v = tangent(base, X)
    with pytest.raises(ValueError):
        parallel_transport(v, base, target, [target, base])


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20)
def test_transport_roundtrip_and_score_property(seed):
    base, X = random_instance(seed, 5, size=0.3)
    _, Z = random_instance(seed + 1, 5)
    target = shifted_base(base, X)
    v = tangent(base, Z)
    w = parallel_transport(v, base, target)
    assert abs(regularized_mean(target.state, w.score.Xhat, 0.5)) <= 1e-9
    back = parallel_transport(w, target, base)
    assert np.max(np.abs(back.score.Xhat.matrix - v.score.Xhat.matrix)) <= 1e-12


def test_probe_equal_states_in_hood(base2):
    s = gibbs_state(base2, WIT_X)
    rep = mixture_membership_probe(base2, s, s, 0.5)
    assert rep.in_hood and not rep.singular
    assert rep.norms["zero"] <= 0.3 * 2 ** -0.5 + 1e-9


def test_probe_commuting_closed_form(base2):
    X, Y = np.diag([0.2, 0.0]), np.diag([-0.2, 0.0])
    sX, sY = gibbs_state(base2, X), gibbs_state(base2, Y)
    rep = mixture_membership_probe(base2, sX, sY, 0.5)
    # sigma = diag(p, 1-p); K - H0 = diag(-log p - 1, -log(1-p) - 2) up to shift
    p = 0.5 * (sX.rho.matrix[0, 0] + sY.rho.matrix[0, 0])
    d = np.array([-math.log(p) - 1.0, -math.log(1 - p) - 2.0])
    # best zero-norm over the line d + alpha: balance (d0 + a) = -(d1 + a)/2
    a = -(2 * d[0] + d[1]) / 3
    assert rep.norms["zero"] == pytest.approx(abs(d[0] + a), abs=1e-12)
    assert rep.in_hood == (rep.norms["zero"] < base2.radius)


def test_probe_singular_is_reported():
    base = BasePoint(np.diag([1.0, 900.0]), 0.5)
    s = base.state
    rep = mixture_membership_probe(base, s, s, 0.5)
    assert rep.singular and not rep.in_hood

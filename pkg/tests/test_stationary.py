import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special, stats

from affine2f.errors import ParameterError
from affine2f.model import State, validate_params
from affine2f.stationary import (
    GammaLaw,
    bessel_i,
    build_moment_ode,
    cir_transition_density,
    initial_moments,
    log_bessel_i,
    moment_index,
    moment_table,
    stationary_moment,
    transient_moments,
    y_stationary_law,
)


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.3, 1.0, 4.5, 20.0])
@pytest.mark.parametrize("x", [1e-3, 0.5, 3.0, 40.0, 300.0, 699.0, 701.0, 5000.0])
def test_log_bessel_matches_scipy(nu, x):
    want = math.log(special.ive(nu, x)) + x
    assert log_bessel_i(nu, x) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_bessel_small_values():
    assert bessel_i(0.0, 1.0) == pytest.approx(special.iv(0.0, 1.0), rel=1e-14)


def fixed_horizon_density(y, y0, a, b):
    # t = 1 transition density written directly in terms of a, b
    pref = 2 * b * math.exp(b * (2 * a + 1) / 2) / math.expm1(b)
    arg = 2 * b * math.sqrt(y0 * y) / math.sinh(b / 2)
    log_rest = (a - 0.5) * math.log(y / y0) - 2 * b * (y0 + math.exp(b) * y) / math.expm1(b)
    return pref * math.exp(log_rest + arg) * special.ive(2 * a - 1, arg)


@pytest.mark.parametrize("a,b,y0", [(1, 1, 1), (0.3, 2, 0.5), (2.5, 0.4, 3.0)])
def test_density_at_unit_time_closed_form(a, b, y0):
    p = validate_params(a, b, 0, 1, 2)
    for y in [0.05, 0.4, 1.0, 2.2, 6.0]:
        assert cir_transition_density(y, y0, 1.0, p) == pytest.approx(fixed_horizon_density(y, y0, a, b), rel=1e-10)


@pytest.mark.parametrize("t", [0.1, 1.0, 4.0])
def test_density_matches_noncentral_chi_square(t):
    p = validate_params(0.8, 1.3, 0, 1, 2)
    scale = -math.expm1(-p.b * t) / (4 * p.b)
    nc = 4 * p.b * math.exp(-p.b * t) / -math.expm1(-p.b * t) * 1.7
    ys = np.linspace(0.02, 5, 40)
    want = stats.ncx2(4 * p.a, nc, scale=scale).pdf(ys)
    np.testing.assert_allclose(cir_transition_density(ys, 1.7, t, p), want, rtol=1e-8)


@pytest.mark.parametrize("y0", [0.0, 0.8, 5.0])
def test_density_integrates_to_one(y0):
    p = validate_params(1.2, 0.9, 0, 1, 2)
    total, _ = integrate.quad(lambda y: cir_transition_density(y, y0, 0.7, p), 0, np.inf, limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_density_from_zero_is_gamma():
    p = validate_params(1.5, 2.0, 0, 1, 2)
    t = 1.0
    rate = 2 * p.b / -math.expm1(-p.b * t)
    ys = np.linspace(0.01, 4, 30)
    want = stats.gamma(2 * p.a, scale=1 / rate).pdf(ys)
    np.testing.assert_allclose(cir_transition_density(ys, 0.0, t, p), want, rtol=1e-10)


def test_density_domain(cir_params):
    with pytest.raises(ParameterError):
        cir_transition_density(-1.0, 1.0, 1.0, cir_params)
    with pytest.raises(ParameterError):
        cir_transition_density(1.0, 1.0, 0.0, cir_params)
    with pytest.raises(ParameterError):
        cir_transition_density(1.0, 1.0, 1.0, validate_params(1, 1, 0, 1, 1.5))


def test_gamma_law():
    law = y_stationary_law(validate_params(1.5, 2.0, 0, 1, 2))
    assert (law.shape, law.rate) == (3.0, 4.0)
    assert law.moment(3) == pytest.approx(stats.gamma(3.0, scale=0.25).moment(3))
    assert law.laplace(1.0) == pytest.approx((1 + 1 / 4) ** -3)


@settings(deadline=None, max_examples=40)
@given(a=st.floats(0.05, 5), b=st.floats(0.05, 5), m=st.floats(-3, 3), theta=st.floats(0.05, 5))
def test_moment_recursion_invariants(a, b, m, theta):
    p = validate_params(a, b, m, theta, 2)
    law = GammaLaw(2 * a, 2 * b)
    for n in range(5):
        assert stationary_moment(n, 0, p) == pytest.approx(law.moment(n), rel=1e-12)
    assert stationary_moment(0, 1, p) == pytest.approx(m / theta, rel=1e-12, abs=1e-15)
    # E X^2 = (m/theta)^2 + E Y / (2 theta)
    assert stationary_moment(0, 2, p) == pytest.approx((m / theta) ** 2 + a / b / (2 * theta), rel=1e-12)
    # stationary vector is in the kernel of the moment system
    sys_ = build_moment_ode(4, p)
    f = np.array([stationary_moment(n, q, p) for n, q in sys_.index])
    assert np.max(np.abs(sys_.matrix @ f)) <= 1e-9 * max(1.0, np.max(np.abs(f)))


def test_moment_table_example():
    tab = moment_table(3, validate_params(1, 1, 0, 1, 2))
    assert tab[(1, 0)] == 1.0 and tab[(0, 1)] == 0.0 and tab[(2, 0)] == 1.5
    assert len(tab.entries) == 10
    assert [(e["n"], e["p"]) for e in tab.to_json_dict()["entries"]][:3] == [(0, 0), (1, 0), (0, 1)]


def test_moment_index_order():
    assert moment_index(2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_transient_first_moments():
    p = validate_params(1.2, 0.8, 0.5, 1.5, 2)
    y0, x0, t = 3.0, -1.0, 0.9
    tab = transient_moments(t, initial_moments(State(y0, x0), 2, p), 2, p)
    ey = p.a / p.b + (y0 - p.a / p.b) * math.exp(-p.b * t)
    ex = p.m / p.theta + (x0 - p.m / p.theta) * math.exp(-p.theta * t)
    assert tab[(1, 0)] == pytest.approx(ey, rel=1e-12)
    assert tab[(0, 1)] == pytest.approx(ex, rel=1e-12)
    assert tab.t == t


def test_transient_limits():
    p = validate_params(1, 1, 0.3, 0.7, 2)
    init = initial_moments((2.0, 1.0), 3, p)
    assert transient_moments(0.0, init, 3, p).entries == pytest.approx(init)
    far = transient_moments(80.0, init, 3, p)
    for (n, q), v in far.entries.items():
        assert v == pytest.approx(stationary_moment(n, q, p), rel=1e-9, abs=1e-12)


def test_stationary_initial_moments_are_invariant_for_y():
    p = validate_params(1, 2, 0.0, 1, 2)
    init = initial_moments("stationary", 2, p)
    later = transient_moments(1.3, init, 2, p)
    assert later[(2, 0)] == pytest.approx(init[(2, 0)], rel=1e-12)


def test_moment_errors():
    with pytest.raises(ParameterError):
        stationary_moment(1, 0, validate_params(1, -1, 0, 1, 2))
    with pytest.raises(ParameterError):
        transient_moments(-1.0, {}, 1, validate_params(1, 1, 0, 1, 2))
    with pytest.raises(ParameterError):
        transient_moments(1.0, {(0, 0): 1.0}, 1, validate_params(1, 1, 0, 1, 2))


import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from affine2f import ode, riccati
from affine2f.errors import ParameterError, SolverError
from affine2f.model import State, validate_params
from affine2f.stationary import stationary_moment


def test_integrator_hits_output_times_exactly():
    t_out = np.array([0.0, 0.3, 1.7, 4.0])
    states = ode.integrate(lambda t, y: [-y[0]], [1.0], t_out, 1e-12, 1e-10)
    got = np.array([s[0] for s in states])
    np.testing.assert_allclose(got, np.exp(-t_out), rtol=1e-9)


def test_integrator_reports_blow_up():
    with pytest.raises(SolverError):
        ode.integrate(lambda t, y: [y[0] * y[0]], [1.0], [0.0, 2.0], 1e-10, 1e-8)


@settings(deadline=None, max_examples=25)
@given(l1=st.floats(0.01, 5), b=st.floats(0.05, 3), t=st.floats(0.01, 10))
def test_closed_form_agreement_default_tolerances(l1, b, t):
    p = validate_params(1.0, b, 0.0, 1.0, 2.0)
    got = riccati.solve_v((l1, 0.0), t, p).at_end()
    assert got == pytest.approx(riccati.v_closed_form(l1, t, p), abs=1e-8)


@settings(deadline=None, max_examples=25)
@given(l1=st.floats(0.01, 20), b=st.floats(0.05, 3), t=st.floats(0.01, 8))
def test_closed_form_agreement_tight_tolerances(l1, b, t):
    # large initial values are governed by rtol; tightening it must converge
    p = validate_params(1.0, b, 0.0, 1.0, 2.0)
    got = riccati.solve_v((l1, 0.0), t, p, tol=1e-12, rtol=1e-11).at_end()
    assert got == pytest.approx(riccati.v_closed_form(l1, t, p), abs=1e-10)


def test_transform_exponent_against_quadrature_of_closed_form():
    p = validate_params(1.5, 0.8, 0.0, 1.0, 2.0)
    l1, t, y0 = 0.7, 2.5, 1.3
    int_v, _ = integrate.quad(lambda s: riccati.v_closed_form(l1, s, p), 0, t, epsabs=1e-13)
    want = -y0 * riccati.v_closed_form(l1, t, p) - p.a * int_v
    got = riccati.transform_exponent((l1, 0.0), t, State(y0, 0.0), p)
    assert got.imag == 0.0
    assert got.real == pytest.approx(want, abs=1e-8)


def test_gaussian_part_when_y_is_frozen_at_zero_mean():
    # lambda1 = 0 at t = 0 is the identity transform
    p = validate_params(1, 1, 0.3, 2, 2)
    z = riccati.transform_exponent((0.0, 1.2), 0.0, State(0.5, -1.0), p)
    assert z == pytest.approx(complex(0, -1.2))


@pytest.mark.parametrize("a,b,theta", [(1, 1, 1), (0.5, 2, 0.7)])
def test_stationary_transform_derivatives_give_moments(a, b, theta):
    p = validate_params(a, b, 0.4, theta, 2.0)
    h = 1e-3
    f = lambda l1, l2: np.exp(riccati.stationary_exponent((l1, l2), p, tol=1e-12, rtol=1e-11))
    d_l1 = (f(h, 0) - f(0, 0)) / h  # -E Y + O(h)
    assert -d_l1.real == pytest.approx(stationary_moment(1, 0, p), rel=2 * h * b + 1e-4)
    d2 = (f(0, h) - 2 * f(0, 0) + f(0, -h)) / h**2  # -E X^2
    assert -d2.real == pytest.approx(stationary_moment(0, 2, p), rel=1e-4)
    d1 = (f(0, h) - f(0, -h)) / (2 * h)  # i E X
    assert d1.imag == pytest.approx(stationary_moment(0, 1, p), rel=1e-5)


@pytest.mark.parametrize("alpha", [1.3, 1.7, 2.0])
def test_transient_transform_converges_to_stationary(alpha):
    p = validate_params(1.0, 1.0, 0.5, 1.0, alpha)
    lam = (0.8, 0.6)
    stat = riccati.stationary_exponent(lam, p)
    far = riccati.transform_exponent(lam, 40.0, State(2.0, 1.0), p)
    assert abs(far - stat) < 1e-8


@pytest.mark.parametrize("b,theta", [(1.0, 1.0), (2.0, 1.0), (0.5, 2.0)])
@pytest.mark.parametrize("alpha", [1.5, 2.0])
def test_comparison_bound_dominates(alpha, b, theta):
    p = validate_params(1.0, b, 0.0, theta, alpha)
    times = np.linspace(0, 6, 61)
    for lam in [(0.5, 0.0), (1.0, 1.0), (3.0, -2.0), (0.0, 2.0)]:
        v = riccati.solve_v(lam, 6.0, p, times=times).values
        u = riccati.comparison_bound(lam, times, p)
        assert np.all(v <= u + 1e-8)
        assert np.all(u <= riccati.comparison_envelope(lam, times, p) + 1e-12)


def test_truncation_time_monotone_in_tol():
    p = validate_params(1, 1, 0, 1, 1.5)
    ts = [riccati.truncation_time((1.0, 1.0), p, tol) for tol in (1e-4, 1e-8, 1e-12)]
    assert ts[0] < ts[1] < ts[2]


@pytest.mark.parametrize("alpha", [1.2, 1.5, 2.0])
def test_flow_property(alpha):
    p = validate_params(1, 0.7, 0, 0.4, alpha)
    assert riccati.flow_residual((2.0, -1.0), 0.8, 1.9, p) < 1e-7


def test_zero_lambda_is_trivial(cir_params):
    assert riccati.stationary_exponent((0.0, 0.0), cir_params) == 0j
    curve = riccati.solve_v((0.0, 0.0), 3.0, cir_params)
    assert curve.at_end() == 0.0


def test_bad_inputs(cir_params):
    with pytest.raises(ParameterError):
        riccati.solve_v((1.0, 0.0), -1.0, cir_params)
    with pytest.raises(ParameterError):
        riccati.solve_v((1.0, 0.0), 1.0, cir_params, times=[0.0, 0.5])
    with pytest.raises(ParameterError):
        riccati.stationary_exponent((1.0, 0.0), validate_params(1, -1, 0, 1, 2))

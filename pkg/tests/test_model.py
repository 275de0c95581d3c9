import math

import pytest
from hypothesis import given, strategies as st
from scipy import special

from affine2f.errors import ParameterError
from affine2f.model import LambdaPair, ModelParams, State, c_alpha, func_F, func_R, validate_params


def test_defaults_and_roundtrip():
    p = validate_params(1, 2, 0.5, 3, 2)
    assert p.as_dict() == {"a": 1.0, "b": 2.0, "m": 0.5, "theta": 3.0, "alpha": 2.0}
    assert validate_params(p) is p
    assert p.stationary and p.is_diffusion


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(a=0, b=1, m=0, theta=1, alpha=2),
        dict(a=-1, b=1, m=0, theta=1, alpha=2),
        dict(a=1, b=1, m=0, theta=1, alpha=1.0),
        dict(a=1, b=1, m=0, theta=1, alpha=2.1),
        dict(a=1, b=float("nan"), m=0, theta=1, alpha=2),
        dict(a=1, b=1, m=float("inf"), theta=1, alpha=2),
    ],
)
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ParameterError):
        validate_params(**kwargs)


def test_nonstationary_flag():
    assert not validate_params(1, -1, 0, 1, 1.5).stationary
    p = validate_params(1, -0.5, 0, 1, 2)
    assert not p.stationary
    with pytest.raises(ParameterError):
        p.require_stationary("x")
    with pytest.raises(ParameterError):
        validate_params(1, 1, 0, 1, 1.5).require_diffusion("x")


def test_state_and_lambda_domains():
    with pytest.raises(ParameterError):
        State(-0.1, 0)
    with pytest.raises(ParameterError):
        LambdaPair(-1, 0)
    assert State(0, -3).x == -3


@given(st.floats(1.01, 1.99))
def test_c_alpha_matches_levy_normalisation(alpha):
    assert math.isclose(c_alpha(alpha), 1 / (alpha * special.gamma(-alpha)), rel_tol=1e-12)
    # equivalent form that makes int (e^{-uz} - 1 + uz) C z^{-1-alpha} dz = u^alpha / alpha
    assert math.isclose(c_alpha(alpha), (alpha - 1) / special.gamma(2 - alpha), rel_tol=1e-12)


def test_affine_functions():
    p = validate_params(2, 3, 0.5, 1, 2)
    assert func_F(1.0, 2.0, p) == pytest.approx(2 * 1 + 0.5 * 2)
    # R(u) = -b u1 + (-u1)^2/2 + u2^2/2 at alpha = 2
    assert func_R(-1.0, 2.0, p) == pytest.approx(3 + 0.5 + 2)
    assert ModelParams(1, 1, 0, 1, 2) == p.__class__(1.0, 1.0, 0.0, 1.0, 2.0)

"""Generalized Riccati equation and Fourier-Laplace transform exponents.

For lambda1 >= 0 and real lambda2 the conditional transform is

    E[exp(-lambda1 Y_t + i lambda2 X_t) | Y_0 = y0, X_0 = x0]
        = exp(-y0 v_t + i x0 exp(-theta t) lambda2 + g_t)

where v solves

    dv/dt = -b v - v^alpha / alpha + exp(-2 theta t) lambda2^2 / 2,   v_0 = lambda1

and g_t = -a int_0^t v_s ds + i m lambda2 (1 - exp(-theta t)) / theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import ode
from .errors import ParameterError
from .model import LambdaPair, ModelParams, State

__all__ = [
    "DEFAULT_ATOL",
    "DEFAULT_RTOL",
    "RiccatiCurve",
    "solve_v",
    "v_closed_form",
    "comparison_bound",
    "comparison_envelope",
    "envelope_constant",
    "transform_exponent",
    "stationary_exponent",
    "truncation_time",
    "flow_residual",
]

DEFAULT_ATOL = 1e-10
DEFAULT_RTOL = 1e-8


@dataclass(frozen=True)
class RiccatiCurve:
    """Solution of the Riccati equation on an output grid.

    ``integral[k]`` holds int_0^{times[k]} v_s ds, integrated together with v.
    """

    lam: LambdaPair
    times: np.ndarray
    values: np.ndarray
    integral: np.ndarray
    tol: float
    rtol: float
    params: ModelParams

    def at_end(self) -> float:
        return float(self.values[-1])


def _as_lambda(lam) -> LambdaPair:
    if isinstance(lam, LambdaPair):
        return lam
    return LambdaPair(*lam)


def _rhs_factory(lam: LambdaPair, params: ModelParams):
    b, alpha, theta = params.b, params.alpha, params.theta
    half_l2sq = 0.5 * lam.lambda2 ** 2
    inv_alpha = 1.0 / alpha

    if alpha == 2.0:
        def rhs(t, y):
            v = y[0] if y[0] > 0.0 else 0.0
            dv = -b * y[0] - 0.5 * v * v + half_l2sq * math.exp(-2.0 * theta * t)
            return [dv, y[0]]
    else:
        def rhs(t, y):
            v = y[0]
            power = math.exp(alpha * math.log(v)) if v > 0.0 else 0.0
            dv = -b * v - inv_alpha * power + half_l2sq * math.exp(-2.0 * theta * t)
            return [dv, v]
    return rhs


def _clamp(y):
    if y[0] < 0.0:
        y[0] = 0.0
    return y


def solve_v(
    lam,
    t_end: float,
    params: ModelParams,
    tol: float = DEFAULT_ATOL,
    rtol: float = DEFAULT_RTOL,
    times: Optional[Sequence[float]] = None,
) -> RiccatiCurve:
    """Solve the Riccati equation from v_0 = lambda1 up to ``t_end``.

    Args:
        lam: a LambdaPair or a (lambda1, lambda2) tuple.
        t_end: final time, >= 0.
        params: validated model parameters.
        tol: absolute local error tolerance.
        rtol: relative local error tolerance.
        times: optional output grid; must start at 0 and end at ``t_end``.
            Defaults to ``[0, t_end]``.

    Raises:
        SolverError: if the adaptive integrator fails.
    """
    lam = _as_lambda(lam)
    if not (t_end >= 0 and math.isfinite(t_end)):
        raise ParameterError("t_end must be a finite nonnegative time")
    if tol <= 0 or rtol < 0:
        raise ParameterError("tolerances must be positive")
    if times is None:
        grid = np.array([0.0, float(t_end)]) if t_end > 0 else np.array([0.0])
    else:
        grid = np.asarray(times, dtype=float)
        if grid[0] != 0.0 or grid[-1] != t_end or np.any(np.diff(grid) <= 0):
            raise ParameterError("times must be strictly increasing from 0 to t_end")

    if lam.lambda1 == 0.0 and lam.lambda2 == 0.0:
        zeros = np.zeros_like(grid)
        return RiccatiCurve(lam, grid, zeros, zeros.copy(), tol, rtol, params)

    states = ode.integrate(
        _rhs_factory(lam, params), [lam.lambda1, 0.0], grid, tol, rtol, project=_clamp
    )
    values = np.array([s[0] for s in states])
    integral = np.array([s[1] for s in states])
    values[0] = lam.lambda1
    return RiccatiCurve(lam, grid, values, integral, tol, rtol, params)


def v_closed_form(lambda1: float, t, params: ModelParams):
    """Bernoulli closed form of v_t(lambda1, 0) for alpha = 2.

    v_t = ((1/lambda1 + 1/(2b)) e^{bt} - 1/(2b))^{-1}; the b = 0 limit is
    (1/lambda1 + t/2)^{-1}.
    """
    params.require_diffusion("v_closed_form")
    if lambda1 < 0:
        raise ParameterError("lambda1 must be nonnegative")
    t = np.asarray(t, dtype=float)
    if lambda1 == 0:
        out = np.zeros_like(t)
    else:
        b = params.b
        if b == 0:
            out = 1.0 / (1.0 / lambda1 + 0.5 * t)
        else:
            # (1/l + 1/2b) e^{bt} - 1/2b = e^{bt}/l + expm1(bt)/(2b)
            out = 1.0 / (np.exp(b * t) / lambda1 + np.expm1(b * t) / (2.0 * b))
    return float(out) if out.ndim == 0 else out


def comparison_bound(lam, t, params: ModelParams):
    """Solution u_t of the linear comparison equation, an upper bound for v_t.

    u solves du/dt = -b u + exp(-2 theta t) lambda2^2 / 2, u_0 = lambda1.
    """
    params.require_stationary("comparison_bound")
    lam = _as_lambda(lam)
    b, theta = params.b, params.theta
    l1, l2sq = lam.lambda1, lam.lambda2 ** 2
    t = np.asarray(t, dtype=float)
    if b == 2.0 * theta:
        out = (l1 + 0.5 * l2sq * t) * np.exp(-b * t)
    else:
        k = l2sq / (2.0 * (2.0 * theta - b))
        # (l1 + k) e^{-bt} - k e^{-2 theta t}, written to avoid cancellation
        out = l1 * np.exp(-b * t) + k * np.exp(-b * t) * -np.expm1((b - 2.0 * theta) * t)
    return float(out) if out.ndim == 0 else out


def envelope_constant(lam, params: ModelParams) -> float:
    lam = _as_lambda(lam)
    b, theta = params.b, params.theta
    if b == 2.0 * theta:
        return lam.lambda1 + lam.lambda2 ** 2 / 2.0
    return lam.lambda1 + lam.lambda2 ** 2 / (2.0 * abs(b - 2.0 * theta))


def comparison_envelope(lam, t, params: ModelParams):
    """Coarse bound M(lambda) (1 + t) max(exp(-2 theta t), exp(-b t))."""
    params.require_stationary("comparison_envelope")
    rate = min(params.b, 2.0 * params.theta)
    t = np.asarray(t, dtype=float)
    out = envelope_constant(lam, params) * (1.0 + t) * np.exp(-rate * t)
    return float(out) if out.ndim == 0 else out


def _tail_bound(T: float, M: float, a: float, rate: float) -> float:
    # a M int_T^inf (1+s) e^{-rate s} ds
    return a * M * math.exp(-rate * T) * ((1.0 + T) / rate + 1.0 / rate ** 2)


def truncation_time(lam, params: ModelParams, tol: float) -> float:
    """Smallest T (to bisection accuracy) whose analytic tail bound is <= tol."""
    params.require_stationary("truncation_time")
    M = envelope_constant(lam, params)
    rate = min(params.b, 2.0 * params.theta)
    a = params.a
    if M == 0.0 or _tail_bound(0.0, M, a, rate) <= tol:
        return 0.0
    hi = 1.0
    while _tail_bound(hi, M, a, rate) > tol:
        hi *= 2.0
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _tail_bound(mid, M, a, rate) > tol:
            lo = mid
        else:
            hi = mid
    return hi


def _drift_phase(t: float, params: ModelParams) -> float:
    # int_0^t exp(-theta s) ds
    theta = params.theta
    if theta == 0.0:
        return t
    return -math.expm1(-theta * t) / theta


def transform_exponent(
    lam,
    t: float,
    state: State,
    params: ModelParams,
    tol: float = DEFAULT_ATOL,
    rtol: float = DEFAULT_RTOL,
) -> complex:
    """Log of E[exp(-lambda1 Y_t + i lambda2 X_t) | (Y_0, X_0) = state]."""
    lam = _as_lambda(lam)
    if not isinstance(state, State):
        state = State(*state)
    curve = solve_v(lam, t, params, tol=tol, rtol=rtol)
    v_t = float(curve.values[-1])
    int_v = float(curve.integral[-1])
    l2 = lam.lambda2
    g_t = complex(-params.a * int_v, params.m * l2 * _drift_phase(t, params))
    return complex(-state.y * v_t, state.x * math.exp(-params.theta * t) * l2) + g_t


def stationary_exponent(
    lam,
    params: ModelParams,
    tol: float = DEFAULT_ATOL,
    rtol: float = DEFAULT_RTOL,
) -> complex:
    """Log of the stationary transform E[exp(-lambda1 Y_inf + i lambda2 X_inf)].

    The improper integral of v is truncated at the time where the analytic
    tail bound drops below ``tol``.
    """
    params.require_stationary("stationary_exponent")
    lam = _as_lambda(lam)
    if lam.lambda1 == 0.0 and lam.lambda2 == 0.0:
        return 0j
    T = truncation_time(lam, params, tol)
    curve = solve_v(lam, T, params, tol=tol, rtol=rtol)
    return complex(-params.a * float(curve.integral[-1]), params.m / params.theta * lam.lambda2)


def flow_residual(
    lam,
    s: float,
    t: float,
    params: ModelParams,
    tol: float = DEFAULT_ATOL,
    rtol: float = DEFAULT_RTOL,
) -> float:
    """|v_t(v_s(lambda), e^{-theta s} lambda2) - v_{s+t}(lambda)|."""
    lam = _as_lambda(lam)
    if s < 0 or t < 0:
        raise ParameterError("s and t must be nonnegative")
    if s == 0 or t == 0:
        return 0.0
    v_s = solve_v(lam, s, params, tol=tol, rtol=rtol).at_end()
    shifted = LambdaPair(v_s, math.exp(-params.theta * s) * lam.lambda2)
    lhs = solve_v(shifted, t, params, tol=tol, rtol=rtol).at_end()
    rhs = solve_v(lam, s + t, params, tol=tol, rtol=rtol).at_end()
    return abs(lhs - rhs)

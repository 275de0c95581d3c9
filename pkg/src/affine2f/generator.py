"""Infinitesimal generator of (Y, X) and the Foster-Lyapunov drift check."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import integrate

from .errors import ParameterError, QuadratureError
from .model import ModelParams, State, c_alpha

__all__ = [
    "TestFunction",
    "DriftReport",
    "monomial",
    "exp_y",
    "apply_generator",
    "apply_generator_diffusion",
    "apply_generator_jump",
    "jump_integral",
    "lyapunov_V",
    "lyapunov_d",
    "lyapunov_drift_check",
]

Fn = Callable[[float, float], float]


def _zero(y, x):
    return 0.0


@dataclass(frozen=True)
class TestFunction:
    """A C^2 function of (y, x) together with its analytic partials.

    ``dy_bound`` is an optional bound on sup |d_y| over R_+ x R. When given,
    the jump integral is cut off at the point where the analytic tail bound
    falls below the quadrature tolerance.
    """

    __test__ = False  # not a pytest class

    value: Fn
    d_y: Fn = _zero
    d_x: Fn = _zero
    d_yy: Fn = _zero
    d_xx: Fn = _zero
    dy_bound: Optional[float] = None
    name: str = "f"


def monomial(n: int, p: int) -> TestFunction:
    """f(y, x) = y^n x^p with exact partial derivatives."""
    if n < 0 or p < 0:
        raise ParameterError("exponents must be nonnegative")

    def pw(z, k):
        return z ** k if k > 0 else 1.0

    return TestFunction(
        value=lambda y, x: pw(y, n) * pw(x, p),
        d_y=lambda y, x: n * pw(y, n - 1) * pw(x, p) if n else 0.0,
        d_x=lambda y, x: p * pw(y, n) * pw(x, p - 1) if p else 0.0,
        d_yy=lambda y, x: n * (n - 1) * pw(y, n - 2) * pw(x, p) if n > 1 else 0.0,
        d_xx=lambda y, x: p * (p - 1) * pw(y, n) * pw(x, p - 2) if p > 1 else 0.0,
        name=f"y^{n} x^{p}",
    )


def exp_y(lam: float) -> TestFunction:
    """f(y, x) = exp(-lam * y), lam >= 0."""
    if lam < 0:
        raise ParameterError("lam must be nonnegative")
    return TestFunction(
        value=lambda y, x: math.exp(-lam * y),
        d_y=lambda y, x: -lam * math.exp(-lam * y),
        d_yy=lambda y, x: lam * lam * math.exp(-lam * y),
        dy_bound=lam,
        name=f"exp(-{lam} y)",
    )


def _state(s) -> State:
    return s if isinstance(s, State) else State(*s)


def _drift_part(f: TestFunction, y: float, x: float, params: ModelParams) -> float:
    return (params.a - params.b * y) * f.d_y(y, x) + (params.m - params.theta * x) * f.d_x(y, x)


def apply_generator_diffusion(f: TestFunction, s, params: ModelParams) -> float:
    """(Af)(y,x) = (a-by) f_y + (m-theta x) f_x + y (f_yy + f_xx) / 2, alpha = 2."""
    params.require_diffusion("apply_generator_diffusion")
    s = _state(s)
    y, x = s.y, s.x
    return _drift_part(f, y, x, params) + 0.5 * y * (f.d_yy(y, x) + f.d_xx(y, x))


LOG_Z_MAX = 700.0  # exp overflows beyond this


def jump_integral(f: TestFunction, y: float, x: float, alpha: float, quad_tol: float = 1e-11):
    """int_0^inf (f(y+z,x) - f(y,x) - z f_y(y,x)) C z^{-1-alpha} dz.

    On (0, 1) the integrand is rewritten through the integral Taylor
    remainder and the order of integration swapped, which leaves
    int_0^1 f_yy(y+s, x) K(s) ds with the explicit kernel

        K(s) = C [ s^{1-alpha} / (alpha (alpha-1)) + s / alpha - 1 / (alpha-1) ].

    The singular part is handled with an algebraic quadrature weight. On
    (1, inf) the compensator term is integrated exactly and f(y+z) - f(y)
    numerically in log(z), up to a cutoff chosen from the tail bound
    sup|f_y| C Z^{1-alpha} / (alpha-1) when ``f.dy_bound`` is known,
    otherwise to infinity.

    Returns:
        (value, error_estimate)
    """
    C = c_alpha(alpha)
    fyy = lambda s: f.d_yy(y + s, x)
    sing, e1 = integrate.quad(
        fyy, 0.0, 1.0, weight="alg", wvar=(1.0 - alpha, 0.0),
        epsabs=quad_tol / 8, epsrel=0.0, limit=200,
    )
    smooth, e2 = integrate.quad(
        lambda s: fyy(s) * (s / alpha - 1.0 / (alpha - 1.0)), 0.0, 1.0,
        epsabs=quad_tol / 8, epsrel=0.0, limit=200,
    )
    near = C * (sing / (alpha * (alpha - 1.0)) + smooth)

    f0 = f.value(y, x)
    fy0 = f.d_y(y, x)

    # on (1, inf) the compensator -z f_y integrates in closed form to
    # -f_y C / (alpha-1); the rest is integrated in u = log z
    def far_integrand(u):
        if u > LOG_Z_MAX:
            return 0.0
        return (f.value(y + math.exp(u), x) - f0) * math.exp(-alpha * u)

    tail_bound = 0.0
    upper = math.inf
    if f.dy_bound is not None:
        if f.dy_bound == 0:
            upper = 0.0
        else:
            # |f(y+z) - f(y)| <= sup|f_y| z, so the tail beyond Z is at most
            # sup|f_y| C Z^{1-alpha} / (alpha-1); put that at quad_tol / 4
            target = quad_tol / 4
            log_z = math.log(f.dy_bound * C / ((alpha - 1.0) * target)) / (alpha - 1.0)
            upper = min(max(log_z, 0.0), LOG_Z_MAX)
            tail_bound = f.dy_bound * C * math.exp((1.0 - alpha) * upper) / (alpha - 1.0)
    far, e3 = (0.0, 0.0) if upper == 0.0 else integrate.quad(
        far_integrand, 0.0, upper, epsabs=quad_tol / (8 * C), epsrel=0.0, limit=500
    )
    far -= fy0 / (alpha - 1.0)
    value = near + C * far
    err = C * (e1 / (alpha * (alpha - 1.0)) + e2 + e3) + tail_bound
    if not math.isfinite(value) or err > quad_tol:
        raise QuadratureError(
            f"jump integral did not converge: estimate {value!r}, error {err:.3g} > {quad_tol:.3g}"
        )
    return value, err


def apply_generator_jump(f: TestFunction, s, params: ModelParams, quad_tol: float = 1e-10) -> float:
    """Generator for alpha in (1, 2): drift, y f_xx / 2 and y times the jump integral."""
    if not 1.0 < params.alpha < 2.0:
        raise ParameterError("apply_generator_jump requires alpha in (1, 2)")
    s = _state(s)
    y, x = s.y, s.x
    out = _drift_part(f, y, x, params) + 0.5 * y * f.d_xx(y, x)
    if y > 0:
        # y multiplies the integral, so scale the tolerance accordingly
        jump, _ = jump_integral(f, y, x, params.alpha, quad_tol=quad_tol / y)
        out += y * jump
    return out


def apply_generator(f: TestFunction, s, params: ModelParams, quad_tol: float = 1e-10) -> float:
    if params.is_diffusion:
        return apply_generator_diffusion(f, s, params)
    return apply_generator_jump(f, s, params, quad_tol=quad_tol)


@dataclass(frozen=True)
class DriftReport:
    c1: float
    c2: float
    c: float
    d: float
    max_violation: float
    argmax: tuple

    @property
    def satisfied(self) -> bool:
        return self.max_violation <= 1e-12


def lyapunov_V(c1: float, c2: float) -> TestFunction:
    """V(y, x) = (y - c1)^2 + (x - c2)^2."""
    return TestFunction(
        value=lambda y, x: (y - c1) ** 2 + (x - c2) ** 2,
        d_y=lambda y, x: 2.0 * (y - c1),
        d_x=lambda y, x: 2.0 * (x - c2),
        d_yy=lambda y, x: 2.0,
        d_xx=lambda y, x: 2.0,
        name="V",
    )


def lyapunov_d(c1: float, c: float, params: ModelParams) -> float:
    """Offset d in AV <= -cV + d from completing the square in y."""
    a, b = params.a, params.b
    k = 1.0 + a + b * c1 - c * c1
    return -k * k / (c - 2.0 * b) + c * c1 * c1 - 2.0 * a * c1


def lyapunov_drift_check(c1: float, c: float, grid: Iterable, params: ModelParams) -> DriftReport:
    """Evaluate max over ``grid`` of (AV)(y,x) + c V(y,x) - d, with c2 = m / theta."""
    params.require_diffusion("lyapunov_drift_check")
    params.require_stationary("lyapunov_drift_check")
    if not 0.0 < c < 2.0 * min(params.b, params.theta):
        raise ParameterError("c must lie in (0, 2 min(b, theta))")
    c2 = params.m / params.theta
    V = lyapunov_V(c1, c2)
    d = lyapunov_d(c1, c, params)
    worst, where = -math.inf, None
    for pt in grid:
        s = _state(pt)
        gap = apply_generator_diffusion(V, s, params) + c * V.value(s.y, s.x) - d
        if gap > worst:
            worst, where = gap, (s.y, s.x)
    if where is None:
        raise ParameterError("grid is empty")
    return DriftReport(c1=c1, c2=c2, c=c, d=d, max_violation=worst, argmax=where)


def rectangle_grid(y_max: float, x_min: float, x_max: float, n: int):
    """n x n grid of states on [0, y_max] x [x_min, x_max]."""
    ys = np.linspace(0.0, y_max, n)
    xs = np.linspace(x_min, x_max, n)
    return [State(float(y), float(x)) for y in ys for x in xs]

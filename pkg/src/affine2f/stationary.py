"""Stationary law, transition density and moments for alpha = 2."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg, stats

from .errors import ParameterError, SeriesError
from .model import ModelParams, State
from .sampler import cir_step_constants

__all__ = [
    "GammaLaw",
    "MomentTable",
    "MomentOdeSystem",
    "y_stationary_law",
    "log_bessel_i",
    "bessel_i",
    "cir_transition_density",
    "stationary_moment",
    "moment_table",
    "moment_index",
    "build_moment_ode",
    "transient_moments",
    "initial_moments",
]


@dataclass(frozen=True)
class GammaLaw:
    """Gamma distribution with the given shape and rate."""

    shape: float
    rate: float

    @property
    def mean(self) -> float:
        return self.shape / self.rate

    @property
    def _dist(self):
        return stats.gamma(self.shape, scale=1.0 / self.rate)

    def pdf(self, y):
        return self._dist.pdf(y)

    def cdf(self, y):
        return self._dist.cdf(y)

    def laplace(self, lam):
        return (1.0 + np.asarray(lam, dtype=float) / self.rate) ** (-self.shape)

    def moment(self, n: int) -> float:
        out = 1.0
        for j in range(n):
            out *= (self.shape + j) / self.rate
        return out

    def sample(self, rng: np.random.Generator, size=None):
        return rng.gamma(self.shape, 1.0 / self.rate, size=size)


def y_stationary_law(params: ModelParams) -> GammaLaw:
    """Y_inf ~ Gamma(shape 2a, rate 2b)."""
    params.require_stationary("y_stationary_law")
    params.require_diffusion("y_stationary_law")
    return GammaLaw(2.0 * params.a, 2.0 * params.b)


ASYMPTOTIC_ARG = 700.0
MAX_TERMS = 100_000


def log_bessel_i(nu: float, x: float, series_tol: float = 1e-17) -> float:
    """log I_nu(x) for nu > -1, x > 0.

    Ascending series summed relative to its largest term, stopped once the
    term ratio has dropped below ``series_tol``. Beyond ``ASYMPTOTIC_ARG`` the
    Hankel expansion of e^{-x} I_nu(x) is used.
    """
    if x <= 0:
        raise ParameterError("x must be positive")
    if x > ASYMPTOTIC_ARG and x > nu * nu:
        mu = 4.0 * nu * nu
        term, total = 1.0, 1.0
        for k in range(1, 40):
            term *= -(mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
            total += term
            if abs(term) < 1e-17 * abs(total):
                break
        return x - 0.5 * math.log(2.0 * math.pi * x) + math.log(total)
    half = 0.5 * x
    log_half = math.log(half)
    q = half * half
    # term_k = q^k / (k! Gamma(k + nu + 1)), relative to term_0
    lead = nu * log_half - math.lgamma(nu + 1.0)
    # locate the peak term to keep the running sum in range
    k_peak = max(0, int(0.5 * (-nu + math.sqrt(nu * nu + 4.0 * q))))
    log_peak = k_peak * math.log(q) - math.lgamma(k_peak + 1.0) - math.lgamma(k_peak + nu + 1.0) + math.lgamma(nu + 1.0) if k_peak else 0.0
    total = 0.0
    term = math.exp(-log_peak)  # term_0 / term_peak
    k = 0
    while True:
        total += term
        ratio = q / ((k + 1.0) * (k + 1.0 + nu))
        term *= ratio
        k += 1
        if k > k_peak and (ratio < 1.0 and term < series_tol * total):
            break
        if k > MAX_TERMS:
            raise SeriesError(f"Bessel series for nu={nu}, x={x} did not converge")
    return lead + log_peak + math.log(total)


def bessel_i(nu: float, x: float, series_tol: float = 1e-17) -> float:
    return math.exp(log_bessel_i(nu, x, series_tol))


def cir_transition_density(y, y0: float, t: float, params: ModelParams, series_tol: float = 1e-17):
    """Density of Y_t at ``y`` given Y_0 = y0 (alpha = 2).

    Y_t = scale * chi'^2(4a, nc) with scale = (1 - e^{-bt}) / (4b) and
    nc = 4 b e^{-bt} y0 / (1 - e^{-bt}). For y0 = 0 this is the Gamma law
    with shape 2a and rate 1 / (2 scale).
    """
    params.require_diffusion("cir_transition_density")
    if y0 < 0 or not t > 0:
        raise ParameterError("need y0 >= 0 and t > 0")
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(ys <= 0):
        raise ParameterError("y must be positive")
    scale, factor = cir_step_constants(t, params.b)
    a = params.a
    nu = 2.0 * a - 1.0
    out = np.empty_like(ys)
    if y0 == 0:
        shape, rate = 2.0 * a, 1.0 / (2.0 * scale)
        out[:] = np.exp(shape * math.log(rate) + (shape - 1.0) * np.log(ys) - rate * ys - math.lgamma(shape))
    else:
        nc = factor * y0
        for i, yi in enumerate(ys):
            xi = yi / scale
            arg = math.sqrt(nc * xi)
            log_pdf = (
                -0.5 * (xi + nc)
                + 0.5 * nu * math.log(xi / nc)
                + log_bessel_i(nu, arg, series_tol)
                - math.log(2.0)
            )
            out[i] = math.exp(log_pdf) / scale
    return float(out[0]) if np.ndim(y) == 0 else out


@lru_cache(maxsize=256)
def _moment_triangle(a: float, b: float, m: float, theta: float, order: int) -> dict:
    table = {(0, 0): 1.0}

    def get(n, p):
        if n < 0 or p < 0:
            return 0.0
        return table[(n, p)]

    for deg in range(1, order + 1):
        for n in range(deg, -1, -1):
            p = deg - n
            acc = (a * n + 0.5 * n * (n - 1)) * get(n - 1, p) + m * p * get(n, p - 1)
            acc += 0.5 * p * (p - 1) * get(n + 1, p - 2)
            table[(n, p)] = acc / (b * n + theta * p)
    return table


def _require_stationary_diffusion(params, what):
    params.require_stationary(what)
    params.require_diffusion(what)


def stationary_moment(n: int, p: int, params: ModelParams) -> float:
    """E(Y_inf^n X_inf^p) from the moment recursion."""
    _require_stationary_diffusion(params, "stationary_moment")
    if n < 0 or p < 0:
        raise ParameterError("moment orders must be nonnegative")
    table = _moment_triangle(params.a, params.b, params.m, params.theta, n + p)
    return table[(n, p)]


@dataclass(frozen=True)
class MomentTable:
    max_order: int
    entries: dict
    params: ModelParams
    t: float | None = None  # None for the stationary table

    def __getitem__(self, key):
        return self.entries[key]

    def to_json_dict(self) -> dict:
        return {
            "max_order": self.max_order,
            "t": self.t,
            "params": self.params.as_dict(),
            "entries": [{"n": n, "p": p, "value": v} for (n, p), v in sorted(self.entries.items(), key=lambda kv: (sum(kv[0]), -kv[0][0]))],
        }


def moment_table(max_order: int, params: ModelParams) -> MomentTable:
    _require_stationary_diffusion(params, "moment_table")
    if max_order < 0:
        raise ParameterError("max_order must be nonnegative")
    tri = _moment_triangle(params.a, params.b, params.m, params.theta, max_order)
    return MomentTable(max_order, dict(tri), params)


def moment_index(M: int) -> list:
    """Index set {(n, p): n + p <= M} ordered by total degree, then n descending."""
    return [(n, deg - n) for deg in range(M + 1) for n in range(deg, -1, -1)]


@dataclass(frozen=True)
class MomentOdeSystem:
    order: int
    index: list
    matrix: np.ndarray
    init: np.ndarray | None = field(default=None)

    def position(self, n: int, p: int) -> int:
        return self.index.index((n, p))


def build_moment_ode(M: int, params: ModelParams) -> MomentOdeSystem:
    """Coefficient matrix of the linear ODE system for f_{n,p}(t) = E(Y_t^n X_t^p)."""
    params.require_diffusion("build_moment_ode")
    if M < 0:
        raise ParameterError("order must be nonnegative")
    a, b, m, theta = params.a, params.b, params.m, params.theta
    index = moment_index(M)
    pos = {k: i for i, k in enumerate(index)}
    A = np.zeros((len(index), len(index)))
    for (n, p), row in pos.items():
        A[row, row] = -(b * n + theta * p)
        if n >= 1:
            A[row, pos[(n - 1, p)]] += a * n + 0.5 * n * (n - 1)
        if p >= 1:
            A[row, pos[(n, p - 1)]] += m * p
        if p >= 2:
            A[row, pos[(n + 1, p - 2)]] += 0.5 * p * (p - 1)
    return MomentOdeSystem(M, index, A)


def initial_moments(initial, M: int, params: ModelParams) -> dict:
    """f_{n,p}(0) for a deterministic State or the ``"stationary"`` Y start (X_0 = m/theta)."""
    if initial == "stationary":
        law = y_stationary_law(params)
        x0 = params.m / params.theta
        return {(n, p): law.moment(n) * x0 ** p for (n, p) in moment_index(M)}
    if not isinstance(initial, State):
        initial = State(*initial)
    return {(n, p): initial.y ** n * initial.x ** p for (n, p) in moment_index(M)}


def transient_moments(t, init_moments: dict, M: int, params: ModelParams) -> MomentTable:
    """f_{n,p}(t) for n + p <= M by the matrix exponential of the moment system."""
    if t < 0:
        raise ParameterError("t must be nonnegative")
    system = build_moment_ode(M, params)
    try:
        f0 = np.array([float(init_moments[k]) for k in system.index])
    except KeyError as exc:
        raise ParameterError(f"missing initial moment {exc.args[0]}") from None
    ft = linalg.expm(system.matrix * t) @ f0
    return MomentTable(M, dict(zip(system.index, ft.tolist())), params, t=float(t))

"""Birkhoff time averages and mixing diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError
from .model import ModelParams, State
from .sampler import PathGrid, simulate_joint
from .stationary import initial_moments, stationary_moment, transient_moments

__all__ = [
    "ErgodicReport",
    "MixingCurve",
    "time_average",
    "ergodic_report",
    "mixing_decay",
    "fit_decay_rate",
]


def _poly(y, x, n: int, p: int):
    return np.power(y, n) * np.power(x, p)


def time_average(y, x, n: int, p: int, dt: float) -> float:
    """Trapezoidal (1/T) int_0^T Y^n X^p ds for a path on a uniform grid."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.shape != x.shape or y.ndim != 1:
        raise ParameterError("y and x must be one-dimensional paths of equal length")
    vals = _poly(y, x, n, p)
    if vals.size == 1:
        return float(vals[0])
    T = dt * (vals.size - 1)
    return float(dt * (vals.sum() - 0.5 * (vals[0] + vals[-1])) / T)


@dataclass(frozen=True)
class ErgodicReport:
    n: int
    p: int
    T: float
    dt: float
    n_replicas: int
    estimate: float
    target: Optional[float]
    stderr: float
    passed: Optional[bool]
    exploratory: bool

    def to_dict(self) -> dict:
        return asdict(self)


def ergodic_report(
    params: ModelParams,
    n: int,
    p: int,
    T: float,
    dt: float,
    n_replicas: int,
    master_seed: int,
    initial=None,
    threads: Optional[int] = None,
) -> ErgodicReport:
    """Replica mean of time averages of Y^n X^p against E(Y_inf^n X_inf^p).

    For alpha in (1, 2) no stationary target is available; the report is
    flagged exploratory and carries no verdict.
    """
    params.require_stationary("ergodic_report")
    if n_replicas < 2:
        raise ParameterError("need at least two replicas for a standard error")
    n_steps = int(round(T / dt))
    if n_steps < 1 or not math.isclose(n_steps * dt, T, rel_tol=1e-9):
        raise ParameterError("T must be a positive multiple of dt")
    grid = PathGrid(T, n_steps)
    if initial is None:
        initial = State(params.a / params.b, params.m / params.theta)
    scheme = "exact" if params.is_diffusion else "euler"
    ens = simulate_joint(master_seed, initial, grid, n_replicas, scheme, params, threads=threads)
    avgs = np.array([time_average(ens.y[i], ens.x[i], n, p, grid.dt) for i in range(n_replicas)])
    est = float(avgs.mean())
    se = float(avgs.std(ddof=1) / math.sqrt(n_replicas))
    if params.is_diffusion:
        target = stationary_moment(n, p, params)
        passed = abs(est - target) <= 3.0 * se
        exploratory = False
    else:
        target, passed, exploratory = None, None, True
    return ErgodicReport(n, p, T, grid.dt, n_replicas, est, target, se, passed, exploratory)


def fit_decay_rate(times, gaps):
    """Least-squares fit of log(gap) = c - beta t. Returns (beta, rms residual)."""
    times = np.asarray(times, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    keep = gaps > 0
    if keep.sum() < 2:
        return math.nan, math.nan
    slope, icpt = np.polyfit(times[keep], np.log(gaps[keep]), 1)
    resid = np.log(gaps[keep]) - (icpt + slope * times[keep])
    return float(-slope), float(np.sqrt(np.mean(resid ** 2)))


@dataclass(frozen=True)
class MixingCurve:
    n: int
    p: int
    times: np.ndarray
    target: float
    transient: np.ndarray  # E g(Y_t, X_t) from the moment system
    monte_carlo: np.ndarray
    mc_stderr: np.ndarray
    values: np.ndarray  # |transient - target|
    mc_values: np.ndarray  # |monte_carlo - target|
    beta_hat: float
    fit_residual: float

    def to_dict(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


def mixing_decay(
    params: ModelParams,
    n: int,
    p: int,
    times: Sequence[float],
    n_paths: int,
    initial,
    master_seed: int,
    dt: float = 0.01,
    threads: Optional[int] = None,
) -> MixingCurve:
    """Relaxation of E g(Y_t, X_t), g = y^n x^p, towards its stationary value.

    Computed twice: by Monte Carlo (exact scheme) and from the moment ODE.
    The decay rate is fitted on the moment-ODE curve.
    """
    params.require_diffusion("mixing_decay")
    params.require_stationary("mixing_decay")
    if n + p > 4:
        raise ParameterError("mixing_decay supports n + p <= 4")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2 or np.any(times < 0) or np.any(np.diff(times) <= 0):
        raise ParameterError("times must be an increasing grid of nonnegative values")
    idx = np.rint(times / dt).astype(int)
    if not np.allclose(idx * dt, times, rtol=0, atol=1e-9 * max(1.0, times[-1])):
        raise ParameterError("times must be multiples of dt")
    M = n + p
    init = initial_moments(initial, M, params)
    target = stationary_moment(n, p, params)
    transient = np.array([transient_moments(t, init, M, params)[(n, p)] for t in times])

    grid = PathGrid(float(idx[-1] * dt), int(idx[-1])) if idx[-1] > 0 else None
    if grid is None:
        raise ParameterError("times must extend beyond 0")
    ens = simulate_joint(master_seed, initial, grid, n_paths, "exact", params, threads=threads)
    samples = _poly(ens.y[:, idx], ens.x[:, idx], n, p)
    mc = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(n_paths)

    values = np.abs(transient - target)
    beta, resid = fit_decay_rate(times, values)
    return MixingCurve(n, p, times, target, transient, mc, se, values, np.abs(mc - target), beta, resid)

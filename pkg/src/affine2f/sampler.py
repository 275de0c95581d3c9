"""Path simulation for (Y, X).

Y is sampled either exactly (alpha = 2, noncentral chi-square transitions)
or by a positivity-truncated Euler scheme driven by spectrally positive
stable increments. X is then drawn exactly given the Y path, up to a
trapezoidal approximation of its conditional variance.

Paths are generated in fixed-size blocks, each block with its own random
stream derived from ``(master_seed, block_index)``. The result therefore
does not depend on how many worker threads are used.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import ParameterError
from .model import ModelParams, State

__all__ = [
    "BLOCK_SIZE",
    "PathGrid",
    "PathEnsemble",
    "rng_stream",
    "sample_stable_increment",
    "stable_scale",
    "cir_step_constants",
    "simulate_y_exact",
    "simulate_y_euler",
    "simulate_x_given_y",
    "simulate_joint",
    "resolve_threads",
]

BLOCK_SIZE = 4096
STATIONARY = "stationary"


def rng_stream(master_seed: int, stream_id: int) -> np.random.Generator:
    """Independent generator for ``stream_id`` under ``master_seed``."""
    if master_seed < 0 or stream_id < 0:
        raise ParameterError("seed and stream id must be nonnegative")
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class PathGrid:
    t_end: float
    n_steps: int

    def __post_init__(self):
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ParameterError("t_end must be a positive finite time")
        if int(self.n_steps) != self.n_steps or self.n_steps < 0:
            raise ParameterError("n_steps must be a nonnegative integer")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def dt(self) -> float:
        return self.t_end / self.n_steps if self.n_steps else 0.0

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_steps + 1)


@dataclass(frozen=True)
class PathEnsemble:
    grid: PathGrid
    y: np.ndarray  # (n_paths, n_steps + 1)
    x: np.ndarray
    params: ModelParams
    scheme: str
    master_seed: int

    @property
    def n_paths(self) -> int:
        return self.y.shape[0]


def stable_scale(dt: float, alpha: float) -> float:
    """Scale sigma with sigma^alpha |sec(pi alpha / 2)| = dt / alpha.

    A totally skewed S_alpha(sigma, 1, 0) variate then has Laplace transform
    E exp(-u L) = exp(dt u^alpha / alpha).
    """
    return (dt * abs(math.cos(math.pi * alpha / 2.0)) / alpha) ** (1.0 / alpha)


def sample_stable_increment(rng: np.random.Generator, dt: float, alpha: float, size=None):
    """Increment of the driving process L over a step of length ``dt``.

    Normal(0, dt) for alpha = 2; otherwise a zero-mean, totally right-skewed
    stable variate drawn by the Chambers-Mallows-Stuck method.
    """
    if dt <= 0:
        raise ParameterError("dt must be positive")
    if not 1.0 < alpha <= 2.0:
        raise ParameterError("alpha must lie in (1, 2]")
    if alpha == 2.0:
        return rng.normal(0.0, math.sqrt(dt), size=size)
    V = rng.uniform(-math.pi / 2, math.pi / 2, size=size)
    W = rng.standard_exponential(size=size)
    tan_term = math.tan(math.pi * alpha / 2.0)
    B = math.atan(tan_term) / alpha
    S = (1.0 + tan_term * tan_term) ** (1.0 / (2.0 * alpha))
    aVB = alpha * (V + B)
    Z = S * np.sin(aVB) / np.cos(V) ** (1.0 / alpha) * (np.cos(V - aVB) / W) ** ((1.0 - alpha) / alpha)
    # S_alpha(1, 1, 0) has mean zero for alpha > 1, so no recentring is needed
    return stable_scale(dt, alpha) * Z


def cir_step_constants(dt: float, b: float):
    """(scale, noncentrality factor) of the exact CIR transition over ``dt``.

    Y_{t+dt} = scale * chi'^2(4a, factor * Y_t) with
    scale = (1 - e^{-b dt}) / (4b), factor = 4 b e^{-b dt} / (1 - e^{-b dt}).
    The b -> 0 limits are dt / 4 and 4 / dt.
    """
    if b == 0.0:
        return dt / 4.0, 4.0 / dt
    one_minus = -math.expm1(-b * dt)
    return one_minus / (4.0 * b), 4.0 * b * math.exp(-b * dt) / one_minus


def _ncx2_step(rng, y, a, scale, factor):
    # noncentral chi-square with df 4a as a Poisson(nc/2)-mixed Gamma
    n = rng.poisson(0.5 * factor * y)
    return 2.0 * scale * rng.gamma(2.0 * a + n)


def simulate_y_exact(rng: np.random.Generator, y0, grid: PathGrid, params: ModelParams) -> np.ndarray:
    """Exact CIR paths (alpha = 2). ``y0`` is a scalar or an array of starts."""
    params.require_diffusion("simulate_y_exact")
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if np.any(y0 < 0):
        raise ParameterError("y0 must be nonnegative")
    out = np.empty((y0.size, grid.n_steps + 1))
    out[:, 0] = y0
    if grid.n_steps == 0:
        return out
    scale, factor = cir_step_constants(grid.dt, params.b)
    y = y0
    for k in range(grid.n_steps):
        y = _ncx2_step(rng, y, params.a, scale, factor)
        out[:, k + 1] = y
    return out


def simulate_y_euler(
    rng: np.random.Generator,
    y0,
    grid: PathGrid,
    params: ModelParams,
    increments: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Euler scheme Y_{k+1} = Y_k + (a - b Y_k) dt + max(Y_k, 0)^{1/alpha} dL_k, floored at 0.

    ``increments`` (shape (n_paths, n_steps)) replaces the random driver,
    e.g. zeros for the deterministic recursion.
    """
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if np.any(y0 < 0):
        raise ParameterError("y0 must be nonnegative")
    n = y0.size
    out = np.empty((n, grid.n_steps + 1))
    out[:, 0] = y0
    if grid.n_steps == 0:
        return out
    if increments is not None:
        increments = np.broadcast_to(np.asarray(increments, dtype=float), (n, grid.n_steps))
    dt, a, b = grid.dt, params.a, params.b
    root = 1.0 / params.alpha
    y = y0.copy()
    for k in range(grid.n_steps):
        dL = increments[:, k] if increments is not None else sample_stable_increment(rng, dt, params.alpha, size=n)
        y = y + (a - b * y) * dt + np.power(y, root) * dL
        np.maximum(y, 0.0, out=y)
        out[:, k + 1] = y
    return out


def simulate_x_given_y(rng: np.random.Generator, x0, y_path: np.ndarray, grid: PathGrid, params: ModelParams) -> np.ndarray:
    """Conditionally Gaussian X steps given the Y path on the same grid.

    The conditional variance int e^{-2 theta (t_{k+1} - u)} Y_u du over a step
    is approximated by the trapezoid rule.
    """
    y_path = np.atleast_2d(np.asarray(y_path, dtype=float))
    n, cols = y_path.shape
    if cols != grid.n_steps + 1:
        raise ParameterError("y_path does not match the grid")
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (n,))
    out = np.empty_like(y_path)
    out[:, 0] = x0
    if grid.n_steps == 0:
        return out
    dt, theta, m = grid.dt, params.theta, params.m
    decay = math.exp(-theta * dt)
    decay2 = decay * decay
    shift = m * dt if theta == 0 else m * -math.expm1(-theta * dt) / theta
    x = out[:, 0].copy()
    for k in range(grid.n_steps):
        var = 0.5 * dt * (decay2 * y_path[:, k] + y_path[:, k + 1])
        x = decay * x + shift + np.sqrt(var) * rng.standard_normal(n)
        out[:, k + 1] = x
    return out


def resolve_threads(threads: Optional[int] = None) -> int:
    if threads is None:
        env = os.environ.get("AFFINE2F_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise ParameterError("threads must be >= 1")
    return threads


def _simulate_block(master_seed, block, count, initial, grid, scheme, params):
    rng = rng_stream(master_seed, block)
    if initial == STATIONARY:
        params.require_stationary("stationary start")
        params.require_diffusion("stationary start")
        y0 = rng.gamma(2.0 * params.a, 1.0 / (2.0 * params.b), size=count)
        x0 = np.full(count, params.m / params.theta)
    else:
        y0 = np.full(count, initial.y)
        x0 = np.full(count, initial.x)
    if scheme == "exact":
        y = simulate_y_exact(rng, y0, grid, params)
    else:
        y = simulate_y_euler(rng, y0, grid, params)
    x = simulate_x_given_y(rng, x0, y, grid, params)
    return y, x


def simulate_joint(
    master_seed: int,
    initial: Union[State, tuple, str],
    grid: PathGrid,
    n_paths: int,
    scheme: str,
    params: ModelParams,
    threads: Optional[int] = None,
) -> PathEnsemble:
    """Simulate ``n_paths`` independent (Y, X) trajectories.

    Args:
        master_seed: nonnegative integer seed; identical seeds give identical ensembles.
        initial: a State / (y, x) tuple, or ``"stationary"`` to draw
            Y_0 ~ Gamma(2a, rate 2b) with X_0 = m / theta (alpha = 2 only).
        scheme: ``"exact"`` (alpha = 2) or ``"euler"``.
        threads: worker threads; the output does not depend on it.
    """
    if scheme not in ("exact", "euler"):
        raise ParameterError(f"unknown scheme {scheme!r}")
    if scheme == "exact":
        params.require_diffusion("the exact scheme")
    if n_paths < 1:
        raise ParameterError("n_paths must be >= 1")
    if initial != STATIONARY and not isinstance(initial, State):
        initial = State(*initial)
    blocks = [(i, min(BLOCK_SIZE, n_paths - i * BLOCK_SIZE)) for i in range(-(-n_paths // BLOCK_SIZE))]
    threads = resolve_threads(threads)

    def run(block):
        return _simulate_block(master_seed, block[0], block[1], initial, grid, scheme, params)

    if threads == 1 or len(blocks) == 1:
        parts = [run(bl) for bl in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, blocks))
    y = np.concatenate([p[0] for p in parts])
    x = np.concatenate([p[1] for p in parts])
    return PathEnsemble(grid=grid, y=y, x=x, params=params, scheme=scheme, master_seed=int(master_seed))

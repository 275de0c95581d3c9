"""Dormand-Prince 5(4) embedded Runge-Kutta integrator for small systems.

Scalar Python arithmetic on lists: the Riccati systems here have two
components, where numpy call overhead would dominate.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

from .errors import SolverError

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th order weights (propagated) and the difference to the 4th order weights
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


def integrate(
    rhs: Callable[[float, list], list],
    y0: Sequence[float],
    t_out: Sequence[float],
    atol: float,
    rtol: float,
    project: Optional[Callable[[list], list]] = None,
    max_steps: int = 1_000_000,
) -> list:
    """Integrate ``y' = rhs(t, y)`` and return the state at each time in ``t_out``.

    ``t_out`` must be nondecreasing and start at or after 0 (the initial time).
    Steps are shortened to land exactly on every output time. ``project`` is
    applied to each accepted state (used to clamp round-off excursions).

    Raises:
        SolverError: on step-size underflow, a non-finite state, or when
            ``max_steps`` is exhausted.
    """
    n = len(y0)
    y = [float(v) for v in y0]
    t = 0.0
    out = []
    k1 = rhs(t, y)
    h = None
    steps = 0
    for target in t_out:
        if target < t:
            raise SolverError("output times must be nondecreasing")
        if h is None and target > 0:
            h = _initial_step(rhs, t, y, k1, atol, rtol, target)
        while t < target:
            steps += 1
            if steps > max_steps:
                raise SolverError(f"exceeded {max_steps} steps before t={target}")
            last = False
            if t + h >= target:
                h_try = target - t
                last = True
            else:
                h_try = h
            if h_try <= 1e-15 * max(1.0, abs(t)):
                raise SolverError(f"step size underflow at t={t!r} (h={h_try!r})")
            ks = [k1]
            for i in range(1, 7):
                ai = _A[i]
                yi = [y[j] + h_try * sum(ai[s] * ks[s][j] for s in range(i)) for j in range(n)]
                ks.append(rhs(t + _C[i] * h_try, yi))
            y_new = yi  # stage 7 is evaluated at the 5th order solution (FSAL)
            err = 0.0
            for j in range(n):
                ej = h_try * sum(_E[s] * ks[s][j] for s in range(7))
                scale = atol + rtol * max(abs(y[j]), abs(y_new[j]))
                err = max(err, abs(ej) / scale)
            if not all(math.isfinite(v) for v in y_new) or not math.isfinite(err):
                h = h_try * MIN_FACTOR
                if h <= 1e-15 * max(1.0, abs(t)):
                    raise SolverError(f"non-finite state at t={t!r}")
                continue
            if err <= 1.0:
                t = target if last else t + h_try
                if project is not None:
                    y_new = project(y_new)
                    k1 = rhs(t, y_new)
                else:
                    k1 = ks[6]
                y = y_new
                factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err ** -0.2)
                # keep h from the unclipped step when the last step was shortened
                h = max(h, h_try * factor) if last else h_try * factor
            else:
                h = h_try * max(MIN_FACTOR, SAFETY * err ** -0.2)
        out.append(list(y))
    return out


def _initial_step(rhs, t, y, f0, atol, rtol, span):
    # Hairer, Norsett & Wanner, Solving ODEs I, II.4
    scale = [atol + rtol * abs(v) for v in y]
    d0 = math.sqrt(sum((v / s) ** 2 for v, s in zip(y, scale)) / len(y))
    d1 = math.sqrt(sum((v / s) ** 2 for v, s in zip(f0, scale)) / len(y))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = [v + h0 * f for v, f in zip(y, f0)]
    f1 = rhs(t + h0, y1)
    d2 = math.sqrt(sum(((a - b) / s) ** 2 for a, b, s in zip(f1, f0, scale)) / len(y)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)

"""Model parameters, state types and the affine functions F and R.

The model is the two-factor affine SDE

    dY = (a - b Y) dt + Y^{1/alpha} dL
    dX = (m - theta X) dt + sqrt(Y) dB

with L a spectrally positive alpha-stable Levy process (a standard Wiener
process when alpha = 2) and B an independent Wiener process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

__all__ = [
    "ModelParams",
    "LambdaPair",
    "State",
    "validate_params",
    "c_alpha",
    "func_F",
    "func_R",
]


def _finite(name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"{name} must be a real number, got {value!r}") from exc
    if not math.isfinite(v):
        raise ParameterError(f"{name} must be finite, got {value!r}")
    return v


@dataclass(frozen=True)
class ModelParams:
    """Validated parameter set (a, b, m, theta, alpha)."""

    a: float
    b: float
    m: float
    theta: float
    alpha: float

    def __post_init__(self):
        for name in ("a", "b", "m", "theta", "alpha"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if self.a <= 0:
            raise ParameterError("a must be positive")
        if not 1.0 < self.alpha <= 2.0:
            raise ParameterError(f"alpha must lie in (1, 2], got {self.alpha}")

    @property
    def stationary(self) -> bool:
        """True iff b > 0 and theta > 0 (a unique stationary law exists)."""
        return self.b > 0 and self.theta > 0

    @property
    def is_diffusion(self) -> bool:
        return self.alpha == 2.0

    def require_stationary(self, what: str = "this operation") -> None:
        if not self.stationary:
            raise ParameterError(f"{what} requires b > 0 and theta > 0")

    def require_diffusion(self, what: str = "this operation") -> None:
        if not self.is_diffusion:
            raise ParameterError(f"{what} requires alpha = 2")

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "m": self.m, "theta": self.theta, "alpha": self.alpha}


def validate_params(a=None, b=None, m=None, theta=None, alpha=None) -> ModelParams:
    """Build a validated :class:`ModelParams`.

    Accepts either the five reals or an existing ``ModelParams`` as the single
    positional argument, so validating twice is a no-op.
    """
    if isinstance(a, ModelParams):
        return a
    return ModelParams(a=a, b=b, m=m, theta=theta, alpha=alpha)


@dataclass(frozen=True)
class LambdaPair:
    """Transform argument: lambda1 >= 0 (Laplace), lambda2 real (Fourier)."""

    lambda1: float
    lambda2: float

    def __post_init__(self):
        object.__setattr__(self, "lambda1", _finite("lambda1", self.lambda1))
        object.__setattr__(self, "lambda2", _finite("lambda2", self.lambda2))
        if self.lambda1 < 0:
            raise ParameterError("lambda1 must be nonnegative")


@dataclass(frozen=True)
class State:
    y: float
    x: float

    def __post_init__(self):
        object.__setattr__(self, "y", _finite("y", self.y))
        object.__setattr__(self, "x", _finite("x", self.x))
        if self.y < 0:
            raise ParameterError("y must be nonnegative")


def c_alpha(alpha: float) -> float:
    """Levy-measure constant C = 1/(alpha * Gamma(-alpha)) for alpha in (1, 2).

    Uses Gamma(-alpha) = -pi / (sin(pi alpha) Gamma(1 + alpha)), which gives
    C = -Gamma(alpha) sin(pi alpha) / pi and stays accurate near alpha = 2.
    """
    if not 1.0 < alpha < 2.0:
        raise ParameterError("c_alpha is defined for alpha in (1, 2)")
    return -math.gamma(alpha) * math.sin(math.pi * alpha) / math.pi


def func_F(u1: complex, u2: complex, params: ModelParams) -> complex:
    """Immigration part of the affine exponent: a*u1 + m*u2."""
    return params.a * u1 + params.m * u2


def func_R(u1: complex, u2: complex, params: ModelParams) -> complex:
    """Branching part: -b*u1 + (-u1)^alpha / alpha + u2^2 / 2.

    The power is the principal branch; it is only meaningful for Re(u1) <= 0.
    """
    w = -complex(u1)
    power = 0j if w == 0 else w ** params.alpha
    return -params.b * u1 + power / params.alpha + complex(u2) ** 2 / 2

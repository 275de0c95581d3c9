"""Affine two-factor model: alpha-root / CIR factor Y driving a Gaussian factor X."""

from .errors import NumericalError, ParameterError, QuadratureError, SeriesError, SolverError
from .model import LambdaPair, ModelParams, State, c_alpha, func_F, func_R, validate_params

__version__ = "0.1.0"

__all__ = [
    "LambdaPair",
    "ModelParams",
    "NumericalError",
    "ParameterError",
    "QuadratureError",
    "SeriesError",
    "SolverError",
    "State",
    "c_alpha",
    "func_F",
    "func_R",
    "validate_params",
]

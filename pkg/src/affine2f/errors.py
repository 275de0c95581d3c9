"""Exception hierarchy shared across the package."""


class ParameterError(ValueError):
    """Invalid model parameters or arguments."""


class NumericalError(RuntimeError):
    """A numerical routine failed to meet its tolerance."""


class SolverError(NumericalError):
    """Adaptive ODE integration failed (step-size underflow, non-finite state)."""


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge to the requested tolerance."""


class SeriesError(NumericalError):
    """A power series did not converge within the term budget."""

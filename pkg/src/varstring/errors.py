"""
Exception hierarchy for varstring.

Every error raised on purpose by the library derives from VarStringError, so
callers (and the CLI) can catch one class and still tell the failure modes
apart.
"""

from typing import Optional, Sequence


class VarStringError(Exception):
    """Base exception class for varstring errors."""
    pass


class DomainError(VarStringError, ValueError):
    """Argument outside the mathematical domain of a function."""
    pass


class ParameterError(VarStringError, ValueError):
    """Invalid model or engine parameter."""
    pass


class DensityError(VarStringError):
    """A density failed one of its construction checks."""
    pass


class QuadratureError(VarStringError):
    """
    Quadrature did not reach the requested tolerance.

    Attributes:
        best_estimate: Best value obtained before giving up
        achieved_tolerance: Error estimate of best_estimate
    """

    def __init__(self, message: str, best_estimate: float = float("nan"),
                 achieved_tolerance: float = float("inf")):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.achieved_tolerance = achieved_tolerance


class ConvergenceError(VarStringError):
    """An iterative procedure failed to converge or collapsed."""
    pass


class RootNotFoundError(VarStringError):
    """No sign change was found where a root was expected."""

    def __init__(self, message: str, endpoints: Optional[Sequence[float]] = None):
        super().__init__(message)
        self.endpoints = tuple(endpoints) if endpoints is not None else ()


class ContinuationUnavailableError(VarStringError):
    """The density has no analytic continuation of V(sigma) to complex sigma."""
    pass


class ConfigError(VarStringError):
    """Invalid command line or configuration file."""
    pass

"""Exception hierarchy shared by the analytic, simulation and CLI layers."""


class ADReceiverError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ADReceiverError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ConfigError(ADReceiverError, ValueError):
    """Invalid physical parameters, simulation settings or scenario files."""


class ReceiverKindError(ConfigError):
    """An operation was requested for a receiver kind that does not support it."""


class GeometryError(ADReceiverError, ArithmeticError):
    """A segment/sphere query had no real solution."""


class QuadratureError(ADReceiverError, ArithmeticError):
    """Numerical integration failed to converge.

    Attributes
    ----------
    estimate : float
        Best estimate of the integral when the budget ran out.
    residual : float
        Magnitude of the last change in the extrapolated estimate, a rough
        bound on the remaining error.
    """

    def __init__(self, message, estimate=float("nan"), residual=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual


class StepSizeWarning(UserWarning):
    """The simulation step is too coarse for the requested adsorption rate."""

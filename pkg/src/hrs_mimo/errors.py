"""Exception types raised by the simulator."""


class HRSError(Exception):
    """Base class for all simulator errors."""


class InvalidConfigurationError(HRSError, ValueError):
    """A scenario or dimension parameter violates a required constraint."""


class InvalidInputError(HRSError, ValueError):
    """A matrix argument does not have the required structure."""


class DegenerateChannelError(HRSError, ArithmeticError):
    """A precoder normalization collapsed to (numerically) zero."""


class ConvergenceError(HRSError, RuntimeError):
    """Fixed-point iteration did not converge.

    Attributes
    ----------
    residual : float
        Last observed change of the iterate.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class InstabilityError(HRSError, ArithmeticError):
    """Deterministic-equivalent derivative denominator is not positive."""

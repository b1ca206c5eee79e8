"""Exception types shared across the package."""


class ChstepError(Exception):
    """Base class for all package-specific errors."""


class NonZeroMean(ChstepError):
    """Raised when a mean-zero grid function was required but not supplied."""


class NonPositiveStep(ChstepError):
    """Raised when a time-step size is zero or negative."""


class OutOfDomain(ChstepError):
    """Raised when a ratio argument leaves the admissible range."""


class RatioExceedsUser(ChstepError):
    """Raised when a mesh ratio exceeds the user-chosen cap."""


class FixedPointDiverged(ChstepError):
    """Raised when the fixed-point iteration hits its iteration budget.

    Callers should treat this as a signal to reject the step and retry
    with a smaller time-step size.
    """

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class DegenerateRefinement(ChstepError):
    """Raised when two refinement levels share the same maximum step size."""


class InsufficientData(ChstepError):
    """Raised when a fit is requested on too few data points."""

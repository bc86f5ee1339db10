"""Exception and warning types raised by the branched core modules."""


class BranchedError(Exception):
    """Base class for every error raised by the branched package."""


class DomainError(BranchedError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class OrderTooLargeError(DomainError):
    """An order, level count or degree exceeds the guarded range."""


class ConfigurationError(BranchedError, ValueError):
    """A solver or run configuration cannot produce a meaningful result."""


class ConvergenceError(BranchedError, RuntimeError):
    """An iterative procedure hit its iteration cap.

    Attributes:
        level: Index of the level that failed, when the failure is per level
    """

    def __init__(self, message: str, level: int | None = None):
        super().__init__(message)
        self.level = level


class QuantizationError(ConvergenceError):
    """The parabolic-cylinder scan found fewer roots than requested."""


class IntegrationAbort(BranchedError, RuntimeError):
    """A trajectory integration was stopped by a guard."""


class BranchBoundaryError(IntegrationAbort):
    """The canonical momentum reached the edge of its branch.

    Attributes:
        time: Time at which the guard fired
        x: Position at that time
        p: Canonical momentum at that time
    """

    def __init__(self, message: str, time: float, x: float, p: float):
        super().__init__(message)
        self.time = time
        self.x = x
        self.p = p


class DetectionError(BranchedError, ValueError):
    """A trajectory does not contain enough oscillation to measure a period."""


class ConsistencyError(BranchedError, AssertionError):
    """An internal invariant does not hold."""


class PolynomialParseError(DomainError):
    """A polynomial string could not be parsed."""


class BranchedWarning(UserWarning):
    """Base class for warnings emitted by the branched package."""


class AttractiveSingularityWarning(BranchedWarning):
    """The inverse-square term is attractive (epsilon < 1/4)."""


class ConditioningWarning(BranchedWarning):
    """An alternating sum lost significant digits to cancellation."""

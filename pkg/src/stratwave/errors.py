"""Exception types shared across the package."""


class StratwaveError(Exception):
    """Base class for all package-specific errors."""


class InadmissibleParameters(StratwaveError):
    """Catalog parameters outside the supported tables."""


class UnknownGroupKind(StratwaveError):
    """Requested catalog family does not exist."""


class DegenerateLambda(StratwaveError):
    """The skew form at this frequency has a kernel larger than the radical."""


class OrderTooLarge(StratwaveError):
    """Hermite order beyond the evaluator's stable range."""


class QuadratureNotConverged(StratwaveError):
    """Node-doubling certificate failed the requested tolerance."""


class BudgetExceeded(StratwaveError):
    """Oscillatory integral did not certify within the node budget."""

    def __init__(self, message, value=None, error_estimate=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


class ZeroTime(StratwaveError):
    """The dispersive factor is undefined at t = 0."""


class FrameUnavailable(StratwaveError):
    """Off-center evaluation requested on a group without an explicit frame."""


class NotLinear(StratwaveError):
    """The ground-frequency map is not linear on the chosen component."""

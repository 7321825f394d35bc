"""Exception types shared across the package."""


class IBRegionError(Exception):
    """Base class for all library errors."""


class InvalidDistribution(IBRegionError, ValueError):
    """A table fails the nonnegativity / unit-mass check."""


class InfiniteDivergence(IBRegionError, ArithmeticError):
    """KL divergence with p_i > 0 where q_i = 0."""


class SizeExceeded(IBRegionError, ValueError):
    """A dense table or enumeration would exceed its guard."""


class OutOfRange(IBRegionError, ValueError):
    """A scalar argument lies outside its admissible interval."""


class EpsilonTooSmall(IBRegionError, ValueError):
    """No dyadic delta above the underflow floor meets the requested epsilon."""


class ConvergenceError(IBRegionError, RuntimeError):
    """Alternating minimization hit max_iter before the Lagrangian settled.

    The last iterate is attached as ``point`` so callers may still use it;
    any encoder is a valid (if suboptimal) channel.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class EmptyCurve(IBRegionError, ValueError):
    """An operation needs at least one solved curve point."""


class BoundViolation(IBRegionError, AssertionError):
    """A proven inequality failed numerically; carries the offending report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class EmptySupportWarning(UserWarning):
    """A bottleneck symbol's mass underflowed and the symbol was pruned."""

"""Exception types raised by ibkit.

Every error derives from :class:`IBKitError` (itself a ``ValueError``) so that
callers, and the CLI, can catch input problems with a single clause.
"""


class IBKitError(ValueError):
    """Base class for all input/contract violations."""


class NegativeEntry(IBKitError):
    pass


class NotNormalized(IBKitError):
    pass


class EmptyAlphabet(IBKitError):
    pass


class LengthMismatch(IBKitError):
    pass


class OutOfRange(IBKitError):
    pass


class IndexOutOfRange(IBKitError):
    pass


class CardinalityMismatch(IBKitError):
    pass


class ShapeMismatch(IBKitError):
    pass


class NotPositiveDefinite(IBKitError):
    pass


class EigenFailure(IBKitError):
    pass


class NonPositiveTemperature(IBKitError):
    pass


class InfiniteBound(IBKitError):
    pass


class EmptyDataset(IBKitError):
    pass


class SandwichViolation(IBKitError):
    pass


class ForeignCurvePoint(IBKitError):
    pass


class DistortionOutOfRange(IBKitError):
    pass


class MarkovViolation(IBKitError):
    pass


class EnumerationTooLarge(IBKitError):
    pass

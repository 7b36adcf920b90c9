class EsConvexError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(EsConvexError, ValueError):
    pass


class TooFewPoints(EsConvexError, ValueError):
    pass


class DegenerateInput(EsConvexError, ValueError):
    """Input violates general position; ``witness`` holds offending indices."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NonGenericDirection(DegenerateInput):
    pass


class HullsDisjoint(EsConvexError):
    pass


class GuardExceeded(EsConvexError):
    """An exponential search was asked to run above its configured size guard."""


class NotFound(EsConvexError):
    pass


class NoPolygonOfRequestedSize(NotFound):
    pass


class NotPFree(EsConvexError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class ThresholdNotMet(EsConvexError):
    pass


class SearchExhausted(EsConvexError):
    pass


class EmptySetProduced(EsConvexError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SeparationFailed(EsConvexError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PlaneConstructionFailed(SeparationFailed):
    pass


class AssemblyFailed(EsConvexError):
    pass


class InputTooSmall(EsConvexError):
    pass


class PreconditionViolated(EsConvexError, ValueError):
    pass

"""Exception types raised by the simulator."""


class SpinSimError(Exception):
    """Base class for all domain errors."""


class InvalidArgument(SpinSimError, ValueError):
    pass


class OutOfRange(InvalidArgument):
    pass


class DimensionMismatch(SpinSimError, ValueError):
    pass


class DegenerateOutcome(SpinSimError):
    """Conditioning on a measurement record left no numerically nonzero weight."""


class UndefinedSensitivity(SpinSimError):
    """Signal slope vanishes at the requested operating point."""


class UndefinedOrientation(SpinSimError):
    """Mean spin is zero, so no preferred orientation exists."""


class SequenceError(SpinSimError):
    """An element of an interferometer sequence failed.

    ``index`` is the position of the offending element; the original
    exception is chained as ``__cause__``.
    """

    def __init__(self, index, cause):
        self.index = index
        self.cause = cause
        super().__init__(f"sequence element {index}: {type(cause).__name__}: {cause}")

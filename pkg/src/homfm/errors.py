"""Exception hierarchy shared by every module."""


class HomFMError(Exception):
    """Base class for all errors raised by homfm."""


class SingularMatrix(HomFMError):
    pass


class NonProjectable(HomFMError):
    """Raised when an ambient matrix cannot be mapped back onto its group."""


class InvalidAlgebraElement(HomFMError):
    pass


class OutsideExpImage(HomFMError):
    """SL(2) element with trace <= -2 has no real logarithm on the principal branch."""


class InvalidPoint(HomFMError):
    pass


class NorthPoleExcluded(InvalidPoint):
    pass


class DegenerateDenominator(HomFMError):
    pass


class InvalidSpec(HomFMError):
    pass


class InvalidShape(HomFMError):
    pass


class ShapeMismatch(HomFMError):
    pass


class LengthMismatch(HomFMError):
    pass


class SpaceMismatch(HomFMError):
    pass


class NonFiniteState(HomFMError):
    pass


class DivergedTraining(HomFMError):
    pass


class CheckpointError(HomFMError):
    pass


class VersionMismatch(CheckpointError):
    pass


class CorruptCheckpoint(CheckpointError):
    pass

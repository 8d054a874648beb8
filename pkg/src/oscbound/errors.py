"""Exception hierarchy shared by every stage of the pipeline."""


class OscBoundError(Exception):
    """Base class for all toolkit errors."""


class PolynomialSyntaxError(OscBoundError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class DimensionError(OscBoundError, ValueError):
    pass


class ChainTooLarge(OscBoundError):
    pass


class EmptyDomainError(OscBoundError):
    pass


class DegenerateProfileError(OscBoundError):
    pass


class BoundInputError(OscBoundError, ValueError):
    """A bound formula was called outside its admissible range."""


class FitUndefinedError(OscBoundError):
    pass


class UnsupportedGeometryError(OscBoundError):
    pass


class StageError(OscBoundError):
    """Raised by the driver; names the stage that failed and keeps the partial report."""

    def __init__(self, stage, cause, partial=None):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.partial = partial

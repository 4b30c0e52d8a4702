"""Exception types raised by the lowlight library."""


class LowlightError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(LowlightError, ValueError):
    """Array dimensions or channel counts disagree with what an operation needs."""


class ParameterError(LowlightError, ValueError):
    """A numeric parameter is outside its documented range."""


class RangeError(LowlightError, ValueError):
    """Pixel or guide values fall outside the unit interval."""


class SizeError(LowlightError, ValueError):
    """An image is too small for the requested operation."""


class DecodeError(LowlightError, ValueError):
    """An encoded image stream is malformed or truncated."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnsupportedFormatError(LowlightError, ValueError):
    """The stream is a valid image but uses features outside the supported subset."""


class RankDeficiencyError(LowlightError, ValueError):
    """A least-squares system is singular and no ridge term was requested."""

    def __init__(self, message, feature=None):
        super().__init__(message)
        self.feature = feature


class CalibrationError(LowlightError, ValueError):
    """Automatic parameter calibration is degenerate for the given inputs."""


class PyramidStructureError(LowlightError, ValueError):
    """Pyramid levels are mutually inconsistent."""


class DatasetError(LowlightError, ValueError):
    """A paired dataset directory layout is unusable."""


class PipelineStageError(LowlightError, RuntimeError):
    """Wraps a failure inside one stage of the enhancement pipeline."""

    def __init__(self, stage, cause):
        super().__init__(f"[stage={stage}] {cause}")
        self.stage = stage
        self.cause = cause

"""Exception types raised across the package."""


class GcnLabError(Exception):
    """Base class for all package errors."""


class IndexOutOfRange(GcnLabError, IndexError):
    pass


class SelfLoop(GcnLabError, ValueError):
    pass


class DuplicateEdge(GcnLabError, ValueError):
    pass


class DimensionMismatch(GcnLabError, ValueError):
    pass


class MalformedFile(GcnLabError, ValueError):
    pass


class ChecksumMismatch(GcnLabError, ValueError):
    """Raised when meta.json declares shapes the data files do not have."""


class ProbabilityOutOfRange(GcnLabError, ValueError):
    pass


class DimensionTooSmall(GcnLabError, ValueError):
    pass


class CountsExceedNodes(GcnLabError, ValueError):
    pass


class EmptyMask(GcnLabError, ValueError):
    pass


class TooFewNodes(GcnLabError, ValueError):
    pass


class CacheMissing(GcnLabError, RuntimeError):
    pass


class EmptyInput(GcnLabError, ValueError):
    pass


class IoError(GcnLabError, OSError):
    pass

"""Exception types shared across the package."""


class SparselocError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(SparselocError):
    """A numeric input violates its contract (non-finite, wrong shape, ...)."""


class InvalidCameraError(SparselocError):
    """Camera rig parameters are degenerate or out of range."""


class InvalidBoxError(SparselocError):
    """A bounding box violates its coordinate invariants."""


class InsufficientDataError(SparselocError):
    """Too few points for the requested computation."""


class DegenerateCloudError(SparselocError):
    """The filtered cloud carries no directional information (all points coincide)."""


class InputFormatError(SparselocError):
    """An input file is unreadable or fails schema validation."""

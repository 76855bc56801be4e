"""Exception types shared across the toolkit."""


class TactranError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(TactranError):
    """Invalid or missing configuration."""


class DegenerateInput(TactranError):
    """Geometric input admits no valid construction (e.g. collinear points)."""


class GridMismatch(TactranError):
    """A pixel grid does not cover the region an operation requires."""


class OutOfBounds(TactranError):
    """A sample location falls outside the image."""


class ShapeMismatch(TactranError):
    """Array or image dimensions do not match the expected shape."""


class LengthMismatch(TactranError):
    """Two arrays that must have equal length do not."""


class SingularSystem(TactranError):
    """A linear system is rank-deficient and cannot be solved as posed."""


class NonDifferentiableKind(TactranError):
    """Gradient requested for a model kind fitted in closed form."""


class Diverged(TactranError):
    """Training loss became non-finite."""


class ForceUnreachable(TactranError):
    """Commanded force exceeds what full-thickness penetration can generate."""


class FormatError(TactranError):
    """Malformed binary or text file."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset


class ChecksumMismatch(FormatError):
    """Stored checksum does not match the payload."""


class MissingVersion(TactranError):
    """A primitive kind lacks one of the four scale versions."""

"""Exception hierarchy for the archmark pipeline.

Each stage failure maps to a distinct exception so the CLI can report a
meaningful exit code (see cli.EXIT_CODES).
"""


class ArchmarkError(Exception):
    """Base class for all archmark failures."""


class ParseError(ArchmarkError):
    """Raised when an input mesh file cannot be parsed.

    Carries the byte offset (binary) or line number (ASCII) of the first
    offending token where that is known.
    """

    def __init__(self, message: str, *, offset: int | None = None,
                 line: int | None = None):
        loc = ""
        if offset is not None:
            loc = f" (byte offset {offset})"
        elif line is not None:
            loc = f" (line {line})"
        super().__init__(message + loc)
        self.offset = offset
        self.line = line


class OrientationError(ArchmarkError):
    """Raised when a model's coordinate frame cannot be established."""


class SegmentationError(ArchmarkError):
    """Raised when no usable tooth regions survive segmentation."""


class ArchFitError(SegmentationError):
    """Raised when the dental arch quadratic cannot be fitted."""


class AssignmentError(ArchmarkError):
    """Raised when blobs cannot be matched to tooth types."""


class GenerationError(ArchmarkError):
    """Raised when a synthetic model specification is invalid."""

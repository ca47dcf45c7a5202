"""Exception types shared across modules (CLI exit codes map onto these)."""

__all__ = ["SeriesFormatError", "InfeasiblePathError", "NumericalError", "SegmentationError"]


class SeriesFormatError(ValueError):
    """A series file or record could not be parsed or validated."""


class InfeasiblePathError(ValueError):
    """A sample path does not apply cleanly to its start graph."""


class NumericalError(RuntimeError):
    """A numerical routine failed (degenerate weights, zero denominators)."""


class SegmentationError(ValueError):
    """The segment finder cannot run on the given window."""

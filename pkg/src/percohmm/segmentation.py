"""Automatic finder for percolation-consistent segments of a network series.

Within a time window, the GCC-fraction or density curve is split at its
first and third quartiles: a segment starts at a point at or below Q1,
grows until it first reaches Q3, keeps growing until it first falls back
to Q1, and is then trimmed back to its last point at or above Q3. The
result is the low-to-high ramps of the curve, which are the stretches a
percolation fit should see.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SegmentationError
from .series import NetworkSeries, curve_table

__all__ = ["Roi", "Segment", "find_segments", "intersect_segments"]


@dataclass(frozen=True)
class Roi:
    """Closed time window [start, end]."""

    start: float
    end: float

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"empty ROI: start={self.start}, end={self.end}")


@dataclass(frozen=True)
class Segment:
    """Index range [a, b] into the series (0-based, inclusive)."""

    a: int
    b: int

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"degenerate segment [{self.a}, {self.b}]")


def _window_indices(series: NetworkSeries, roi: Roi):
    inside = np.flatnonzero((series.times >= roi.start) & (series.times <= roi.end))
    if len(inside) == 0:
        raise SegmentationError("ROI contains no observations")
    return int(inside[0]), int(inside[-1])


def _metric_curve(series: NetworkSeries, metric: str) -> np.ndarray:
    table = curve_table(series)
    if metric == "gcc":
        return table[:, 1]
    if metric == "density":
        return table[:, 2]
    raise ValueError(f"unknown metric {metric!r} (expected 'gcc' or 'density')")


def find_segments(series: NetworkSeries, roi: Roi, metric: str = "gcc"):
    """Low-to-high segments of the metric curve inside the ROI."""
    c = _metric_curve(series, metric)
    left, right = _window_indices(series, roi)
    window = c[left:right + 1]
    if len(window) < 4:
        raise SegmentationError(f"need at least 4 observations in the ROI, got {len(window)}")
    q1 = float(np.percentile(window, 25))
    q3 = float(np.percentile(window, 75))
    if q1 == q3:
        raise SegmentationError(f"degenerate quartiles (Q1 = Q3 = {q1}); curve has no range")

    anchor = left
    while anchor < right and c[anchor] > q1:
        anchor += 1
    marks = [anchor]
    while anchor < right:
        i = anchor + 1
        while c[i] < q3 and i < right:
            i += 1
        while c[i] > q1 and i < right:
            i += 1
        anchor = i
        marks.append(anchor)

    segments = []
    for a, b in zip(marks[:-1], marks[1:]):
        while b > a and c[b] < q3:
            b -= 1  # trim the falling tail back to the last high point
        if b > a:
            segments.append(Segment(a, b))
    return segments


def intersect_segments(series: NetworkSeries, roi: Roi):
    """Index-range intersections of the GCC-based and density-based segments."""
    by_gcc = find_segments(series, roi, "gcc")
    by_density = find_segments(series, roi, "density")
    out = []
    for s in by_gcc:
        for t in by_density:
            a = max(s.a, t.a)
            b = min(s.b, t.b)
            if a < b:
                out.append(Segment(a, b))
    out.sort(key=lambda s: (s.a, s.b))
    return out

"""Timestamped sequences of observed networks and their file format.

Series files are line-delimited JSON, one record per snapshot in
increasing time order::

    {"t": <real>, "n": <int>, "edges": [[i, j], ...]}

with 0-based vertex indices and edges in canonical (min, max) order. The
serialization is canonical (sorted edges, fixed key order, no whitespace),
so a load/save round trip is byte-stable.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import SeriesFormatError
from .graph import DynGraph

__all__ = ["NetworkSeries", "load_series", "save_series", "curve_table"]


@dataclass
class NetworkSeries:
    """Observation times (strictly increasing) and graph snapshots of common n."""

    times: np.ndarray
    snapshots: list

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        if len(self.times) != len(self.snapshots):
            raise ValueError("times and snapshots differ in length")
        if len(self.times) == 0:
            raise ValueError("series must contain at least one snapshot")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("observation times must be strictly increasing")
        n = self.snapshots[0].n
        if any(g.n != n for g in self.snapshots):
            raise ValueError("snapshots must share a common vertex count")

    def __len__(self) -> int:
        return len(self.snapshots)

    @property
    def n(self) -> int:
        return self.snapshots[0].n

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkSeries):
            return NotImplemented
        return (np.array_equal(self.times, other.times)
                and all(a == b for a, b in zip(self.snapshots, other.snapshots)))


def _snapshot_record(t: float, g: DynGraph) -> str:
    payload = {"t": float(t), "n": g.n, "edges": [[i, j] for i, j in g.edges()]}
    return json.dumps(payload, separators=(",", ":"))


def save_series(series: NetworkSeries, path) -> None:
    with open(path, "w") as fh:
        for t, g in zip(series.times, series.snapshots):
            fh.write(_snapshot_record(t, g) + "\n")


def load_series(path) -> NetworkSeries:
    times = []
    snapshots = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                t = float(rec["t"])
                n = int(rec["n"])
                edges = [(int(i), int(j)) for i, j in rec["edges"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise SeriesFormatError(f"{path}:{lineno}: bad snapshot record: {exc}") from exc
            try:
                g = DynGraph(n, edges)
            except ValueError as exc:
                raise SeriesFormatError(f"{path}:{lineno}: {exc}") from exc
            times.append(t)
            snapshots.append(g)
    if not snapshots:
        raise SeriesFormatError(f"{path}: empty series file")
    try:
        return NetworkSeries(np.asarray(times), snapshots)
    except ValueError as exc:
        raise SeriesFormatError(f"{path}: {exc}") from exc


def curve_table(series: NetworkSeries) -> np.ndarray:
    """Rows of (t, gcc_fraction, density), one per snapshot."""
    out = np.empty((len(series), 3), np.float64)
    for i, (t, g) in enumerate(zip(series.times, series.snapshots)):
        out[i, 0] = t
        out[i, 1] = g.gcc_fraction()
        out[i, 2] = g.density()
    return out

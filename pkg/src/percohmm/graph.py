"""Mutable simple graph on a fixed vertex set with component bookkeeping.

Vertices are dense integers ``0..n-1``; edges are unordered pairs stored in
canonical ``(min, max)`` form at index ``j*(j-1)//2 + i``. Component
structure is maintained by union-find on additions and recomputed lazily
after deletions (a deletion may split a component, which union-find cannot
track incrementally; at the network sizes used here a full rebuild is
cheap).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels as K

__all__ = ["DynGraph", "ComponentView", "pair_count", "pair_index", "pair_table"]


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(i: int, j: int) -> int:
    """Canonical index of the unordered pair (i, j)."""
    if i == j:
        raise ValueError("self-loops are not representable")
    return int(K.pair_index(i, j))


@lru_cache(maxsize=None)
def pair_table(n: int):
    """Endpoint lookup tables (pi, pj) with pi[k] < pj[k] for each pair index k."""
    m = pair_count(n)
    pi = np.empty(m, np.int64)
    pj = np.empty(m, np.int64)
    k = 0
    for j in range(1, n):
        for i in range(j):
            pi[k] = i
            pj[k] = j
            k += 1
    pi.setflags(write=False)
    pj.setflags(write=False)
    return pi, pj


@dataclass(frozen=True)
class ComponentView:
    """Connected-component labels (one id per vertex) and size per id."""

    labels: np.ndarray
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return len(self.sizes)


class DynGraph:
    """Undirected simple graph on ``n`` fixed vertices."""

    __slots__ = ("n", "n_pairs", "edge_flags", "m", "_labels", "_comp_sizes", "_dirty")

    def __init__(self, n: int, edges=()):
        if n < 1:
            raise ValueError("vertex count must be positive")
        self.n = int(n)
        self.n_pairs = pair_count(self.n)
        self.edge_flags = np.zeros(self.n_pairs, np.bool_)
        self.m = 0
        self._labels = np.empty(self.n, np.int64)
        self._comp_sizes = None
        self._dirty = True
        for e in edges:
            self.add_edge(e)

    # -- construction helpers ------------------------------------------------

    @classmethod
    def empty(cls, n: int) -> "DynGraph":
        return cls(n)

    @classmethod
    def complete(cls, n: int) -> "DynGraph":
        g = cls(n)
        g.edge_flags[:] = True
        g.m = g.n_pairs
        g._dirty = True
        return g

    def copy(self) -> "DynGraph":
        g = DynGraph.__new__(DynGraph)
        g.n = self.n
        g.n_pairs = self.n_pairs
        g.edge_flags = self.edge_flags.copy()
        g.m = self.m
        g._labels = np.empty(self.n, np.int64)
        g._comp_sizes = None
        g._dirty = True
        return g

    # -- basic queries ---------------------------------------------------

    def _check_pair(self, e) -> int:
        i, j = e
        if i == j or not (0 <= i < self.n) or not (0 <= j < self.n):
            raise ValueError(f"invalid vertex pair {e!r} for n={self.n}")
        return pair_index(i, j)

    def has_edge(self, e) -> bool:
        return bool(self.edge_flags[self._check_pair(e)])

    def edges(self):
        """Edge list in canonical (min, max) order."""
        pi, pj = pair_table(self.n)
        ks = np.flatnonzero(self.edge_flags)
        return [(int(pi[k]), int(pj[k])) for k in ks]

    @property
    def edge_count(self) -> int:
        return self.m

    def is_empty(self) -> bool:
        return self.m == 0

    def is_complete(self) -> bool:
        return self.m == self.n_pairs

    def density(self) -> float:
        return self.m / self.n_pairs if self.n_pairs else 0.0

    # -- mutation ----------------------------------------------------------

    def add_edge(self, e) -> None:
        k = self._check_pair(e)
        if self.edge_flags[k]:
            raise ValueError(f"edge {e!r} already present")
        self.edge_flags[k] = True
        self.m += 1
        self._dirty = True

    def remove_edge(self, e) -> None:
        k = self._check_pair(e)
        if not self.edge_flags[k]:
            raise ValueError(f"edge {e!r} not present")
        self.edge_flags[k] = False
        self.m -= 1
        self._dirty = True

    # -- components --------------------------------------------------------

    def _refresh_components(self) -> None:
        if not self._dirty:
            return
        pi, pj = pair_table(self.n)
        parent = np.empty(self.n, np.int64)
        size = np.empty(self.n, np.int64)
        ncomp = K.component_labels(self.edge_flags, self.n, pi, pj, parent, size, self._labels)
        sizes = np.zeros(int(ncomp), np.int64)
        for v in range(self.n):
            sizes[self._labels[v]] += 1
        self._comp_sizes = sizes
        self._dirty = False

    def components(self) -> ComponentView:
        self._refresh_components()
        return ComponentView(self._labels.copy(), self._comp_sizes.copy())

    def component_sizes(self):
        """Multiset of component sizes, largest first."""
        self._refresh_components()
        return tuple(sorted((int(s) for s in self._comp_sizes), reverse=True))

    def gcc_fraction(self) -> float:
        self._refresh_components()
        return int(self._comp_sizes.max()) / self.n

    def component_sizes_without_edge(self, e):
        """Component sizes of e's endpoints in the graph with e removed."""
        k = self._check_pair(e)
        if not self.edge_flags[k]:
            raise ValueError(f"edge {e!r} not present")
        pi, pj = pair_table(self.n)
        queue = np.empty(self.n, np.int64)
        visited = np.empty(self.n, np.uint8)
        sa, sb = K.split_sizes_without_edge(self.edge_flags, self.n, pi, pj, k, queue, visited)
        return int(sa), int(sb)

    # -- uniform sampling ----------------------------------------------------

    def sample_uniform_edge(self, rng):
        """Uniformly random edge; raises on the empty graph."""
        if self.m == 0:
            raise ValueError("graph has no edges to sample")
        rank = rng.randint(self.m)
        k = int(K.kth_with_status(self.edge_flags, rank, True))
        pi, pj = pair_table(self.n)
        return int(pi[k]), int(pj[k])

    def sample_uniform_nonedge(self, rng):
        """Uniformly random non-edge; raises on the complete graph."""
        free = self.n_pairs - self.m
        if free == 0:
            raise ValueError("graph is complete; no non-edges to sample")
        rank = rng.randint(free)
        k = int(K.kth_with_status(self.edge_flags, rank, False))
        pi, pj = pair_table(self.n)
        return int(pi[k]), int(pj[k])

    # -- misc ----------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, DynGraph):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.edge_flags, other.edge_flags))

    def __hash__(self):
        return hash((self.n, self.edge_flags.tobytes()))

    def __repr__(self) -> str:
        return f"DynGraph(n={self.n}, edges={self.edges()!r})"

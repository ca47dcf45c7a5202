"""Continuous-time birth-death percolation kernels (uniform and product rule).

The latent chain is a pair (W, G): W records whether the most recent
transition added (1) or deleted (0) an edge, G is the current graph.
Holding times between transitions are exponential with a single global
rate; at each transition W steps first (forced to 1 from the empty graph
and to 0 from the complete graph), then an edge is chosen by the regime's
rule and applied.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .graph import DynGraph, pair_table

__all__ = ["Regime", "ProcessParams", "LatentState", "TransitionEvent",
           "step_w", "choose_edge_er", "choose_edge_pr", "simulate_interval"]


class Regime(enum.Enum):
    ER = "er"
    PR = "pr"

    @property
    def code(self) -> int:
        return 0 if self is Regime.ER else 1

    @classmethod
    def parse(cls, text) -> "Regime":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        if key in ("er", "erdos-renyi", "uniform"):
            return cls.ER
        if key in ("pr", "product-rule", "achlioptas"):
            return cls.PR
        raise ValueError(f"unknown regime {text!r}")


@dataclass(frozen=True)
class ProcessParams:
    """Birth rate p, death rate q (need not sum to 1), event rate gamma.

    Estimation restricts p and q to the open unit interval; the closed
    endpoints are accepted here so that pure-growth chains (p=1, q=0) can
    be simulated.
    """

    p: float
    q: float
    gamma: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.q <= 1.0):
            raise ValueError(f"p and q must lie in [0, 1], got p={self.p}, q={self.q}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


@dataclass
class LatentState:
    """Hidden-chain state: last-transition direction bit and current graph."""

    w: int
    g: DynGraph

    def copy(self) -> "LatentState":
        return LatentState(self.w, self.g.copy())


@dataclass(frozen=True)
class TransitionEvent:
    time: float
    direction: int
    edge: tuple


def step_w(w_prev: int, g_prev: DynGraph, params: ProcessParams, rng) -> int:
    """Direction bit for the next transition given the current state."""
    w, state = K.step_w(np.int64(w_prev), np.int64(g_prev.m), np.int64(g_prev.n_pairs),
                        params.p, params.q, rng.state)
    rng.state = np.uint64(state)
    return int(w)


def choose_edge_er(g: DynGraph, direction: int, rng):
    """Uniform edge choice: over non-edges when adding, edges when deleting."""
    if direction == 1:
        return g.sample_uniform_nonedge(rng)
    return g.sample_uniform_edge(rng)


def choose_edge_pr(g: DynGraph, direction: int, rng):
    """Product-rule edge choice between two uniformly drawn candidates."""
    if direction == 1 and g.is_complete():
        raise ValueError("graph is complete; no non-edges to sample")
    if direction == 0 and g.is_empty():
        raise ValueError("graph has no edges to sample")
    pi, pj = pair_table(g.n)
    parent = np.empty(g.n, np.int64)
    size = np.empty(g.n, np.int64)
    queue = np.empty(g.n, np.int64)
    visited = np.empty(g.n, np.uint8)
    K.uf_build(g.edge_flags, g.n, pi, pj, parent, size)
    k, state = K.choose_edge_pr(g.edge_flags, np.int64(g.n), np.int64(g.n_pairs),
                                np.int64(g.m), pi, pj, np.int64(direction),
                                parent, size, queue, visited, rng.state)
    rng.state = np.uint64(state)
    return int(pi[k]), int(pj[k])


def simulate_interval(state: LatentState, duration: float, regime: Regime,
                      params: ProcessParams, rng, record: bool = False):
    """Evolve the chain for ``duration`` time units.

    Returns ``(new_state, event_count, events)`` where ``events`` is a list
    of :class:`TransitionEvent` when ``record`` is true and ``None``
    otherwise. Event times are relative to the interval start.
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    g = state.g.copy()
    n = g.n
    pi, pj = pair_table(n)
    parent = np.empty(n, np.int64)
    size = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    visited = np.empty(n, np.uint8)
    cap = 64 if record else 0
    while True:
        rec_dirs = np.empty(cap, np.int64)
        rec_ks = np.empty(cap, np.int64)
        rec_times = np.empty(cap, np.float64)
        edges = g.edge_flags.copy()
        w, m, r, st = K.simulate_interval_core(
            edges, np.int64(state.w), np.int64(g.m), np.int64(n), np.int64(g.n_pairs),
            pi, pj, float(duration), np.int64(regime.code),
            params.p, params.q, params.gamma, rng.state,
            record, rec_dirs, rec_ks, rec_times,
            parent, size, queue, visited)
        if record and r > cap:
            cap = int(r)
            continue  # deterministic rerun with room for every event
        break
    rng.state = np.uint64(st)
    g.edge_flags = edges
    g.m = int(m)
    g._dirty = True
    events = None
    if record:
        events = [TransitionEvent(float(rec_times[i]), int(rec_dirs[i]),
                                  (int(pi[rec_ks[i]]), int(pj[rec_ks[i]])))
                  for i in range(int(r))]
    return LatentState(int(w), g), int(r), events

"""Edgewise observation error process and its likelihood.

Each true edge is independently dropped with probability beta (type II)
and each true non-edge independently reported as an edge with probability
alpha (type I). Likelihood arithmetic is in log space throughout: a graph
on n vertices contributes n*(n-1)/2 per-pair factors, whose product
underflows linear-space floats at even modest n.
"""

import math
from dataclasses import dataclass

import numpy as np

from .graph import DynGraph

__all__ = ["NoiseParams", "ConfusionCounts", "corrupt", "confusion_counts", "obs_loglik"]


@dataclass(frozen=True)
class NoiseParams:
    """Type-I rate alpha and type-II rate beta, each in [0, 0.5).

    Rates of 0.5 and above are rejected: mirrored parameterizations give
    identical observation distributions, so the model is only identifiable
    on the restricted box. Zero is allowed for noise-free simulation.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < 0.5 and 0.0 <= self.beta < 0.5):
            raise ValueError(
                f"error rates must lie in [0, 0.5), got alpha={self.alpha}, beta={self.beta}")


@dataclass(frozen=True)
class ConfusionCounts:
    """Fourfold pair classification between a true and an observed graph."""

    a: int  # true edges observed as edges
    b: int  # true edges observed as non-edges
    c: int  # true non-edges observed as edges
    d: int  # true non-edges observed as non-edges

    @property
    def total(self) -> int:
        return self.a + self.b + self.c + self.d


def corrupt(g: DynGraph, noise: NoiseParams, rng) -> DynGraph:
    """Observe ``g`` through the error channel (independent per pair)."""
    u = rng.u01_array(g.n_pairs)
    obs = DynGraph(g.n)
    obs.edge_flags = np.where(g.edge_flags, u >= noise.beta, u < noise.alpha)
    obs.m = int(obs.edge_flags.sum())
    obs._dirty = True
    return obs


def confusion_counts(g_true: DynGraph, g_obs: DynGraph) -> ConfusionCounts:
    if g_true.n != g_obs.n:
        raise ValueError(f"vertex counts differ: {g_true.n} vs {g_obs.n}")
    t = g_true.edge_flags
    o = g_obs.edge_flags
    a = int(np.count_nonzero(t & o))
    b = int(np.count_nonzero(t & ~o))
    c = int(np.count_nonzero(~t & o))
    d = g_true.n_pairs - a - b - c
    return ConfusionCounts(a, b, c, d)


def _count_logterm(count: int, rate: float) -> float:
    if count == 0:
        return 0.0
    if rate == 0.0:
        return -math.inf
    return count * math.log(rate)


def obs_loglik(g_obs: DynGraph, g_true: DynGraph, noise: NoiseParams) -> float:
    """Log-probability of observing ``g_obs`` when the truth is ``g_true``."""
    cc = confusion_counts(g_true, g_obs)
    return (_count_logterm(cc.c, noise.alpha)
            + _count_logterm(cc.d, 1.0 - noise.alpha)
            + _count_logterm(cc.b, noise.beta)
            + _count_logterm(cc.a, 1.0 - noise.beta))

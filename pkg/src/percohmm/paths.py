"""Sample paths between latent states: pmf evaluation and MCMC sampling.

A path's probability is the Poisson mass of its length (rate gamma times
the interval) times the product of per-transition direction and
edge-choice factors. The sampler targets this pmf conditioned on both
endpoint graphs and the end direction bit, using paired insertion, paired
deletion, and permutation proposals with exact Metropolis-Hastings
ratios.
"""

from dataclasses import dataclass

import numpy as np

from . import _pathkernels as PK
from .errors import InfeasiblePathError
from .graph import pair_count, pair_table
from .process import LatentState, ProcessParams, Regime
from .rng import Rng, derive_seed

__all__ = ["SamplePath", "path_pmf_log", "initial_path", "mcmc_path_sampler"]


@dataclass(frozen=True)
class SamplePath:
    """Ordered single-edge changes; direction 1 adds the pair, 0 deletes it."""

    n: int
    dirs: np.ndarray
    pairs: np.ndarray

    @property
    def r(self) -> int:
        return len(self.dirs)

    @classmethod
    def from_changes(cls, n: int, changes) -> "SamplePath":
        dirs = np.array([d for d, _ in changes], np.int64)
        ks = np.array([(max(i, j) * (max(i, j) - 1)) // 2 + min(i, j)
                       for _, (i, j) in changes], np.int64)
        return cls(n, dirs, ks)

    @property
    def changes(self):
        pi, pj = pair_table(self.n)
        return [(int(d), (int(pi[k]), int(pj[k])))
                for d, k in zip(self.dirs, self.pairs)]

    def key(self):
        """Hashable identity, for binning paths in tests."""
        return tuple(zip((int(d) for d in self.dirs), (int(k) for k in self.pairs)))

    def end_state(self, start: LatentState) -> LatentState:
        """Replay onto a copy of the start state; raises on infeasible flips."""
        g = start.g.copy()
        w = start.w
        pi, pj = pair_table(self.n)
        for d, k in zip(self.dirs, self.pairs):
            e = (int(pi[k]), int(pj[k]))
            if d == 1:
                if g.has_edge(e):
                    raise InfeasiblePathError(f"addition of existing edge {e}")
                g.add_edge(e)
            else:
                if not g.has_edge(e):
                    raise InfeasiblePathError(f"deletion of missing edge {e}")
                g.remove_edge(e)
            w = int(d)
        return LatentState(w, g)


def _scratch(n: int, n_pairs: int):
    return (np.empty(n_pairs, np.bool_),) + tuple(np.empty(n, np.int64) for _ in range(8)) \
        + (np.empty(n_pairs, np.int64),)


def path_pmf_log(path: SamplePath, start: LatentState, duration: float,
                 params: ProcessParams, regime: Regime) -> float:
    """Log pmf of ``path`` starting from ``start`` over ``duration``."""
    n = start.g.n
    if path.n != n:
        raise ValueError("path and start state disagree on vertex count")
    n_pairs = pair_count(n)
    pi, pj = pair_table(n)
    out = PK.path_logpmf_core(path.dirs, path.pairs, np.int64(path.r),
                              start.g.edge_flags, np.int64(start.w),
                              np.int64(n), np.int64(n_pairs), pi, pj,
                              float(duration), params.p, params.q, params.gamma,
                              np.int64(regime.code), *_scratch(n, n_pairs))
    if np.isnan(out):
        raise InfeasiblePathError("path does not apply cleanly to the start graph")
    return float(out)


def initial_path(start: LatentState, end: LatentState) -> SamplePath:
    """Deterministic feasible path: symmetric-difference edges in (min, max)
    lexicographic order, plus an offsetting pair when the final direction
    would not match the end state's direction bit."""
    if start.g.n != end.g.n:
        raise ValueError("start and end states disagree on vertex count")
    n = start.g.n
    pi, pj = pair_table(n)
    diff = np.flatnonzero(start.g.edge_flags ^ end.g.edge_flags)
    ordered = sorted(int(k) for k in diff)
    ordered.sort(key=lambda k: (int(pi[k]), int(pj[k])))
    dirs = [0 if start.g.edge_flags[k] else 1 for k in ordered]
    ks = list(ordered)
    final_dir = dirs[-1] if dirs else start.w
    if final_dir != end.w:
        if end.w == 1:
            cands = np.flatnonzero(end.g.edge_flags)
            if len(cands) == 0:
                raise InfeasiblePathError(
                    "no feasible path: end state wants a final addition on an empty graph")
            e = min((int(k) for k in cands), key=lambda k: (int(pi[k]), int(pj[k])))
            dirs += [0, 1]
        else:
            cands = np.flatnonzero(~end.g.edge_flags)
            if len(cands) == 0:
                raise InfeasiblePathError(
                    "no feasible path: end state wants a final deletion on a complete graph")
            e = min((int(k) for k in cands), key=lambda k: (int(pi[k]), int(pj[k])))
            dirs += [1, 0]
        ks += [e, e]
    return SamplePath(n, np.array(dirs, np.int64), np.array(ks, np.int64))


def _run_chain(start: LatentState, end: LatentState, duration: float,
               params: ProcessParams, regime: Regime, n_samples: int,
               burn_in, thin: int, seed: int):
    init = initial_path(start, end)
    if burn_in is None:
        burn_in = 10 * (init.r + 1)
    if n_samples < 1 or thin < 1 or burn_in < 0:
        raise ValueError("need n_samples >= 1, thin >= 1, burn_in >= 0")
    n = start.g.n
    pi, pj = pair_table(n)
    return init, PK.mcmc_chain(start.g.edge_flags, np.int64(start.w), np.int64(end.w),
                               init.dirs, init.pairs,
                               np.int64(n), np.int64(pair_count(n)), pi, pj,
                               float(duration), params.p, params.q, params.gamma,
                               np.int64(regime.code), np.int64(n_samples),
                               np.int64(burn_in), np.int64(thin), np.uint64(seed))


def mcmc_path_sampler(start: LatentState, end: LatentState, duration: float,
                      params: ProcessParams, regime: Regime, n_samples: int,
                      rng: Rng, burn_in=None, thin: int = 5,
                      check: bool = True):
    """Sample paths conditioned on both endpoints.

    Returns ``n_samples`` thinned draws as :class:`SamplePath`. With
    ``check`` each draw is replayed and verified to reproduce the end
    state.
    """
    seed = derive_seed(int(rng.state), 17)
    rng.u01()
    _, (flat_dirs, flat_ks, offsets, _stats, _acc) = _run_chain(
        start, end, duration, params, regime, n_samples, burn_in, thin, seed)
    n = start.g.n
    paths = []
    for i in range(n_samples):
        lo, hi = int(offsets[i]), int(offsets[i + 1])
        path = SamplePath(n, flat_dirs[lo:hi].copy(), flat_ks[lo:hi].copy())
        if check:
            got = path.end_state(start)
            if got.g != end.g or (path.r > 0 and got.w != end.w) \
                    or (path.r == 0 and start.w != end.w):
                raise InfeasiblePathError("sampled path does not reproduce the end state")
        paths.append(path)
    return paths

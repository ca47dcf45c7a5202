"""Sequential Monte Carlo over the latent percolation chain.

The cloud at the first observation time is B copies of the error-free
conditioning state (w=1, first observed graph). At each later time,
ancestors are drawn multinomially with weights proportional to the
observation likelihood and propagated by simulating the process over the
inter-observation interval. Ancestral lines traced back from weighted
terminal draws are smoothing samples of the latent sequence.

Per-particle propagation seeds are derived from the caller's stream by
(position, particle) index, so results do not depend on execution order.
"""

import math

import numpy as np

from . import _kernels as K
from .graph import DynGraph, pair_count, pair_table
from .process import LatentState
from .rng import Rng, derive_seed, spawn_seeds

__all__ = ["ParticleCloud", "particle_filter", "draw_ancestral_lines"]

_TAG_RESAMPLE = 101
_TAG_PROPAGATE = 102
_TAG_LINES = 103


class ParticleCloud:
    """Bit-packed particle histories with ancestor indices.

    ``words[m, b]`` holds particle b's graph at observation position m
    (position 0 is the first observation time); ``ancestors[m, b]`` is the
    index of its parent in position m-1 (-1 on the first row). The
    ``log_increments`` entry at position m is log of the mean observation
    weight there, so their sum is the forward log-likelihood estimate.
    """

    def __init__(self, times, n, words, wbits, ancestors, r_counts,
                 log_increments, terminal_logw, obs_words):
        self.times = times
        self.n = n
        self.words = words
        self.wbits = wbits
        self.ancestors = ancestors
        self.r_counts = r_counts
        self.log_increments = log_increments
        self.terminal_logw = terminal_logw
        self.obs_words = obs_words

    @property
    def n_obs(self) -> int:
        return self.words.shape[0]

    @property
    def n_particles(self) -> int:
        return self.words.shape[1]

    def particle(self, pos: int, b: int) -> LatentState:
        g = DynGraph(self.n)
        K.unpack_edges(self.words[pos, b], g.edge_flags)
        g.m = int(g.edge_flags.sum())
        g._dirty = True
        return LatentState(int(self.wbits[pos, b]), g)

    def forward_loglik(self) -> float:
        return float(self.log_increments.sum())


def _pack_graph(g: DynGraph, n_words: int) -> np.ndarray:
    out = np.zeros(n_words, np.uint64)
    K.pack_edges(g.edge_flags, out)
    return out


def _obs_weights(words, obs_words, n_pairs, noise, out):
    la = math.log(noise.alpha) if noise.alpha > 0 else -math.inf
    lb = math.log(noise.beta) if noise.beta > 0 else -math.inf
    K.obs_logweights(words, obs_words, np.int64(n_pairs),
                     la, math.log(1.0 - noise.alpha), lb, math.log(1.0 - noise.beta), out)


def _filter_impl(series, params, regime, n_particles: int, root: int, keep_history: bool):
    """Shared filter loop; history storage is optional so the forward
    likelihood can run with particle counts too large to keep per-time."""
    if n_particles < 1:
        raise ValueError("need at least one particle")
    M = len(series)
    n = series.n
    n_pairs = pair_count(n)
    n_words = (n_pairs + 63) // 64
    pi, pj = pair_table(n)
    proc = params.process
    noise = params.noise

    obs_words = np.stack([_pack_graph(g, n_words) for g in series.snapshots])
    log_inc = np.zeros(M)
    if keep_history:
        words = np.zeros((M, n_particles, n_words), np.uint64)
        wbits = np.zeros((M, n_particles), np.uint8)
        ancestors = np.full((M, n_particles), -1, np.int32)
        r_counts = np.zeros((M, n_particles), np.int32)
        words[0, :, :] = _pack_graph(series.snapshots[0], n_words)[None, :]
        wbits[0, :] = 1
    else:
        words = np.zeros((2, n_particles, n_words), np.uint64)
        wbits = np.zeros((2, n_particles), np.uint8)
        ancestors = np.full((2, n_particles), -1, np.int32)
        r_counts = np.zeros((2, n_particles), np.int32)
        words[0, :, :] = _pack_graph(series.snapshots[0], n_words)[None, :]
        wbits[0, :] = 1

    logw = np.empty(n_particles)
    idx = np.empty(n_particles, np.int32)
    _obs_weights(words[0], obs_words[0], n_pairs, noise, logw)
    for pos in range(1, M):
        cur = pos if keep_history else pos % 2
        prev = pos - 1 if keep_history else (pos - 1) % 2
        st = K.resample_multinomial(logw, np.int64(n_particles),
                                    np.uint64(derive_seed(root, _TAG_RESAMPLE, pos)), idx)
        if keep_history:
            ancestors[pos] = idx
        seeds = spawn_seeds(root, n_particles, _TAG_PROPAGATE, pos)
        dt = float(series.times[pos] - series.times[pos - 1])
        K.propagate_cloud(words[prev], wbits[prev], idx,
                          words[cur], wbits[cur], r_counts[cur],
                          np.int64(n), np.int64(n_pairs), pi, pj, dt,
                          np.int64(regime.code), proc.p, proc.q, proc.gamma, seeds)
        _obs_weights(words[cur], obs_words[pos], n_pairs, noise, logw)
        log_inc[pos] = K.logmeanexp(logw)

    if not keep_history:
        return None, log_inc
    cloud = ParticleCloud(np.asarray(series.times, float), n, words, wbits,
                          ancestors, r_counts, log_inc, logw.copy(), obs_words)
    return cloud, log_inc


def particle_filter(series, params, regime, n_particles: int, rng: Rng) -> ParticleCloud:
    """Run the filter over a series; ``params`` bundles process and noise."""
    root = int(rng.state)
    rng.u01()  # advance the caller's stream so repeated calls differ
    cloud, _ = _filter_impl(series, params, regime, n_particles, root, True)
    return cloud


def filter_loglik(series, params, regime, n_particles: int, rng: Rng) -> float:
    """Forward log-likelihood estimate without storing particle history."""
    root = int(rng.state)
    rng.u01()
    _, log_inc = _filter_impl(series, params, regime, n_particles, root, False)
    return float(log_inc.sum())


def trace_line_indices(cloud: ParticleCloud, terminal_index: int) -> np.ndarray:
    """Particle index at each position 1..M-1 along one ancestral line."""
    M = cloud.n_obs
    out = np.empty(M, np.int64)
    idx = int(terminal_index)
    for m in range(M - 1, 0, -1):
        out[m] = idx
        idx = int(cloud.ancestors[m, idx])
    out[0] = idx
    return out[1:]


def draw_ancestral_lines(cloud: ParticleCloud, g_obs_last: DynGraph, noise,
                         count: int, rng: Rng):
    """Sample ``count`` smoothing lines; each is [LatentState] at positions 1..M-1.

    Terminal particles are drawn with probability proportional to their
    observation weight at the last time; the rest of each line is the
    terminal particle's unique ancestor chain.
    """
    n_pairs = pair_count(cloud.n)
    n_words = cloud.words.shape[2]
    obs = _pack_graph(g_obs_last, n_words)
    logw = np.empty(cloud.n_particles)
    _obs_weights(cloud.words[-1], obs, n_pairs, noise, logw)
    term = np.empty(count, np.int32)
    st = K.resample_multinomial(logw, np.int64(count),
                                np.uint64(derive_seed(int(rng.state), _TAG_LINES)), term)
    rng.u01()
    lines = []
    for i in range(count):
        idxs = trace_line_indices(cloud, int(term[i]))
        lines.append([cloud.particle(m + 1, int(idxs[m])) for m in range(len(idxs))])
    return lines

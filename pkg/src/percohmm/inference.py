"""EM estimation of the five model parameters from an observed series.

Each iteration runs the particle filter at the current parameters, draws
smoothing lines from the cloud, interpolates every consecutive pair of
line states with MCMC-sampled paths to get Monte Carlo transition
statistics, draws a fresh (larger) batch of lines for the error-rate
confusion totals, and applies the closed-form M-step. Iteration stops when
the relative L2 change of the parameter vector drops below the tolerance.

Estimation conditions on the first observation being the true state with
direction bit 1, so parameters describe the dynamics only.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from . import _pathkernels as PK
from .errors import NumericalError
from .filtering import draw_ancestral_lines, particle_filter
from .graph import pair_count
from .noise import NoiseParams, confusion_counts
from .paths import _run_chain
from .process import LatentState, ProcessParams, Regime
from .rng import Rng, derive_seed

__all__ = ["ModelParams", "SufficientStats", "EmConfig", "EmDiagnostics",
           "accumulate_stats", "m_step", "em_fit", "default_init"]

# The open-box clamps keep M-step outputs interior. The rate clamp is
# deliberately loose: a birth or death rate pinned tighter (say 1-1e-6)
# makes the opposite transition's path factor effectively zero, the
# augmentation then never samples such a step, and the boundary becomes
# absorbing for the EM iteration.
_CLAMP_RATE = 1e-2
_CLAMP_NOISE = 1e-4
_CLAMP_GAMMA = 1e-6
_TAG_FILTER = 1
_TAG_HLINES = 2
_TAG_MCMC = 3
_TAG_PSI = 4


@dataclass(frozen=True)
class ModelParams:
    """Process parameters (p, q, gamma) plus error rates (alpha, beta)."""

    process: ProcessParams
    noise: NoiseParams

    def as_vector(self) -> np.ndarray:
        return np.array([self.process.p, self.process.q, self.process.gamma,
                         self.noise.alpha, self.noise.beta])

    @classmethod
    def from_vector(cls, v) -> "ModelParams":
        return cls(ProcessParams(float(v[0]), float(v[1]), float(v[2])),
                   NoiseParams(float(v[3]), float(v[4])))

    def to_dict(self) -> dict:
        return {"p": self.process.p, "q": self.process.q, "gamma": self.process.gamma,
                "alpha": self.noise.alpha, "beta": self.noise.beta}


def default_init(series=None) -> ModelParams:
    """Interior starting point: rates at 0.5, error rates just inside the
    identifiable box (0.5 itself sits on its boundary).

    Given a series, the event rate starts at the observed flip rate (total
    symmetric difference between consecutive snapshots over the total
    duration). Observation noise inflates this, but overestimating is the
    safe direction: a rate started too low makes the first augmented paths
    minimal (pure shortest interpolations), which drives the birth-rate
    estimate onto the boundary and can strand the iteration there.
    """
    gamma0 = 0.5
    if series is not None and len(series) >= 2:
        flips = sum(int(np.count_nonzero(a.edge_flags ^ b.edge_flags))
                    for a, b in zip(series.snapshots, series.snapshots[1:]))
        gamma0 = max(flips / series.duration, 0.5)
    return ModelParams(ProcessParams(0.5, 0.5, gamma0), NoiseParams(0.45, 0.45))


@dataclass
class SufficientStats:
    """Expected augmented-data statistics for one M-step.

    Transition counts are expectations over lines and paths; confusion
    totals are expectations over lines, summed over observations 2..M.
    """

    r_total: float = 0.0
    n01: float = 0.0
    from0: float = 0.0
    n10: float = 0.0
    from1: float = 0.0
    conf_a: float = 0.0
    conf_b: float = 0.0
    conf_c: float = 0.0
    conf_d: float = 0.0


def _path_stats_array(path, start: LatentState) -> np.ndarray:
    out = np.empty(5, np.float64)
    PK.path_stats(path.dirs, path.pairs, np.int64(path.r), np.int64(start.w),
                  np.int64(start.g.m), np.int64(start.g.n_pairs), out)
    return out


def accumulate_stats(lines, paths_per_segment, series) -> SufficientStats:
    """Combine sampled lines and their interpolating paths into statistics.

    ``lines[h]`` holds the latent states at observation positions 1..M-1;
    ``paths_per_segment[h][m-1]`` the sampled paths for the segment ending
    at position m. Path statistics are averaged per segment, summed over
    segments, and averaged over lines; confusion counts come from the same
    lines against the observed snapshots.
    """
    if not lines:
        raise ValueError("need at least one line")
    n_lines = len(lines)
    agg = np.zeros(5)
    conf = np.zeros(4)
    for line, seg_paths in zip(lines, paths_per_segment):
        states = [LatentState(1, series.snapshots[0])] + list(line)
        for m in range(1, len(states)):
            paths = seg_paths[m - 1]
            if not paths:
                raise ValueError(f"segment {m} has no sampled paths")
            seg = np.zeros(5)
            for path in paths:
                seg += _path_stats_array(path, states[m - 1])
            agg += seg / len(paths)
        for m in range(1, len(states)):
            cc = confusion_counts(states[m].g, series.snapshots[m])
            conf += (cc.a, cc.b, cc.c, cc.d)
    agg /= n_lines
    conf /= n_lines
    return SufficientStats(r_total=agg[0], n01=agg[1], from0=agg[2],
                           n10=agg[3], from1=agg[4],
                           conf_a=conf[0], conf_b=conf[1], conf_c=conf[2], conf_d=conf[3])


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


def m_step(stats: SufficientStats, duration: float, prev: ModelParams):
    """Closed-form parameter update; zero denominators keep the previous
    value and are reported in the returned list."""
    held = []
    if duration <= 0:
        raise NumericalError("series duration must be positive")
    gamma = stats.r_total / duration
    if gamma <= 0:
        held.append("gamma")
        gamma = prev.process.gamma
    if stats.from0 > 0:
        p = stats.n01 / stats.from0
    else:
        held.append("p")
        p = prev.process.p
    if stats.from1 > 0:
        q = stats.n10 / stats.from1
    else:
        held.append("q")
        q = prev.process.q
    if stats.conf_c + stats.conf_d > 0:
        alpha = stats.conf_c / (stats.conf_c + stats.conf_d)
    else:
        held.append("alpha")
        alpha = prev.noise.alpha
    if stats.conf_a + stats.conf_b > 0:
        beta = stats.conf_b / (stats.conf_a + stats.conf_b)
    else:
        held.append("beta")
        beta = prev.noise.beta
    params = ModelParams(
        ProcessParams(_clamp(p, _CLAMP_RATE, 1 - _CLAMP_RATE),
                      _clamp(q, _CLAMP_RATE, 1 - _CLAMP_RATE),
                      max(gamma, _CLAMP_GAMMA)),
        NoiseParams(_clamp(alpha, _CLAMP_NOISE, 0.5 - _CLAMP_NOISE),
                    _clamp(beta, _CLAMP_NOISE, 0.5 - _CLAMP_NOISE)))
    return params, held


@dataclass
class EmConfig:
    n_particles: int = 50_000
    h_lines: int = 10
    d_paths: int = 10
    psi_lines: int = 40_000
    max_iters: int = 20
    min_iters: int = 3
    tol: float = 0.10
    burn_in: int = None
    thin: int = 5
    init: ModelParams = None


@dataclass
class EmDiagnostics:
    trace: list = field(default_factory=list)
    rel_changes: list = field(default_factory=list)
    held: list = field(default_factory=list)
    converged: bool = False
    n_iters: int = 0
    seconds: float = 0.0


def _process_stats_for_line(series, line, params, regime, config, seed_root, it, h):
    """Per-segment MCMC path statistics summed over segments for one line."""
    states = [LatentState(1, series.snapshots[0])] + list(line)
    agg = np.zeros(5)
    for m in range(1, len(states)):
        dt = float(series.times[m] - series.times[m - 1])
        seed = derive_seed(seed_root, _TAG_MCMC, it, h, m)
        _, (_fd, _fk, _offs, stats, _acc) = _run_chain(
            states[m - 1], states[m], dt, params.process, regime,
            config.d_paths, config.burn_in, config.thin, seed)
        agg += stats.mean(axis=0)
    return agg


def em_fit(series, regime: Regime, config: EmConfig = None, rng: Rng = None):
    """Maximum-likelihood fit; returns (ModelParams, EmDiagnostics)."""
    if config is None:
        config = EmConfig()
    if rng is None:
        rng = Rng(0)
    if len(series) < 2:
        raise ValueError("estimation needs at least two observations")
    t0 = time.time()
    root = int(rng.state)
    rng.u01()
    params = config.init if config.init is not None else default_init(series)
    diag = EmDiagnostics()
    n_pairs = pair_count(series.n)
    for it in range(config.max_iters):
        cloud = particle_filter(series, params, regime, config.n_particles,
                                Rng._from_state(derive_seed(root, _TAG_FILTER, it)))
        lines = draw_ancestral_lines(cloud, series.snapshots[-1], params.noise,
                                     config.h_lines,
                                     Rng._from_state(derive_seed(root, _TAG_HLINES, it)))
        agg = np.zeros(5)
        for h, line in enumerate(lines):
            agg += _process_stats_for_line(series, line, params, regime, config, root, it, h)
        agg /= len(lines)
        a_sum, b_sum, c_sum, d_sum, _st = K.line_confusion_totals(
            cloud.words, cloud.ancestors, cloud.obs_words, cloud.terminal_logw,
            np.int64(n_pairs), np.int64(config.psi_lines),
            np.uint64(derive_seed(root, _TAG_PSI, it)))
        stats = SufficientStats(
            r_total=agg[0], n01=agg[1], from0=agg[2], n10=agg[3], from1=agg[4],
            conf_a=a_sum / config.psi_lines, conf_b=b_sum / config.psi_lines,
            conf_c=c_sum / config.psi_lines, conf_d=d_sum / config.psi_lines)
        new_params, held = m_step(stats, series.duration, params)
        old_vec = params.as_vector()
        new_vec = new_params.as_vector()
        rel = float(np.linalg.norm(new_vec - old_vec) / np.linalg.norm(old_vec))
        diag.trace.append(new_vec)
        diag.rel_changes.append(rel)
        if held:
            diag.held.append((it, held))
        params = new_params
        diag.n_iters = it + 1
        if rel < config.tol and it + 1 >= config.min_iters:
            diag.converged = True
            break
    diag.seconds = time.time() - t0
    return params, diag

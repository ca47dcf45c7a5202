"""Exact machinery for tiny vertex counts (n <= 4).

Everything here works on bitmask-encoded graphs (bit k set iff canonical
pair k is an edge) with plain Python arithmetic, independently of the
compiled kernels, so these routines double as oracles in the test suite:

* the embedded one-step transition kernel, optionally with symbolic birth
  and death rates,
* the interval transition kernel as a Poisson-weighted power series,
* exact forward likelihood and smoothing for an observed series,
* exhaustive enumeration of sample paths with probabilities and
  per-parameter score contributions.

The state space for a fixed n is {0,1} x {all graphs}; state (w, mask) has
index ``w * 2**n_pairs + mask``.
"""

import math
from fractions import Fraction

import numpy as np

from .graph import DynGraph, pair_count, pair_table
from .process import ProcessParams, Regime

__all__ = [
    "state_index", "state_space", "mask_of_graph", "graph_of_mask",
    "exact_embedded_kernel", "exact_interval_kernel",
    "forward_loglik_exact", "smoothing_exact",
    "enumerate_paths", "path_logprob_exact",
    "expected_total_score", "partial_score_fd",
]

_MAX_N = 4


def _check_n(n: int) -> int:
    if n > _MAX_N:
        raise ValueError(f"exact state-space enumeration supports n <= {_MAX_N}, got {n}")
    return pair_count(n)


def state_index(w: int, mask: int, n: int) -> int:
    return w * (1 << pair_count(n)) + mask


def state_space(n: int):
    """All (w, mask) states in index order."""
    n_masks = 1 << _check_n(n)
    return [(w, mask) for w in (0, 1) for mask in range(n_masks)]


def mask_of_graph(g: DynGraph) -> int:
    mask = 0
    for k in np.flatnonzero(g.edge_flags):
        mask |= 1 << int(k)
    return mask


def graph_of_mask(n: int, mask: int) -> DynGraph:
    pi, pj = pair_table(n)
    return DynGraph(n, [(int(pi[k]), int(pj[k])) for k in range(pair_count(n)) if mask >> k & 1])


def _component_sizes(mask: int, n: int):
    """Size of the component containing each vertex."""
    pi, pj = pair_table(n)
    label = [-1] * n
    sizes = []
    for v0 in range(n):
        if label[v0] != -1:
            continue
        cid = len(sizes)
        stack = [v0]
        label[v0] = cid
        count = 0
        while stack:
            v = stack.pop()
            count += 1
            for u in range(n):
                if u == v or label[u] != -1:
                    continue
                k = (max(u, v) * (max(u, v) - 1)) // 2 + min(u, v)
                if mask >> k & 1:
                    label[u] = cid
                    stack.append(u)
        sizes.append(count)
    return [sizes[label[v]] for v in range(n)]


def _h_value(w2: int, w1: int, m_edges: int, n_pairs: int, p, q):
    if m_edges == 0:
        return 1 if w2 == 1 else 0
    if m_edges == n_pairs:
        return 1 if w2 == 0 else 0
    if w1 == 0:
        return p if w2 == 1 else 1 - p
    return 1 - q if w2 == 1 else q


def _pr_products_add(mask: int, n: int, n_pairs: int):
    """Map pair index -> product of endpoint component sizes, for non-edges."""
    pi, pj = pair_table(n)
    comp = _component_sizes(mask, n)
    return {k: comp[pi[k]] * comp[pj[k]]
            for k in range(n_pairs) if not mask >> k & 1}


def _pr_products_del(mask: int, n: int, n_pairs: int):
    """Pair index -> product of endpoint component sizes with that edge absent."""
    pi, pj = pair_table(n)
    out = {}
    for k in range(n_pairs):
        if mask >> k & 1:
            comp = _component_sizes(mask & ~(1 << k), n)
            out[k] = comp[pi[k]] * comp[pj[k]]
    return out


def _edge_choice_prob(mask: int, w2: int, k: int, n: int, n_pairs: int, regime: Regime):
    """Probability that the regime flips pair k given direction w2 (exact Fraction)."""
    if w2 == 1:
        candidates = [c for c in range(n_pairs) if not mask >> c & 1]
    else:
        candidates = [c for c in range(n_pairs) if mask >> c & 1]
    kk = len(candidates)
    if k not in candidates:
        return Fraction(0)
    if regime is Regime.ER:
        return Fraction(1, kk)
    if kk == 1:
        return Fraction(1)
    prods = (_pr_products_add if w2 == 1 else _pr_products_del)(mask, n, n_pairs)
    mine = prods[k]
    n_gt = sum(1 for c in candidates if c != k and prods[c] > mine)
    n_lt = sum(1 for c in candidates if c != k and prods[c] < mine)
    n_eq = kk - 1 - n_gt - n_lt
    if w2 == 1:
        # addition keeps the smaller product; ties go to the second draw
        wins = 2 * n_gt + n_eq
    else:
        # deletion removes the larger product; ties go to the first draw
        wins = 2 * n_lt + n_eq
    return Fraction(wins, kk * (kk - 1))


def _unpack_params(params):
    if isinstance(params, ProcessParams):
        return params.p, params.q, params.gamma
    p, q = params[0], params[1]
    gamma = params[2] if len(params) > 2 else None
    return p, q, gamma


def exact_embedded_kernel(n: int, regime: Regime = Regime.ER, params=(0.5, 0.5)):
    """One-step kernel f(g2, w2 | g1, w1) over the full (w, mask) state space.

    ``params`` may be a ProcessParams or a (p, q[, gamma]) tuple; symbolic
    p and q (e.g. sympy symbols) yield an object-dtype matrix with exact
    rational edge-choice factors.
    """
    n_pairs = _check_n(n)
    p, q, _ = _unpack_params(params)
    n_states = 2 * (1 << n_pairs)
    symbolic = not isinstance(p, (int, float)) or not isinstance(q, (int, float))
    mat = np.zeros((n_states, n_states), dtype=object if symbolic else np.float64)
    for w1 in (0, 1):
        for mask in range(1 << n_pairs):
            row = state_index(w1, mask, n)
            m_edges = bin(mask).count("1")
            for w2 in (0, 1):
                hv = _h_value(w2, w1, m_edges, n_pairs, p, q)
                if hv == 0:
                    continue
                for k in range(n_pairs):
                    present = bool(mask >> k & 1)
                    if present == (w2 == 1):
                        continue
                    gp = _edge_choice_prob(mask, w2, k, n, n_pairs, regime)
                    if gp == 0:
                        continue
                    col = state_index(w2, mask ^ (1 << k), n)
                    value = hv * gp if symbolic else float(gp) * hv
                    mat[row, col] += value
    return mat


def _poisson_terms(lam: float, r_max, tol: float):
    """Poisson pmf values 0..r_max (r_max resolved from the tail bound if None)."""
    terms = [math.exp(-lam)]
    if r_max is None:
        total = terms[0]
        r = 0
        while 1.0 - total > tol and r < 2000:
            r += 1
            terms.append(terms[-1] * lam / r)
            total += terms[-1]
    else:
        for r in range(1, r_max + 1):
            terms.append(terms[-1] * lam / r)
    return terms


def exact_interval_kernel(n: int, regime: Regime, params, duration: float,
                          r_max=None, tol: float = 1e-12):
    """Transition kernel over an interval: Poisson mixture of embedded powers."""
    p, q, gamma = _unpack_params(params)
    if gamma is None:
        raise ValueError("interval kernel requires gamma")
    kern = exact_embedded_kernel(n, regime, (p, q)).astype(np.float64)
    terms = _poisson_terms(gamma * duration, r_max, tol)
    out = np.eye(kern.shape[0]) * terms[0]
    power = np.eye(kern.shape[0])
    for r in range(1, len(terms)):
        power = power @ kern
        out += terms[r] * power
    return out


def _emission_vector(n: int, obs_mask: int, alpha: float, beta: float) -> np.ndarray:
    """P(observed mask | true mask) over all true masks (linear space)."""
    n_pairs = pair_count(n)
    full = (1 << n_pairs) - 1
    out = np.empty(1 << n_pairs, np.float64)
    for mask in range(1 << n_pairs):
        a = bin(mask & obs_mask).count("1")
        b = bin(mask & ~obs_mask & full).count("1")
        c = bin(~mask & obs_mask & full).count("1")
        d = n_pairs - a - b - c
        out[mask] = (alpha ** c) * ((1 - alpha) ** d) * (beta ** b) * ((1 - beta) ** a)
    return out


def forward_loglik_exact(times, obs_masks, n: int, regime: Regime,
                         p, q, gamma, alpha, beta,
                         init_w: int = 1, init_mask=None,
                         r_max=None, tol: float = 1e-12) -> float:
    """log P(observations at times[1:] | initial latent state) by exact forward
    recursion; the first observation is the error-free conditioning state."""
    n_pairs = _check_n(n)
    if init_mask is None:
        init_mask = obs_masks[0]
    n_states = 2 * (1 << n_pairs)
    v = np.zeros(n_states)
    v[state_index(init_w, init_mask, n)] = 1.0
    loglik = 0.0
    for m in range(1, len(times)):
        kern = exact_interval_kernel(n, regime, (p, q, gamma),
                                     float(times[m] - times[m - 1]), r_max, tol)
        v = v @ kern
        emis = _emission_vector(n, obs_masks[m], alpha, beta)
        v = v * np.concatenate([emis, emis])
        step = v.sum()
        if step <= 0.0:
            return -math.inf
        loglik += math.log(step)
        v /= step
    return loglik


def smoothing_exact(times, obs_masks, n: int, regime: Regime,
                    p, q, gamma, alpha, beta,
                    init_w: int = 1, init_mask=None,
                    r_max=None, tol: float = 1e-12):
    """Exact joint posterior over the latent sequence at times[1:].

    Returns a dict mapping tuples of (w, mask) states to probabilities.
    Exponential in the series length; intended for 2-3 observations.
    """
    n_pairs = _check_n(n)
    if init_mask is None:
        init_mask = obs_masks[0]
    states = state_space(n)
    kerns = [exact_interval_kernel(n, regime, (p, q, gamma),
                                   float(times[m] - times[m - 1]), r_max, tol)
             for m in range(1, len(times))]
    emis = [_emission_vector(n, obs_masks[m], alpha, beta) for m in range(1, len(times))]
    start = state_index(init_w, init_mask, n)
    probs = {}

    def recurse(pos, prev_idx, seq, weight):
        if pos == len(kerns):
            if weight > 0.0:
                probs[tuple(seq)] = probs.get(tuple(seq), 0.0) + weight
            return
        for idx, (w, mask) in enumerate(states):
            wgt = weight * kerns[pos][prev_idx, idx] * emis[pos][mask]
            if wgt > 0.0:
                recurse(pos + 1, idx, seq + [(w, mask)], wgt)

    recurse(0, start, [], 1.0)
    total = sum(probs.values())
    return {seq: w / total for seq, w in probs.items()}


def enumerate_paths(n: int, start_mask: int, r_max: int):
    """All edge-flip sequences of length <= r_max from a start graph.

    Yields (dirs, ks, end_mask); each step's direction is determined by the
    flipped pair's presence, so branching is one per vertex pair.
    """
    n_pairs = _check_n(n)

    def recurse(mask, dirs, ks):
        yield tuple(dirs), tuple(ks), mask
        if len(dirs) == r_max:
            return
        for k in range(n_pairs):
            dirs.append(0 if mask >> k & 1 else 1)
            ks.append(k)
            yield from recurse(mask ^ (1 << k), dirs, ks)
            dirs.pop()
            ks.pop()

    yield from recurse(start_mask, [], [])


def path_logprob_exact(dirs, ks, start_w: int, start_mask: int, n: int,
                       regime: Regime, p: float, q: float, gamma: float,
                       duration: float) -> float:
    """Sample-path log-probability via embedded-kernel factors plus the
    Poisson mass for the transition count (independent of the fast path)."""
    n_pairs = _check_n(n)
    r = len(dirs)
    if r == 0:
        return -gamma * duration
    if duration == 0.0:
        return -math.inf
    logp = -gamma * duration + r * math.log(gamma * duration) - math.lgamma(r + 1)
    w = start_w
    mask = start_mask
    for step in range(r):
        k = ks[step]
        w2 = dirs[step]
        m_edges = bin(mask).count("1")
        hv = _h_value(w2, w, m_edges, n_pairs, p, q)
        gp = _edge_choice_prob(mask, w2, k, n, n_pairs, regime)
        factor = float(hv) * float(gp)
        if factor <= 0.0:
            return -math.inf
        logp += math.log(factor)
        mask ^= 1 << k
        w = w2
    return logp


def _path_score(dirs, ks, start_w: int, start_mask: int, n_pairs: int,
                p: float, q: float, gamma: float, duration: float):
    """Closed-form total-data score contributions (d/dp, d/dq, d/dgamma)."""
    sp = 0.0
    sq = 0.0
    w = start_w
    mask = start_mask
    for step in range(len(dirs)):
        m_edges = bin(mask).count("1")
        if 0 < m_edges < n_pairs:  # transitions out of empty/complete are forced
            if w == 0:
                sp += 1.0 / p if dirs[step] == 1 else -1.0 / (1.0 - p)
            else:
                sq += 1.0 / q if dirs[step] == 0 else -1.0 / (1.0 - q)
        mask ^= 1 << ks[step]
        w = dirs[step]
    sg = len(dirs) / gamma - duration
    return sp, sq, sg


def expected_total_score(n: int, regime: Regime, params, latent_seq, times,
                         r_max: int = 10) -> np.ndarray:
    """Expectation of the total-data score over all interpolating paths.

    ``latent_seq`` is the list of (w, mask) states at the observation
    times. Paths are enumerated exhaustively up to length ``r_max`` per
    interval; returns the summed (d/dp, d/dq, d/dgamma) score.
    """
    n_pairs = _check_n(n)
    p, q, gamma = _unpack_params(params)
    total = np.zeros(3)
    for m in range(1, len(latent_seq)):
        w0, mask0 = latent_seq[m - 1]
        w1, mask1 = latent_seq[m]
        dt = float(times[m] - times[m - 1])
        norm = 0.0
        acc = np.zeros(3)
        for dirs, ks, end_mask in enumerate_paths(n, mask0, r_max):
            if end_mask != mask1:
                continue
            end_w = dirs[-1] if dirs else w0
            if end_w != w1:
                continue
            logp = path_logprob_exact(dirs, ks, w0, mask0, n, regime, p, q, gamma, dt)
            if logp == -math.inf:
                continue
            weight = math.exp(logp)
            sc = _path_score(dirs, ks, w0, mask0, n_pairs, p, q, gamma, dt)
            norm += weight
            acc += weight * np.asarray(sc)
        if norm <= 0.0:
            raise ValueError(f"no feasible path within r_max={r_max} for interval {m}")
        total += acc / norm
    return total


def partial_score_fd(n: int, regime: Regime, params, latent_seq, times,
                     r_max=None, tol: float = 1e-12, step: float = 1e-5) -> np.ndarray:
    """Score of the latent-sequence likelihood by central finite differences."""
    p, q, gamma = _unpack_params(params)

    def loglik(pp, qq, gg):
        total = 0.0
        for m in range(1, len(latent_seq)):
            dt = float(times[m] - times[m - 1])
            kern = exact_interval_kernel(n, regime, (pp, qq, gg), dt, r_max, tol)
            w0, mask0 = latent_seq[m - 1]
            w1, mask1 = latent_seq[m]
            total += math.log(kern[state_index(w0, mask0, n), state_index(w1, mask1, n)])
        return total

    out = np.empty(3)
    for i, (base, name) in enumerate(((p, "p"), (q, "q"), (gamma, "gamma"))):
        h = step * max(1.0, abs(base))
        args_hi = [p, q, gamma]
        args_lo = [p, q, gamma]
        args_hi[i] = base + h
        args_lo[i] = base - h
        out[i] = (loglik(*args_hi) - loglik(*args_lo)) / (2 * h)
    return out

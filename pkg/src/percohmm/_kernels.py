"""Hot kernels: flat-array graph state, process simulation, filter primitives.

Graphs are boolean vectors over the ``n*(n-1)/2`` canonical vertex pairs
(pair ``(i, j)``, ``i < j``, lives at index ``j*(j-1)//2 + i``). Particle
clouds store graphs bit-packed into uint64 words; the event loops unpack
into a boolean scratch vector per particle. Everything here is
numba-compatible and compiled when the backend is active.
"""

import math

import numpy as np

from .backend import jit
from .rng import exponential, randint, u01

ER = 0
PR = 1


@jit
def pair_index(i, j):
    if i > j:
        i, j = j, i
    return (j * (j - 1)) // 2 + i


@jit
def popcount64(x):
    x = np.uint64(x)
    c = 0
    while x != np.uint64(0):
        x &= x - np.uint64(1)
        c += 1
    return c


@jit
def pack_edges(edges, words):
    for w in range(words.shape[0]):
        words[w] = np.uint64(0)
    for k in range(edges.shape[0]):
        if edges[k]:
            words[k >> 6] |= np.uint64(1) << np.uint64(k & 63)


@jit
def unpack_edges(words, edges):
    for k in range(edges.shape[0]):
        edges[k] = ((words[k >> 6] >> np.uint64(k & 63)) & np.uint64(1)) != np.uint64(0)


@jit
def count_edges(edges):
    m = 0
    for k in range(edges.shape[0]):
        if edges[k]:
            m += 1
    return m


# ---------------------------------------------------------------------------
# connectivity


@jit
def uf_find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@jit
def uf_union(parent, size, a, b):
    ra = uf_find(parent, a)
    rb = uf_find(parent, b)
    if ra == rb:
        return ra
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    return ra


@jit
def uf_build(edges, n, pi, pj, parent, size):
    for v in range(n):
        parent[v] = v
        size[v] = 1
    for k in range(edges.shape[0]):
        if edges[k]:
            uf_union(parent, size, pi[k], pj[k])


@jit
def component_labels(edges, n, pi, pj, parent, size, labels):
    """Label components 0..ncomp-1 by order of first vertex; returns ncomp."""
    uf_build(edges, n, pi, pj, parent, size)
    for v in range(n):
        labels[v] = -1
    ncomp = 0
    for v in range(n):
        r = uf_find(parent, v)
        if labels[r] == -1:
            labels[r] = ncomp
            ncomp += 1
    for v in range(n):
        labels[v] = labels[uf_find(parent, v)]
    return ncomp


@jit
def split_sizes_without_edge(edges, n, pi, pj, k_edge, queue, visited):
    """Component sizes of k_edge's endpoints in the graph minus that edge.

    Both sizes equal when the edge is not a bridge.
    """
    a = pi[k_edge]
    b = pj[k_edge]
    for v in range(n):
        visited[v] = 0
    visited[a] = 1
    queue[0] = a
    head = 0
    tail = 1
    size_a = 1
    reached_b = False
    while head < tail:
        v = queue[head]
        head += 1
        for u in range(n):
            if u == v or visited[u] != 0:
                continue
            kk = pair_index(u, v)
            if kk == k_edge or not edges[kk]:
                continue
            visited[u] = 1
            if u == b:
                reached_b = True
            queue[tail] = u
            tail += 1
            size_a += 1
    if reached_b:
        return size_a, size_a
    visited[b] = 1
    queue[0] = b
    head = 0
    tail = 1
    size_b = 1
    while head < tail:
        v = queue[head]
        head += 1
        for u in range(n):
            if u == v or visited[u] != 0:
                continue
            kk = pair_index(u, v)
            if kk == k_edge or not edges[kk]:
                continue
            visited[u] = 1
            queue[tail] = u
            tail += 1
            size_b += 1
    return size_a, size_b


# ---------------------------------------------------------------------------
# process kernels


@jit
def step_w(w_prev, m_edges, n_pairs, p, q, state):
    if m_edges == 0:
        return 1, state
    if m_edges == n_pairs:
        return 0, state
    u, state = u01(state)
    if w_prev == 0:
        if u < p:
            return 1, state
        return 0, state
    if u < 1.0 - q:
        return 1, state
    return 0, state


@jit
def kth_with_status(edges, rank, want_edge):
    """Pair index of the rank-th (0-based) pair whose edge status matches."""
    cnt = -1
    for k in range(edges.shape[0]):
        if edges[k] == want_edge:
            cnt += 1
            if cnt == rank:
                return k
    return -1


@jit
def choose_edge_er(edges, n_pairs, m_edges, direction, state):
    if direction == 1:
        r, state = randint(state, n_pairs - m_edges)
        return kth_with_status(edges, r, False), state
    r, state = randint(state, m_edges)
    return kth_with_status(edges, r, True), state


@jit
def choose_edge_pr(edges, n, n_pairs, m_edges, pi, pj, direction, parent, size, queue, visited, state):
    """Two-candidate product rule; the candidate set of size one is chosen directly.

    Addition keeps the candidate with the smaller product of endpoint
    component sizes (second candidate on ties); deletion removes the one
    with the larger product of endpoint component sizes evaluated with that
    candidate edge absent (first candidate on ties).
    """
    if direction == 1:
        kfree = n_pairs - m_edges
        if kfree == 1:
            return kth_with_status(edges, 0, False), state
        r1, state = randint(state, kfree)
        r2, state = randint(state, kfree - 1)
        if r2 >= r1:
            r2 += 1
        k1 = kth_with_status(edges, r1, False)
        k2 = kth_with_status(edges, r2, False)
        prod1 = size[uf_find(parent, pi[k1])] * size[uf_find(parent, pj[k1])]
        prod2 = size[uf_find(parent, pi[k2])] * size[uf_find(parent, pj[k2])]
        if prod1 < prod2:
            return k1, state
        return k2, state
    if m_edges == 1:
        return kth_with_status(edges, 0, True), state
    r1, state = randint(state, m_edges)
    r2, state = randint(state, m_edges - 1)
    if r2 >= r1:
        r2 += 1
    k1 = kth_with_status(edges, r1, True)
    k2 = kth_with_status(edges, r2, True)
    s1a, s1b = split_sizes_without_edge(edges, n, pi, pj, k1, queue, visited)
    s2a, s2b = split_sizes_without_edge(edges, n, pi, pj, k2, queue, visited)
    if s1a * s1b < s2a * s2b:
        return k2, state
    return k1, state


@jit
def simulate_interval_core(edges, w, m_edges, n, n_pairs, pi, pj, duration, regime,
                           p, q, gamma, state, record, rec_dirs, rec_ks, rec_times,
                           parent, size, queue, visited):
    """Run the event loop over one interval; mutates ``edges`` in place.

    Returns (w, m_edges, event count, rng state). Events beyond the record
    buffers are applied but not stored; the caller compares the returned
    count against the capacity and reruns with larger buffers if needed.
    """
    if regime == PR:
        uf_build(edges, n, pi, pj, parent, size)
    t = 0.0
    r = 0
    cap = rec_dirs.shape[0]
    while True:
        dt, state = exponential(state, gamma)
        t += dt
        if t > duration:
            break
        w, state = step_w(w, m_edges, n_pairs, p, q, state)
        if regime == ER:
            k, state = choose_edge_er(edges, n_pairs, m_edges, w, state)
        else:
            k, state = choose_edge_pr(edges, n, n_pairs, m_edges, pi, pj, w,
                                      parent, size, queue, visited, state)
        if w == 1:
            edges[k] = True
            m_edges += 1
            if regime == PR:
                uf_union(parent, size, pi[k], pj[k])
        else:
            edges[k] = False
            m_edges -= 1
            if regime == PR:
                uf_build(edges, n, pi, pj, parent, size)
        if record and r < cap:
            rec_dirs[r] = w
            rec_ks[r] = k
            rec_times[r] = t
        r += 1
    return w, m_edges, r, state


# ---------------------------------------------------------------------------
# particle-filter kernels


@jit
def propagate_cloud(words_src, w_src, ancestors, words_dst, w_dst, r_out,
                    n, n_pairs, pi, pj, duration, regime, p, q, gamma, seeds):
    """Propagate each resampled ancestor over one observation interval."""
    B = ancestors.shape[0]
    edges = np.empty(n_pairs, np.bool_)
    parent = np.empty(n, np.int64)
    size = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    visited = np.empty(n, np.uint8)
    rec_dirs = np.empty(0, np.int64)
    rec_ks = np.empty(0, np.int64)
    rec_times = np.empty(0, np.float64)
    for b in range(B):
        src = ancestors[b]
        unpack_edges(words_src[src], edges)
        m_edges = count_edges(edges)
        w = np.int64(w_src[src])
        st = seeds[b]
        w, m_edges, r, st = simulate_interval_core(
            edges, w, m_edges, n, n_pairs, pi, pj, duration, regime,
            p, q, gamma, st, False, rec_dirs, rec_ks, rec_times,
            parent, size, queue, visited)
        pack_edges(edges, words_dst[b])
        w_dst[b] = w
        r_out[b] = r


@jit
def obs_logweights(words, wobs, n_pairs, log_a, log_1a, log_b, log_1b, out):
    """Per-particle observation log-likelihood from packed confusion counts."""
    B = words.shape[0]
    W = words.shape[1]
    obs_edges = 0
    for w in range(W):
        obs_edges += popcount64(wobs[w])
    for b in range(B):
        a_cnt = 0
        true_edges = 0
        for w in range(W):
            tw = words[b, w]
            a_cnt += popcount64(tw & wobs[w])
            true_edges += popcount64(tw)
        b_cnt = true_edges - a_cnt
        c_cnt = obs_edges - a_cnt
        d_cnt = n_pairs - true_edges - c_cnt
        out[b] = c_cnt * log_a + d_cnt * log_1a + b_cnt * log_b + a_cnt * log_1b


@jit
def logmeanexp(logw):
    B = logw.shape[0]
    mx = logw[0]
    for b in range(1, B):
        if logw[b] > mx:
            mx = logw[b]
    tot = 0.0
    for b in range(B):
        tot += math.exp(logw[b] - mx)
    return mx + math.log(tot / B)


@jit
def resample_multinomial(logw, count, state, out_idx):
    """Multinomial draw of ``count`` indices with probability ∝ exp(logw)."""
    B = logw.shape[0]
    mx = logw[0]
    for b in range(1, B):
        if logw[b] > mx:
            mx = logw[b]
    cum = np.empty(B, np.float64)
    tot = 0.0
    for b in range(B):
        tot += math.exp(logw[b] - mx)
        cum[b] = tot
    for i in range(count):
        u, state = u01(state)
        target = u * tot
        lo = 0
        hi = B - 1
        while lo < hi:
            mid = (lo + hi) >> 1
            if cum[mid] < target:
                lo = mid + 1
            else:
                hi = mid
        out_idx[i] = lo
    return state


@jit
def line_confusion_totals(words, ancestors, obs_words, term_logw, n_pairs, count, state):
    """Sum confusion counts over ``count`` sampled ancestral lines.

    Lines are drawn by terminal weight and traced through the ancestor
    table; counts cover observation positions 1..M-1 (the first
    observation is error-free by construction).
    """
    M = words.shape[0]
    B = words.shape[1]
    W = words.shape[2]
    mx = term_logw[0]
    for b in range(1, B):
        if term_logw[b] > mx:
            mx = term_logw[b]
    cum = np.empty(B, np.float64)
    tot = 0.0
    for b in range(B):
        tot += math.exp(term_logw[b] - mx)
        cum[b] = tot
    obs_edge_counts = np.empty(M, np.int64)
    for m in range(M):
        c = 0
        for w in range(W):
            c += popcount64(obs_words[m, w])
        obs_edge_counts[m] = c
    a_sum = 0.0
    b_sum = 0.0
    c_sum = 0.0
    d_sum = 0.0
    for i in range(count):
        u, state = u01(state)
        target = u * tot
        lo = 0
        hi = B - 1
        while lo < hi:
            mid = (lo + hi) >> 1
            if cum[mid] < target:
                lo = mid + 1
            else:
                hi = mid
        idx = lo
        for m in range(M - 1, 0, -1):
            a_cnt = 0
            true_edges = 0
            for w in range(W):
                tw = words[m, idx, w]
                a_cnt += popcount64(tw & obs_words[m, w])
                true_edges += popcount64(tw)
            a_sum += a_cnt
            b_sum += true_edges - a_cnt
            c_sum += obs_edge_counts[m] - a_cnt
            d_sum += n_pairs - true_edges - (obs_edge_counts[m] - a_cnt)
            idx = ancestors[m, idx]
    return a_sum, b_sum, c_sum, d_sum, state

"""Kernels for sample-path probability and Metropolis-Hastings path moves.

A sample path is the ordered list of single-edge changes between two
latent states; each change is (direction, pair index) and the direction is
also the W value after the change. Feasibility means every change flips a
pair consistently with its current presence and the final direction equals
the end state's W.

The MH proposals are paired insertion (two offsetting changes of one edge
at two slots inside a span where that edge's presence is constant), paired
deletion (remove such an adjacent offsetting pair), and permutation
(uniform re-interleaving; each edge's own changes keep their forced
alternation order). Insertion sites of a path and deletable pairs of the
resulting path are in bijection, so the Hastings ratio uses the exact site
counts plus a move-availability factor.
"""

import math

import numpy as np

from .backend import jit
from .rng import randint, u01
from ._kernels import ER, pair_index, uf_build, uf_find

_NEG_INF = -math.inf


@jit
def _pr_add_logprob(edges, m_edges, n, n_pairs, pi, pj, k, parent, size):
    kfree = n_pairs - m_edges
    if kfree == 1:
        return 0.0
    uf_build(edges, n, pi, pj, parent, size)
    mine = size[uf_find(parent, pi[k])] * size[uf_find(parent, pj[k])]
    n_gt = 0
    n_eq = 0
    for c in range(n_pairs):
        if edges[c] or c == k:
            continue
        pc = size[uf_find(parent, pi[c])] * size[uf_find(parent, pj[c])]
        if pc > mine:
            n_gt += 1
        elif pc == mine:
            n_eq += 1
    wins = 2 * n_gt + n_eq
    if wins == 0:
        return _NEG_INF
    return math.log(wins) - math.log(kfree * (kfree - 1))


@jit
def _bridge_products(edges, n, pi, pj, parent, size, tin, low, sub, nxt, par, stack, prod):
    """For each present edge k: product of endpoint component sizes in g - k.

    Non-bridges keep their component's squared size; bridges get the two
    split sizes from one DFS (lowpoint) pass per component.
    """
    uf_build(edges, n, pi, pj, parent, size)
    for k in range(prod.shape[0]):
        if edges[k]:
            cs = size[uf_find(parent, pi[k])]
            prod[k] = cs * cs
        else:
            prod[k] = 0
    for v in range(n):
        tin[v] = -1
        sub[v] = 1
        nxt[v] = 0
        par[v] = -1
    timer = 0
    for root in range(n):
        if tin[root] != -1:
            continue
        tin[root] = timer
        low[root] = timer
        timer += 1
        sp = 0
        stack[sp] = root
        sp += 1
        while sp > 0:
            v = stack[sp - 1]
            if nxt[v] < n:
                u = nxt[v]
                nxt[v] += 1
                if u == v:
                    continue
                kk = pair_index(u, v)
                if not edges[kk]:
                    continue
                if u == par[v]:
                    continue
                if tin[u] == -1:
                    par[u] = v
                    tin[u] = timer
                    low[u] = timer
                    timer += 1
                    stack[sp] = u
                    sp += 1
                elif tin[u] < low[v]:
                    low[v] = tin[u]
            else:
                sp -= 1
                pv = par[v]
                if pv != -1:
                    sub[pv] += sub[v]
                    if low[v] < low[pv]:
                        low[pv] = low[v]
                    if low[v] > tin[pv]:
                        kk = pair_index(pv, v)
                        cs = size[uf_find(parent, pi[kk])]
                        prod[kk] = sub[v] * (cs - sub[v])


@jit
def _pr_del_logprob(edges, m_edges, n, n_pairs, pi, pj, k,
                    parent, size, tin, low, sub, nxt, par, stack, prod):
    if m_edges == 1:
        return 0.0
    _bridge_products(edges, n, pi, pj, parent, size, tin, low, sub, nxt, par, stack, prod)
    mine = prod[k]
    n_lt = 0
    n_eq = 0
    for c in range(n_pairs):
        if not edges[c] or c == k:
            continue
        if prod[c] < mine:
            n_lt += 1
        elif prod[c] == mine:
            n_eq += 1
    wins = 2 * n_lt + n_eq
    if wins == 0:
        return _NEG_INF
    return math.log(wins) - math.log(m_edges * (m_edges - 1))


@jit
def path_logpmf_core(dirs, ks, r_len, start_edges, start_w, n, n_pairs, pi, pj,
                     duration, p, q, gamma, regime,
                     edges, parent, size, tin, low, sub, nxt, par, stack, prod):
    """Log pmf of a path; NaN marks an infeasible flip sequence."""
    for k in range(n_pairs):
        edges[k] = start_edges[k]
    m_edges = 0
    for k in range(n_pairs):
        if edges[k]:
            m_edges += 1
    if r_len == 0:
        return -gamma * duration
    if duration <= 0.0:
        return _NEG_INF
    lam = gamma * duration
    logp = -lam + r_len * math.log(lam) - math.lgamma(r_len + 1.0)
    w = start_w
    for r in range(r_len):
        k = ks[r]
        d = dirs[r]
        if (d == 1) == edges[k]:
            return math.nan
        # direction-bit factor (forced from empty/complete graphs)
        if m_edges == 0:
            hv = 1.0 if d == 1 else 0.0
        elif m_edges == n_pairs:
            hv = 1.0 if d == 0 else 0.0
        elif w == 0:
            hv = p if d == 1 else 1.0 - p
        else:
            hv = 1.0 - q if d == 1 else q
        if hv <= 0.0:
            return _NEG_INF
        logp += math.log(hv)
        # edge-choice factor
        if regime == ER:
            cnt = n_pairs - m_edges if d == 1 else m_edges
            logp -= math.log(cnt)
        else:
            if d == 1:
                gl = _pr_add_logprob(edges, m_edges, n, n_pairs, pi, pj, k, parent, size)
            else:
                gl = _pr_del_logprob(edges, m_edges, n, n_pairs, pi, pj, k,
                                     parent, size, tin, low, sub, nxt, par, stack, prod)
            if gl == _NEG_INF:
                return _NEG_INF
            logp += gl
        edges[k] = not edges[k]
        m_edges += 1 if d == 1 else -1
        w = d
    return logp


@jit
def path_stats(dirs, ks, r_len, start_w, m_start, n_pairs, out):
    """[R, #0->1, #eligible-from-0, #1->0, #eligible-from-1] for one path.

    Steps out of the empty or complete graph are forced and excluded from
    the eligible counts.
    """
    w = start_w
    m_edges = m_start
    n01 = 0
    f0 = 0
    n10 = 0
    f1 = 0
    for r in range(r_len):
        d = dirs[r]
        if 0 < m_edges < n_pairs:
            if w == 0:
                f0 += 1
                if d == 1:
                    n01 += 1
            else:
                f1 += 1
                if d == 0:
                    n10 += 1
        m_edges += 1 if d == 1 else -1
        w = d
    out[0] = r_len
    out[1] = n01
    out[2] = f0
    out[3] = n10
    out[4] = f1


@jit
def count_insertions(dirs, ks, r_len, start_edges, w_end, n_pairs):
    """Number of valid (edge, slot-pair) insertion sites."""
    total = 0
    for k in range(n_pairs):
        presence = 1 if start_edges[k] else 0
        a = 0
        for r in range(r_len):
            if ks[r] == k:
                span = r - a + 1
                total += span * (span + 1) // 2
                a = r + 1
                presence = 1 - presence
        span = r_len - a + 1  # final slot span includes the end slot
        t = span * (span + 1) // 2
        if presence != w_end:
            t -= span  # pairs ending at the last slot would break the final direction
        total += t
    return total


@jit
def sample_insertion(dirs, ks, r_len, start_edges, w_end, n_pairs, rank):
    """Unrank an insertion site: returns (edge, slot_i, slot_j, op1_dir)."""
    for k in range(n_pairs):
        presence = 1 if start_edges[k] else 0
        a = 0
        for r in range(r_len + 1):
            is_final = r == r_len
            if not is_final and ks[r] != k:
                continue
            b = r_len if is_final else r
            span = b - a + 1
            cnt = span * (span + 1) // 2
            allow_end = True
            if is_final and presence != w_end:
                cnt -= span
                allow_end = False
            if rank < cnt:
                jmax = b if allow_end else b - 1
                i = a
                while True:
                    row = jmax - i + 1
                    if rank < row:
                        return k, i, i + rank, 1 - presence
                    rank -= row
                    i += 1
            rank -= cnt
            if not is_final:
                a = r + 1
                presence = 1 - presence
    return -1, -1, -1, -1  # unreachable for rank < count_insertions


@jit
def list_deletions(dirs, ks, r_len, start_w, w_end, n_pairs, out_a, out_b):
    """Valid offsetting adjacent pairs (indices into the path); returns count."""
    cnt = 0
    for k in range(n_pairs):
        prev = -1
        for r in range(r_len):
            if ks[r] != k:
                continue
            if prev != -1:
                valid = True
                if r == r_len - 1:
                    if r_len == 2:
                        valid = start_w == w_end
                    else:
                        last = r_len - 2
                        if last == prev:
                            last = r_len - 3
                        valid = dirs[last] == w_end
                if valid:
                    out_a[cnt] = prev
                    out_b[cnt] = r
                    cnt += 1
            prev = r
    return cnt


@jit
def permute_path(dirs, ks, r_len, start_edges, w_end, new_dirs, new_ks, occ, state, max_tries):
    """Uniform feasible re-interleaving into new arrays; False if none found."""
    for _ in range(max_tries):
        for r in range(r_len):
            new_ks[r] = ks[r]
        for r in range(r_len - 1, 0, -1):
            j, state = randint(state, r + 1)
            tmp = new_ks[r]
            new_ks[r] = new_ks[j]
            new_ks[j] = tmp
        for k in range(occ.shape[0]):
            occ[k] = 0
        for r in range(r_len):
            k = new_ks[r]
            first_dir = 0 if start_edges[k] else 1
            new_dirs[r] = first_dir if occ[k] % 2 == 0 else 1 - first_dir
            occ[k] += 1
        if new_dirs[r_len - 1] == w_end:
            return True, state
    return False, state


@jit
def mcmc_chain(start_edges, start_w, w_end, init_dirs, init_ks,
               n, n_pairs, pi, pj, duration, p, q, gamma, regime,
               n_record, burn_in, thin, seed):
    """Run the path chain; returns (flat dirs, flat ks, offsets, stats, accepts).

    Records the current path every ``thin`` proposals after ``burn_in``
    proposals, ``n_record`` times. ``stats`` holds the transition counts
    from :func:`path_stats` per recorded path.
    """
    r_len = init_dirs.shape[0]
    cap = r_len + 66
    dirs = np.empty(cap, np.int64)
    ks = np.empty(cap, np.int64)
    for r in range(r_len):
        dirs[r] = init_dirs[r]
        ks[r] = init_ks[r]
    pdirs = np.empty(cap, np.int64)
    pks = np.empty(cap, np.int64)
    del_a = np.empty(cap, np.int64)
    del_b = np.empty(cap, np.int64)
    occ = np.empty(n_pairs, np.int64)

    edges = np.empty(n_pairs, np.bool_)
    parent = np.empty(n, np.int64)
    size = np.empty(n, np.int64)
    tin = np.empty(n, np.int64)
    low = np.empty(n, np.int64)
    sub = np.empty(n, np.int64)
    nxt = np.empty(n, np.int64)
    par = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    prod = np.empty(n_pairs, np.int64)

    m_start = 0
    for k in range(n_pairs):
        if start_edges[k]:
            m_start += 1

    cur_logp = path_logpmf_core(dirs, ks, r_len, start_edges, start_w, n, n_pairs, pi, pj,
                                duration, p, q, gamma, regime,
                                edges, parent, size, tin, low, sub, nxt, par, stack, prod)

    out_cap = n_record * (r_len + 8) + 64
    out_dirs = np.empty(out_cap, np.int64)
    out_ks = np.empty(out_cap, np.int64)
    offsets = np.zeros(n_record + 1, np.int64)
    stats = np.zeros((n_record, 5), np.float64)
    stat_row = np.empty(5, np.float64)

    state = np.uint64(seed)
    total = burn_in + n_record * thin
    rec_i = 0
    out_len = 0
    accepts = 0

    for it in range(total):
        ins_u = count_insertions(dirs, ks, r_len, start_edges, w_end, n_pairs)
        del_u = list_deletions(dirs, ks, r_len, start_w, w_end, n_pairs, del_a, del_b)
        n_avail = (1 if ins_u > 0 else 0) + (1 if del_u > 0 else 0) + (1 if r_len >= 2 else 0)
        moved = False
        p_len = r_len
        logq_diff = 0.0  # log q(u|u~) - log q(u~|u)
        if n_avail > 0:
            mv, state = randint(state, n_avail)
            # available moves in fixed order: insertion, deletion, permutation
            move = -1
            slot = 0
            if ins_u > 0:
                if mv == slot:
                    move = 0
                slot += 1
            if move < 0 and del_u > 0:
                if mv == slot:
                    move = 1
                slot += 1
            if move < 0:
                move = 2
            if move == 0:
                rank, state = randint(state, ins_u)
                k_ins, si, sj, op1 = sample_insertion(dirs, ks, r_len, start_edges,
                                                      w_end, n_pairs, rank)
                p_len = r_len + 2
                if p_len > cap:
                    cap = 2 * cap
                    nd = np.empty(cap, np.int64)
                    nk = np.empty(cap, np.int64)
                    for r in range(r_len):
                        nd[r] = dirs[r]
                        nk[r] = ks[r]
                    dirs = nd
                    ks = nk
                    pdirs = np.empty(cap, np.int64)
                    pks = np.empty(cap, np.int64)
                    del_a = np.empty(cap, np.int64)
                    del_b = np.empty(cap, np.int64)
                for r in range(si):
                    pdirs[r] = dirs[r]
                    pks[r] = ks[r]
                pdirs[si] = op1
                pks[si] = k_ins
                for r in range(si, sj):
                    pdirs[r + 1] = dirs[r]
                    pks[r + 1] = ks[r]
                pdirs[sj + 1] = 1 - op1
                pks[sj + 1] = k_ins
                for r in range(sj, r_len):
                    pdirs[r + 2] = dirs[r]
                    pks[r + 2] = ks[r]
                del_p = list_deletions(pdirs, pks, p_len, start_w, w_end, n_pairs, del_a, del_b)
                ins_p = count_insertions(pdirs, pks, p_len, start_edges, w_end, n_pairs)
                avail_p = (1 if ins_p > 0 else 0) + (1 if del_p > 0 else 0) + 1
                logq_diff = (math.log(n_avail) + math.log(ins_u)
                             - math.log(avail_p) - math.log(del_p))
                moved = True
            elif move == 1:
                which, state = randint(state, del_u)
                ra = del_a[which]
                rb = del_b[which]
                p_len = r_len - 2
                idx = 0
                for r in range(r_len):
                    if r == ra or r == rb:
                        continue
                    pdirs[idx] = dirs[r]
                    pks[idx] = ks[r]
                    idx += 1
                ins_p = count_insertions(pdirs, pks, p_len, start_edges, w_end, n_pairs)
                del_p = list_deletions(pdirs, pks, p_len, start_w, w_end, n_pairs, del_a, del_b)
                avail_p = (1 if ins_p > 0 else 0) + (1 if del_p > 0 else 0) + (1 if p_len >= 2 else 0)
                logq_diff = (math.log(n_avail) + math.log(del_u)
                             - math.log(avail_p) - math.log(ins_p))
                moved = True
            else:
                ok, state = permute_path(dirs, ks, r_len, start_edges, w_end,
                                         pdirs, pks, occ, state, 64)
                if ok:
                    p_len = r_len
                    ins_p = count_insertions(pdirs, pks, p_len, start_edges, w_end, n_pairs)
                    del_p = list_deletions(pdirs, pks, p_len, start_w, w_end, n_pairs, del_a, del_b)
                    avail_p = (1 if ins_p > 0 else 0) + (1 if del_p > 0 else 0) + 1
                    logq_diff = math.log(n_avail) - math.log(avail_p)
                    moved = True
        if moved:
            prop_logp = path_logpmf_core(pdirs, pks, p_len, start_edges, start_w,
                                         n, n_pairs, pi, pj, duration, p, q, gamma, regime,
                                         edges, parent, size, tin, low, sub, nxt, par, stack, prod)
            log_acc = prop_logp - cur_logp + logq_diff
            accept = False
            if not math.isnan(log_acc):
                if log_acc >= 0.0:
                    accept = True
                else:
                    u, state = u01(state)
                    if u < math.exp(log_acc):
                        accept = True
            if accept:
                for r in range(p_len):
                    dirs[r] = pdirs[r]
                    ks[r] = pks[r]
                r_len = p_len
                cur_logp = prop_logp
                accepts += 1
        if it >= burn_in and (it - burn_in + 1) % thin == 0 and rec_i < n_record:
            if out_len + r_len > out_cap:
                out_cap = 2 * (out_len + r_len) + 64
                ndirs = np.empty(out_cap, np.int64)
                nks = np.empty(out_cap, np.int64)
                for t in range(out_len):
                    ndirs[t] = out_dirs[t]
                    nks[t] = out_ks[t]
                out_dirs = ndirs
                out_ks = nks
            for r in range(r_len):
                out_dirs[out_len + r] = dirs[r]
                out_ks[out_len + r] = ks[r]
            out_len += r_len
            offsets[rec_i + 1] = out_len
            path_stats(dirs, ks, r_len, start_w, m_start, n_pairs, stat_row)
            for t in range(5):
                stats[rec_i, t] = stat_row[t]
            rec_i += 1
    return out_dirs[:out_len], out_ks[:out_len], offsets, stats, accepts

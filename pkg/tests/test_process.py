import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chisquare, poisson

from percohmm import (DynGraph, LatentState, ProcessParams, Regime, Rng,
                      exact_embedded_kernel, exact_interval_kernel, simulate_interval)
from percohmm.exact import _edge_choice_prob, mask_of_graph, state_index
from percohmm.process import choose_edge_pr, step_w

PARAMS = ProcessParams(0.7, 0.3, 2.0)


def test_params_validation():
    ProcessParams(1.0, 0.0, 2.0)  # boundary rates are valid for simulation
    with pytest.raises(ValueError):
        ProcessParams(1.1, 0.3, 2.0)
    with pytest.raises(ValueError):
        ProcessParams(0.5, -0.1, 2.0)
    with pytest.raises(ValueError):
        ProcessParams(0.5, 0.5, 0.0)


def test_step_w_forced_states():
    rng = Rng(1)
    empty = DynGraph(4)
    complete = DynGraph.complete(4)
    for w_prev in (0, 1):
        assert step_w(w_prev, empty, PARAMS, rng) == 1
        assert step_w(w_prev, complete, PARAMS, rng) == 0


def test_step_w_frequency():
    rng = Rng(2)
    g = DynGraph(4, [(0, 1)])
    n = 100_000
    hits = sum(step_w(0, g, PARAMS, rng) for _ in range(n))
    sigma = (n * 0.7 * 0.3) ** 0.5
    assert abs(hits - 0.7 * n) < 3 * sigma
    hits1 = sum(step_w(1, g, PARAMS, rng) for _ in range(n))
    assert abs(hits1 - 0.7 * n) < 3 * sigma  # P(stay adding) = 1 - q = 0.7


def _literal_pr_probability(g: DynGraph, direction: int, target) -> Fraction:
    """Brute force over ordered candidate pairs, applying the selection rule
    as stated: addition keeps the smaller product (second on ties),
    deletion removes the larger with-edge-absent product (first on ties)."""
    if direction == 1:
        cands = [e for e in [(i, j) for j in range(g.n) for i in range(j)]
                 if not g.has_edge(e)]
        labels = {}
        comp = g.components()
        for e in cands:
            labels[e] = int(comp.sizes[comp.labels[e[0]]]) * int(comp.sizes[comp.labels[e[1]]])
    else:
        cands = g.edges()
        labels = {e: int(np.prod(g.component_sizes_without_edge(e))) for e in cands}
    if len(cands) == 1:
        return Fraction(1) if cands[0] == target else Fraction(0)
    wins = 0
    for e1 in cands:
        for e2 in cands:
            if e1 == e2:
                continue
            if direction == 1:
                chosen = e1 if labels[e1] < labels[e2] else e2
            else:
                chosen = e2 if labels[e1] < labels[e2] else e1
            if chosen == target:
                wins += 1
    return Fraction(wins, len(cands) * (len(cands) - 1))


def test_pr_addition_hand_example():
    # components {0,1}, {2}, {3,4,5}: candidate (0,2) has product 2*1,
    # candidate (2,3) product 1*3, so (0,2) must win every ordered draw
    g = DynGraph(6, [(0, 1), (3, 4), (4, 5)])
    assert _literal_pr_probability(g, 1, (0, 2)) > _literal_pr_probability(g, 1, (2, 3))
    comp = g.components()
    prod = lambda e: int(comp.sizes[comp.labels[e[0]]]) * int(comp.sizes[comp.labels[e[1]]])
    assert prod((0, 2)) == 2 and prod((2, 3)) == 3


def test_pr_deletion_hand_example():
    # bridge splitting 4 vertices -> product 4; triangle edge -> product 9;
    # the larger product is deleted
    g = DynGraph(7, [(0, 1), (1, 2), (0, 2), (2, 3), (4, 5), (5, 6), (4, 6)])
    bridge = (2, 3)
    tri_edge = (0, 1)
    assert np.prod(g.component_sizes_without_edge(bridge)) == 3  # 1*3 halves
    g2 = DynGraph(6, [(0, 1), (1, 2), (2, 3), (4, 5)])
    assert np.prod(g2.component_sizes_without_edge((1, 2))) == 4  # (2,2) halves
    assert np.prod(DynGraph(3, [(0, 1), (1, 2), (0, 2)]).component_sizes_without_edge((0, 1))) == 9
    # direct rule check on a graph holding both candidate shapes
    g3 = DynGraph(7, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (5, 6)])
    p_mid = _literal_pr_probability(g3, 0, (4, 5))  # bridge splitting (2,2): product 4
    p_tri = _literal_pr_probability(g3, 0, (0, 1))  # triangle edge: product 9
    assert p_tri > p_mid


def test_pr_choice_prob_matches_literal_rule():
    graphs = [
        DynGraph(5, [(0, 1), (1, 2), (3, 4)]),
        DynGraph(4, [(0, 1), (2, 3), (1, 2)]),
        DynGraph(4, [(0, 1)]),
    ]
    for g in graphs:
        n_pairs = g.n_pairs
        mask = mask_of_graph(g)
        pairs = [(i, j) for j in range(g.n) for i in range(j)]
        for direction in (0, 1):
            for k, e in enumerate(pairs):
                expect = _literal_pr_probability(g, direction, e)
                present = g.has_edge(e)
                if present == (direction == 1):
                    continue  # wrong status for this move
                got = _edge_choice_prob(mask, direction, k, g.n, n_pairs, Regime.PR)
                assert got == expect, (g.edges(), direction, e)


def test_pr_chooser_frequencies():
    g = DynGraph(5, [(0, 1), (1, 2), (3, 4)])
    mask = mask_of_graph(g)
    pairs = [(i, j) for j in range(5) for i in range(j)]
    rng = Rng(31)
    n = 40_000
    counts = {}
    for _ in range(n):
        e = choose_edge_pr(g, 1, rng)
        counts[e] = counts.get(e, 0) + 1
    expected = []
    observed = []
    rare_exp = 0.0
    rare_obs = 0
    for k, e in enumerate(pairs):
        if g.has_edge(e):
            continue
        prob = float(_edge_choice_prob(mask, 1, k, 5, 10, Regime.PR)) * n
        if prob >= 5:
            expected.append(prob)
            observed.append(counts.get(e, 0))
        else:
            rare_exp += prob
            rare_obs += counts.get(e, 0)
    if rare_exp > 0:
        expected.append(rare_exp)
        observed.append(rare_obs)
    _, p = chisquare(observed, np.asarray(expected) * sum(observed) / sum(expected))
    assert p > 0.01


def test_pr_single_candidate_chosen_directly():
    g = DynGraph.complete(3)
    g.remove_edge((0, 1))
    assert choose_edge_pr(g, 1, Rng(3)) == (0, 1)


def test_simulate_interval_zero_duration():
    st = LatentState(1, DynGraph(4, [(0, 1)]))
    out, r, events = simulate_interval(st, 0.0, Regime.ER, PARAMS, Rng(5), record=True)
    assert r == 0 and events == [] and out.g == st.g and out.w == st.w


def test_simulate_interval_poisson_count():
    rng = Rng(6)
    st = LatentState(1, DynGraph(6))
    n = 10_000
    rs = np.array([simulate_interval(st, 5.0, Regime.ER, PARAMS, rng)[1] for _ in range(n)])
    mean = 2.0 * 5.0
    assert abs(rs.mean() - mean) < 3 * math.sqrt(mean / n)
    # chi-square against the Poisson(10) pmf, tail lumped into the last bin
    kmax = 25
    bins = np.bincount(np.clip(rs, 0, kmax), minlength=kmax + 1).astype(float)
    probs = np.append(poisson.pmf(np.arange(kmax), mean), poisson.sf(kmax - 1, mean))
    keep = probs * n >= 5
    obs = np.append(bins[keep], bins[~keep].sum())
    exp = np.append(probs[keep], probs[~keep].sum()) * n
    _, p = chisquare(obs, exp * obs.sum() / exp.sum())
    assert p > 0.01


def test_first_event_from_empty_is_addition():
    rng = Rng(7)
    st = LatentState(0, DynGraph(4))
    for _ in range(50):
        out, r, events = simulate_interval(st, 1.0, Regime.ER, PARAMS, rng, record=True)
        if events:
            assert events[0].direction == 1


def test_event_replay_reproduces_end_state():
    rng = Rng(8)
    st = LatentState(1, DynGraph(5, [(0, 1), (2, 3)]))
    out, r, events = simulate_interval(st, 3.0, Regime.PR, PARAMS, rng, record=True)
    g = st.g.copy()
    for ev in events:
        if ev.direction == 1:
            g.add_edge(ev.edge)
        else:
            g.remove_edge(ev.edge)
    assert g == out.g
    assert len(events) == r
    assert all(0.0 < ev.time <= 3.0 for ev in events)


def test_embedded_kernel_documented_entries():
    kern = exact_embedded_kernel(3, Regime.ER, (0.7, 0.3))
    # graph labels: 2={AB}, 5={AB,AC}, 8=complete; states indexed (w, mask)
    m2, m5, m8 = 0b001, 0b011, 0b111
    assert kern[state_index(0, m2, 3), state_index(1, m5, 3)] == pytest.approx(0.35)
    assert kern[state_index(0, m2, 3), state_index(0, 0, 3)] == pytest.approx(0.3)
    for mask in (0b011, 0b110, 0b101):
        assert kern[state_index(1, m8, 3), state_index(0, mask, 3)] == pytest.approx(1 / 3)
    assert np.allclose(kern.sum(axis=1), 1.0)
    with pytest.raises(ValueError):
        exact_embedded_kernel(5)


def test_interval_kernel_identity_and_rowsums():
    k0 = exact_interval_kernel(3, Regime.ER, (0.7, 0.3, 2.0), 0.0)
    assert np.allclose(k0, np.eye(16))
    k = exact_interval_kernel(3, Regime.ER, (0.7, 0.3, 2.0), 0.7, tol=1e-12)
    assert np.all(k.sum(axis=1) <= 1.0 + 1e-12)
    assert np.all(k.sum(axis=1) > 1.0 - 1e-11)


def test_interval_kernel_matches_monte_carlo():
    # one million propagations through the batch kernel vs the truncated series
    from conftest import graph_from_mask

    import percohmm._kernels as K
    from percohmm.graph import pair_table
    from percohmm.rng import spawn_seeds

    params = ProcessParams(0.7, 0.3, 2.0)
    dt = 0.5
    kern = exact_interval_kernel(3, Regime.ER, params, dt)
    start = graph_from_mask(3, 0b001)
    row = state_index(0, 0b001, 3)
    n = 1_000_000
    src = np.zeros((1, 1), np.uint64)
    K.pack_edges(start.edge_flags, src[0])
    w_src = np.zeros(1, np.uint8)  # w = 0
    anc = np.zeros(n, np.int32)
    dst = np.zeros((n, 1), np.uint64)
    w_dst = np.zeros(n, np.uint8)
    r_out = np.zeros(n, np.int32)
    pi, pj = pair_table(3)
    K.propagate_cloud(src, w_src, anc, dst, w_dst, r_out, np.int64(3), np.int64(3),
                      pi, pj, dt, np.int64(0), params.p, params.q, params.gamma,
                      spawn_seeds(404, n))
    states = w_dst.astype(np.int64) * 8 + dst[:, 0].astype(np.int64)
    counts = np.bincount(states, minlength=16)
    for idx in range(16):
        p = kern[row, idx]
        sigma = math.sqrt(max(p * (1 - p) * n, 1.0))
        assert abs(counts[idx] - p * n) < 4 * sigma, (idx, counts[idx] / n, p)

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from percohmm import DynGraph, Rng


def test_add_edge_basic():
    g = DynGraph(3)
    g.add_edge((0, 1))
    assert g.edges() == [(0, 1)]
    assert g.component_sizes() == (2, 1)


def test_add_edge_closes_cycle():
    g = DynGraph(3, [(0, 1), (1, 2)])
    g.add_edge((0, 2))
    assert g.edge_count == 3
    assert g.component_sizes() == (3,)


def test_add_edge_merges_components():
    g = DynGraph(4, [(0, 1), (2, 3)])
    assert g.component_sizes() == (2, 2)
    g.add_edge((1, 2))
    assert g.component_sizes() == (4,)


def test_add_edge_errors():
    g = DynGraph(3, [(0, 1)])
    with pytest.raises(ValueError):
        g.add_edge((0, 1))
    with pytest.raises(ValueError):
        g.add_edge((1, 0))  # canonical form: same pair
    with pytest.raises(ValueError):
        g.add_edge((0, 3))
    with pytest.raises(ValueError):
        g.add_edge((1, 1))


def test_remove_edge_redundant_and_bridge():
    tri = DynGraph(3, [(0, 1), (1, 2), (0, 2)])
    tri.remove_edge((0, 1))
    assert tri.component_sizes() == (3,)

    path = DynGraph(3, [(0, 1), (1, 2)])
    path.remove_edge((0, 1))
    assert path.component_sizes() == (2, 1)
    assert path.components().labels[0] != path.components().labels[1]


def test_remove_edge_star():
    star = DynGraph(4, [(0, 1), (0, 2), (0, 3)])
    star.remove_edge((0, 2))
    assert star.component_sizes() == (3, 1)


def test_remove_edge_missing():
    with pytest.raises(ValueError):
        DynGraph(3).remove_edge((0, 1))


def test_gcc_and_density():
    empty = DynGraph(5)
    assert empty.gcc_fraction() == pytest.approx(0.2)
    assert empty.density() == 0.0

    complete = DynGraph.complete(5)
    assert complete.gcc_fraction() == 1.0
    assert complete.density() == 1.0

    g = DynGraph(6, [(0, 1), (1, 2), (3, 4)])
    assert g.component_sizes() == (3, 2, 1)
    assert g.gcc_fraction() == pytest.approx(0.5)


def test_component_sizes_without_edge():
    path = DynGraph(3, [(0, 1), (1, 2)])
    assert path.component_sizes_without_edge((0, 1)) == (1, 2)

    tri = DynGraph(3, [(0, 1), (1, 2), (0, 2)])
    assert tri.component_sizes_without_edge((0, 1)) == (3, 3)

    two_tri = DynGraph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
    assert two_tri.component_sizes_without_edge((2, 3)) == (3, 3)

    with pytest.raises(ValueError):
        DynGraph(3, [(0, 1)]).component_sizes_without_edge((0, 2))


def test_sampler_degenerate_cases():
    with pytest.raises(ValueError):
        DynGraph.complete(3).sample_uniform_nonedge(Rng(1))
    with pytest.raises(ValueError):
        DynGraph(3).sample_uniform_edge(Rng(1))
    g = DynGraph(3, [(0, 2)])
    assert g.sample_uniform_edge(Rng(2)) == (0, 2)


def test_nonedge_sampler_uniform():
    g = DynGraph(3)
    rng = Rng(77)
    counts = {}
    n = 100_000
    for _ in range(n):
        e = g.sample_uniform_nonedge(rng)
        counts[e] = counts.get(e, 0) + 1
    assert set(counts) == {(0, 1), (0, 2), (1, 2)}
    sigma = (n * (1 / 3) * (2 / 3)) ** 0.5
    for c in counts.values():
        assert abs(c - n / 3) < 3 * sigma


def test_edge_sampler_chi_square():
    g = DynGraph(5, [(0, 1), (0, 2), (1, 3), (2, 4), (3, 4), (1, 2)])
    rng = Rng(99)
    edges = g.edges()
    counts = {e: 0 for e in edges}
    n = 30_000
    for _ in range(n):
        counts[g.sample_uniform_edge(rng)] += 1
    _, p = chisquare(list(counts.values()))
    assert p > 0.01


def _bfs_component_sizes(n, edges):
    adj = {v: set() for v in range(n)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    seen = set()
    sizes = []
    for v0 in range(n):
        if v0 in seen:
            continue
        stack = [v0]
        seen.add(v0)
        count = 0
        while stack:
            v = stack.pop()
            count += 1
            for u in adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        sizes.append(count)
    return tuple(sorted(sizes, reverse=True))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7)), max_size=40))
def test_component_tracking_matches_bfs(n, ops):
    g = DynGraph(n)
    edges = set()
    for i, j in ops:
        i, j = i % n, j % n
        if i == j:
            continue
        e = (min(i, j), max(i, j))
        if e in edges:
            g.remove_edge(e)
            edges.discard(e)
        else:
            g.add_edge(e)
            edges.add(e)
        assert sum(g.component_sizes()) == n
        assert g.component_sizes() == _bfs_component_sizes(n, edges)
        assert g.gcc_fraction() * n == pytest.approx(max(g.component_sizes()))


def test_add_remove_identity():
    g = DynGraph(4, [(0, 1), (2, 3)])
    before = g.edges()
    g.add_edge((1, 2))
    g.remove_edge((1, 2))
    assert g.edges() == before
    assert g.component_sizes() == (2, 2)

import numpy as np
import pytest

from generators import random_digraph
from oracles import brute_betweenness
from tgforward.metrics import betweenness, metrics_table
from tgforward.model import ForwardGraph, ForwardRecord, EntityKind, build_graph
from tgforward.synthetic import graph_from_edges, table1_fixture


def as_list(g, bc):
    return [bc[k] for k in g.ids]


def test_three_node_path():
    bc = betweenness(graph_from_edges([(0, 1), (1, 2)]))
    assert bc == {"n0": 0.0, "n1": 1.0, "n2": 0.0}


def test_source_only_node_has_zero_betweenness():
    g = graph_from_edges([(0, 1), (0, 2), (1, 2), (2, 3), (3, 1)])
    assert betweenness(g)["n0"] == 0.0


def test_weights_and_self_loops_do_not_affect_paths():
    plain = graph_from_edges([(0, 1), (1, 2), (0, 2), (2, 3)])
    heavy = graph_from_edges([(0, 1, 9), (1, 2, 4), (0, 2, 1), (2, 3, 7), (1, 1, 5), (3, 3, 2)])
    assert betweenness(plain) == betweenness(heavy)


def test_split_paths_share_credit():
    # Two shortest routes 0 -> {1, 2} -> 3.
    bc = betweenness(graph_from_edges([(0, 1), (0, 2), (1, 3), (2, 3)]))
    assert bc["n1"] == bc["n2"] == 0.5


@pytest.mark.parametrize("seed", range(10))
def test_matches_brute_force_random(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 16))
    arcs = random_digraph(rng, n, float(rng.uniform(0.1, 0.4)), loops=True)
    g = graph_from_edges(arcs, n=n)
    expected = brute_betweenness(n, [(a, b) for a, b, _ in arcs])
    np.testing.assert_allclose(as_list(g, betweenness(g)), expected, atol=1e-9)


def test_matches_brute_force_six_node_sample():
    # every 6-node digraph is 2**30 cases; a dense seeded sample stands in
    rng = np.random.default_rng(66)
    pairs = [(a, b) for a in range(6) for b in range(6) if a != b]
    for _ in range(1500):
        mask = rng.random(len(pairs)) < rng.uniform(0.1, 0.9)
        arcs = [p for p, keep in zip(pairs, mask) if keep]
        g = graph_from_edges(arcs, n=6)
        np.testing.assert_allclose(as_list(g, betweenness(g)), brute_betweenness(6, arcs), atol=1e-9)


def test_parallel_blocks_give_identical_result():
    rng = np.random.default_rng(5)
    arcs = random_digraph(rng, 300, 0.01)
    g = graph_from_edges(arcs, n=300)
    serial = betweenness(g)
    assert betweenness(g, n_jobs=3) == serial
    assert betweenness(g) == serial


def test_sum_matches_pair_count_when_paths_unique():
    # On a tree oriented away from the root every shortest path is unique.
    edges = [(i, 2 * i + 1) for i in range(15)] + [(i, 2 * i + 2) for i in range(15)]
    g = graph_from_edges(edges)
    total = sum(betweenness(g).values())
    depth = [0] * 31
    for i in range(1, 31):
        depth[i] = depth[(i - 1) // 2] + 1
    # pairs (ancestor, descendant) at distance d >= 2 each contribute d - 1
    expected = sum(max(depth[t] - depth[s] - 1, 0) for t in range(31) for s in range(31)
                   if s != t and _is_ancestor(s, t))
    assert total == expected


def _is_ancestor(s, t):
    while t > s:
        t = (t - 1) // 2
    return t == s


def test_metrics_table_empty_graph():
    table = metrics_table(ForwardGraph())
    assert table.rows == {} and table.stats() == {"node_count": 0, "edge_count": 0, "total_weight": 0}


def test_metrics_table_small_graph():
    recs = [ForwardRecord(str(i), "G", EntityKind.GROUP, None, s, EntityKind.CHANNEL) for i, s in enumerate("AAB")]
    table = metrics_table(build_graph(recs))
    assert len(table.rows) == 3
    assert table.rows["g"].f == 3
    assert table.stats() == {"node_count": 3, "edge_count": 2, "total_weight": 3}
    assert all(m.betweenness == 0.0 for m in table.rows.values())


def test_metrics_table_on_table1_fixture():
    fx = table1_fixture()
    table = metrics_table(build_graph(fx.records))
    row = table.rows["jairbolsonarobrasil"]
    assert (row.in_degree, row.out_degree, row.f) == (0, 38, 1491)
    assert row.betweenness == 0.0
    assert all(m.betweenness >= 0 for m in table.rows.values())

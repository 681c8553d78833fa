import itertools

import numpy as np
import pytest

from generators import planted_communities
from oracles import best_single_move_gain, dense_adjacency, dense_modularity
from tgforward.community import louvain, modularity, singleton_partition
from tgforward.model import ForwardGraph
from tgforward.synthetic import graph_from_edges, karate_club

TRIANGLES = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]


def labels_of(g, assignment):
    return [assignment[k] for k in g.ids]


def test_one_community_is_zero():
    g = graph_from_edges([(0, 1, 3), (1, 2, 1), (2, 2, 4), (3, 0, 2)])
    assert abs(modularity(g, {k: 0 for k in g.ids})) < 1e-12


def test_two_triangles_exact_half():
    g = graph_from_edges(TRIANGLES)
    assert modularity(g, {k: int(k[1:]) // 3 for k in g.ids}) == 0.5


def test_singleton_partition_formula():
    g = graph_from_edges([(0, 1, 2), (1, 2, 1), (2, 0, 1), (0, 3, 1)])
    a = dense_adjacency(4, [(int(s[1:]), int(t[1:]), w) for (s, t), w in g.edges.items()])
    k = a.sum(axis=1)
    expected = -np.sum((k / a.sum()) ** 2)
    assert modularity(g, singleton_partition(g)) == pytest.approx(expected, abs=1e-12)
    assert expected < 0


def test_self_loop_convention_matches_dense_oracle():
    arcs = [(0, 0, 3), (0, 1, 1), (1, 0, 2), (1, 2, 1), (2, 2, 1)]
    g = graph_from_edges(arcs)
    a = dense_adjacency(3, arcs)
    for labels in itertools.product(range(2), repeat=3):
        got = modularity(g, dict(zip(g.ids, labels)))
        assert got == pytest.approx(dense_modularity(a, labels), abs=1e-12)


def test_resolution_matches_oracle():
    g = karate_club()
    p = louvain(g, resolution=0.5)
    a = dense_adjacency(34, [(int(s[1:]), int(t[1:]), w) for (s, t), w in g.edges.items()])
    assert p.modularity == pytest.approx(dense_modularity(a, labels_of(g, p.assignment), 0.5), abs=1e-12)


def test_missing_node_is_an_error():
    g = graph_from_edges(TRIANGLES)
    with pytest.raises(ValueError):
        modularity(g, {"n0": 0})


def test_edgeless_graph():
    g = graph_from_edges([], n=3)
    assert modularity(g, singleton_partition(g)) == 0.0
    p = louvain(g)
    assert p.community_count == 3


def test_empty_graph_is_an_error():
    with pytest.raises(ValueError):
        louvain(ForwardGraph())


def _two_cliques():
    left = list(itertools.combinations(range(4), 2))
    right = [(a + 4, b + 4) for a, b in left]
    return graph_from_edges(left + right + [(3, 4)])


def test_two_cliques_split_at_any_seed():
    g = _two_cliques()
    a = dense_adjacency(8, [(int(s[1:]), int(t[1:]), w) for (s, t), w in g.edges.items()])
    # exhaustive check that the clique split is the best 2-partition
    best = max(
        (dense_modularity(a, [(mask >> i) & 1 for i in range(8)]), mask)
        for mask in range(1, 2**8 - 1)
    )
    assert {best[1], 255 - best[1]} == {0b11110000, 0b00001111}
    for seed in range(10):
        p = louvain(g, seed=seed)
        assert p.communities() == [["n0", "n1", "n2", "n3"], ["n4", "n5", "n6", "n7"]]


def test_single_edge_never_below_singletons():
    g = graph_from_edges([(0, 1)])
    p = louvain(g)
    assert p.modularity >= modularity(g, singleton_partition(g))
    assert p.community_count == 1 and p.modularity == 0.0


def test_karate_club():
    g = karate_club()
    p = louvain(g)
    assert p.modularity >= 0.40
    a = dense_adjacency(34, [(int(s[1:]), int(t[1:]), w) for (s, t), w in g.edges.items()])
    labels = labels_of(g, p.assignment)
    assert abs(p.modularity - dense_modularity(a, labels)) < 1e-12
    assert best_single_move_gain(a, labels) <= 1e-9


def test_partition_invariants_and_determinism():
    rng = np.random.default_rng(8)
    g = graph_from_edges(planted_communities(rng, 120, 5, 0.2, 0.01), n=120)
    p = louvain(g, seed=3)
    labels = labels_of(g, p.assignment)
    assert sorted(set(labels)) == list(range(p.community_count))
    # canonical: labels first appear in increasing order
    first = list(dict.fromkeys(labels))
    assert first == sorted(first)
    assert louvain(g, seed=3) == p
    assert p.modularity >= modularity(g, singleton_partition(g))


def test_weight_scaling_keeps_modularity():
    rng = np.random.default_rng(9)
    arcs = planted_communities(rng, 60, 3, 0.3, 0.02)
    g1 = graph_from_edges(arcs, n=60)
    g3 = graph_from_edges([(a, b, 3 * w) for a, b, w in arcs], n=60)
    p = louvain(g1, seed=1)
    assert modularity(g3, p.assignment) == pytest.approx(p.modularity, abs=1e-12)

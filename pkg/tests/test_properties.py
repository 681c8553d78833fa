"""Property-based checks over generated graphs and record streams."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_betweenness, dense_adjacency, dense_modularity, pairwise_repulsion
from tgforward.community import louvain, modularity
from tgforward.ingest import anonymize, expansion_candidates
from tgforward.layout import quadtree_force
from tgforward.metrics import betweenness
from tgforward.model import EntityKind, ForwardRecord, build_graph, degrees, filter_min_frequency
from tgforward.synthetic import graph_from_edges

KINDS = [EntityKind.USER, EntityKind.GROUP, EntityKind.CHANNEL, EntityKind.UNKNOWN]


@st.composite
def arc_lists(draw, max_nodes=9, max_weight=4):
    n = draw(st.integers(1, max_nodes))
    arcs = draw(
        st.lists(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(1, max_weight)),
            max_size=3 * n,
        )
    )
    return n, arcs


@st.composite
def record_lists(draw):
    names = st.sampled_from(["Ana", "ana", "@Bruno", "canal_x", "Canal_X", "grupo", "zed", "Yara"])
    out = []
    for i in range(draw(st.integers(0, 40))):
        src = draw(st.one_of(st.none(), names))
        out.append(
            ForwardRecord(
                str(i),
                draw(st.sampled_from(["grupo", "Grupo2", "canal_x"])),
                draw(st.sampled_from([EntityKind.GROUP, EntityKind.CHANNEL])),
                None,
                src,
                draw(st.sampled_from(KINDS)) if src else EntityKind.UNKNOWN,
            )
        )
    return out


@settings(max_examples=150, deadline=None)
@given(arc_lists())
def test_betweenness_matches_enumeration(data):
    n, arcs = data
    g = graph_from_edges(arcs, n=n)
    got = [betweenness(g)[k] for k in g.ids]
    np.testing.assert_allclose(got, brute_betweenness(n, [(a, b) for a, b, _ in arcs]), atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(arc_lists(max_nodes=12))
def test_louvain_reports_true_modularity(data):
    n, arcs = data
    g = graph_from_edges(arcs, n=n)
    p = louvain(g, seed=n)
    labels = [p.assignment[k] for k in g.ids]
    assert abs(p.modularity - dense_modularity(dense_adjacency(n, arcs), labels)) < 1e-12
    assert abs(modularity(g, {k: 0 for k in g.ids})) < 1e-12


@settings(max_examples=100, deadline=None)
@given(record_lists(), st.randoms(use_true_random=False))
def test_build_graph_order_free_and_conserving(records, rnd):
    shuffled = list(records)
    rnd.shuffle(shuffled)
    g = build_graph(records)
    assert build_graph(shuffled) == g
    assert g.total_weight == sum(1 for r in records if r.is_forward)
    d = degrees(g)
    assert sum(m.weighted_in for m in d.values()) == g.total_weight


@settings(max_examples=100, deadline=None)
@given(arc_lists(max_weight=30), st.integers(0, 60))
def test_min_frequency_filter_idempotent(data, threshold):
    n, arcs = data
    once = filter_min_frequency(graph_from_edges(arcs, n=n), threshold)
    assert filter_min_frequency(once, threshold) == once


@settings(max_examples=100, deadline=None)
@given(record_lists(), st.integers(1, 10), st.integers(1, 10))
def test_expansion_nested(records, t1, t2):
    lo, hi = sorted((t1, t2))
    assert set(expansion_candidates(records, hi).usernames()) <= set(expansion_candidates(records, lo).usernames())


@settings(max_examples=100, deadline=None)
@given(record_lists())
def test_anonymize_preserves_graph_shape(records):
    g0 = build_graph(records)
    g1 = build_graph(anonymize(records, b"k"))
    assert g1.node_count == g0.node_count
    assert sorted(g1.edges.values()) == sorted(g0.edges.values())
    assert sorted(d.f for d in degrees(g1).values()) == sorted(d.f for d in degrees(g0).values())


# Coordinates on a 1/8 grid: distinct points stay far enough apart that the
# squared distance never underflows.
coord = st.integers(-8000, 8000).map(lambda v: v / 8)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(coord, coord), min_size=1, max_size=40),
    st.tuples(coord, coord),
)
def test_quadtree_theta_zero_exact(points, query):
    got = quadtree_force(points, query, 0.0)
    want = pairwise_repulsion(points, query)
    assert np.allclose(got, want, rtol=1e-9, atol=1e-9)

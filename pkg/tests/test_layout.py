import numpy as np
import pytest

from oracles import pairwise_repulsion
from tgforward.layout import (
    LayoutParams,
    QuadTree,
    exact_repulsion,
    quadtree_force,
    spring_electrical_forces,
    yifan_hu,
)
from tgforward.model import ForwardGraph
from tgforward.synthetic import graph_from_edges


def grid(side):
    edges = []
    for r in range(side):
        for c in range(side):
            v = r * side + c
            if c + 1 < side:
                edges.append((v, v + 1))
            if r + 1 < side:
                edges.append((v, v + side))
    return graph_from_edges(edges)


def coords(layout):
    return np.array(list(layout.coordinates.values()))


def test_params_validation():
    with pytest.raises(ValueError):
        LayoutParams(step_ratio=1.0)
    with pytest.raises(ValueError):
        LayoutParams(barnes_hut_theta=0)
    with pytest.raises(ValueError):
        LayoutParams(initial_step=-1)
    assert LayoutParams().optimal_distance(100) == pytest.approx(100.0)


def test_theta_zero_is_exact():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(300, 2)) * [50, 5]
    for q in pts[:20]:
        np.testing.assert_allclose(quadtree_force(pts, q, 0.0), pairwise_repulsion(pts, q), rtol=0, atol=1e-9)


def test_single_far_point():
    f = quadtree_force([[0.0, 0.0]], [1e3, -2e3], 1.2)
    np.testing.assert_allclose(f, pairwise_repulsion([[0.0, 0.0]], [1e3, -2e3]), rtol=0, atol=1e-12)


def test_theta_1_2_within_five_percent():
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 1000, size=(500, 2))
    approx = QuadTree(pts).self_repulsion(1.2)
    exact = exact_repulsion(pts)
    rel = np.linalg.norm(approx - exact, axis=1) / np.linalg.norm(exact, axis=1)
    assert rel.max() < 0.05


def test_theta_1_2_clustered_points():
    rng = np.random.default_rng(2)
    centres = rng.uniform(-500, 500, size=(10, 2))
    pts = np.concatenate([c + rng.normal(scale=20, size=(60, 2)) for c in centres])
    approx = QuadTree(pts).self_repulsion(1.2)
    exact = exact_repulsion(pts)
    # Forces near a cluster centre nearly cancel, so errors are measured
    # against the typical force magnitude rather than each point's own.
    scale = np.sqrt(np.mean(np.sum(exact**2, axis=1)))
    assert (np.linalg.norm(approx - exact, axis=1) / scale).max() < 0.01


def test_coincident_points_contribute_nothing():
    pts = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
    f = QuadTree(pts).self_repulsion(0.0)
    assert np.isfinite(f).all()
    np.testing.assert_allclose(f[2], [2.0, 0.0])


def test_forces_translation_invariant():
    rng = np.random.default_rng(3)
    pos = rng.uniform(0, 100, size=(80, 2))
    edges = np.array([[i, i + 1] for i in range(79)])
    a = spring_electrical_forces(pos, edges, 10.0, 0.2, 0.0)
    b = spring_electrical_forces(pos + [1234.5, -77.25], edges, 10.0, 0.2, 0.0)
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)


def test_single_node_and_empty_graph():
    lay = yifan_hu(graph_from_edges([], n=1))
    assert lay.coordinates == {"n0": (0.0, 0.0)}
    assert lay.iterations_used == 0 and lay.final_energy == 0.0
    with pytest.raises(ValueError):
        yifan_hu(ForwardGraph())


@pytest.mark.parametrize("seed", range(4))
def test_two_nodes_reach_force_balance(seed):
    params = LayoutParams(seed=seed)
    lay = yifan_hu(graph_from_edges([(0, 1)]), params)
    k = params.optimal_distance(2)
    d_star = params.relative_strength ** (1 / 3) * k
    d = np.linalg.norm(np.subtract(*coords(lay)))
    assert abs(d - d_star) / d_star < 0.05


def test_grid_converges_with_finite_coordinates():
    lay = yifan_hu(grid(20))
    assert lay.converged and lay.iterations_used <= 1000
    xy = coords(lay)
    assert np.isfinite(xy).all()
    assert len({tuple(p) for p in xy}) == len(xy)
    assert lay.final_energy <= lay.initial_energy


def test_seeded_determinism():
    g = grid(8)
    a, b = yifan_hu(g, LayoutParams(seed=4)), yifan_hu(g, LayoutParams(seed=4))
    assert a == b
    c = yifan_hu(g, LayoutParams(seed=5))
    assert c.coordinates != a.coordinates


def test_iteration_cap_is_respected():
    lay = yifan_hu(grid(6), LayoutParams(max_iterations=3))
    assert lay.iterations_used == 3 and not lay.converged
    assert np.isfinite(coords(lay)).all()

# Yifan-Hu layout with a Barnes-Hut repulsion tree.

import numpy as np

from tgforward.layout import LayoutParams, QuadTree, exact_repulsion, yifan_hu
from tgforward.synthetic import graph_from_edges, karate_club

# Two connected nodes settle where spring and repulsion balance.
params = LayoutParams()
lay = yifan_hu(graph_from_edges([(0, 1)]), params)
(x0, y0), (x1, y1) = lay.coordinates.values()
d_star = params.relative_strength ** (1 / 3) * params.optimal_distance(2)
print("two nodes:", round(np.hypot(x1 - x0, y1 - y0), 2), "expected", round(d_star, 2))

# theta trades accuracy for speed
rng = np.random.default_rng(0)
pts = rng.uniform(-1000, 1000, size=(2000, 2))
exact = exact_repulsion(pts)
tree = QuadTree(pts)
for theta in (0.0, 0.6, 1.2):
    approx = tree.self_repulsion(theta)
    err = np.linalg.norm(approx - exact, axis=1) / np.linalg.norm(exact, axis=1)
    print(f"theta {theta}: median error {np.median(err):.2e}, max {err.max():.2e}")

lay = yifan_hu(karate_club(), LayoutParams(seed=4))
print("karate:", lay.iterations_used, "iterations, converged", lay.converged)
xy = np.array(list(lay.coordinates.values()))
print("extent", xy.min(axis=0).round(1), xy.max(axis=0).round(1))

# same seed, same coordinates
again = yifan_hu(karate_club(), LayoutParams(seed=4))
print("reproducible:", again.coordinates == lay.coordinates)

# Louvain communities on the karate club and on planted clusters.

import numpy as np

from tgforward.community import louvain, modularity
from tgforward.synthetic import graph_from_edges, karate_club

p = louvain(karate_club())
print("karate club:", p.community_count, "communities, Q =", round(p.modularity, 4))
for i, members in enumerate(p.communities()):
    print(i, sorted(members, key=lambda k: int(k[1:])))

# Everything in one community always scores zero.
g = karate_club()
print("one community Q =", modularity(g, {k: 0 for k in g.ids}))

# four planted blocks of 25 nodes, dense inside, sparse across
rng = np.random.default_rng(3)
arcs = []
for a in range(100):
    for b in range(100):
        same = a // 25 == b // 25
        if a != b and rng.random() < (0.3 if same else 0.01):
            arcs.append((a, b, int(rng.integers(1, 5))))
g = graph_from_edges(arcs, n=100)
for resolution in (0.5, 1.0, 2.0):
    p = louvain(g, resolution=resolution, seed=1)
    print(f"resolution {resolution}: {p.community_count} communities, Q = {p.modularity:.4f}")

# Degrees, frequency and betweenness on a toy forwarding graph.

import numpy as np

from tgforward.metrics import betweenness, metrics_table
from tgforward.synthetic import graph_from_edges

# a directed path: node i sits on (i-1)*(n-i) shortest paths
g = graph_from_edges([(i, i + 1) for i in range(6)])
bc = betweenness(g)
print({k: v for k, v in bc.items()})

# a hub that forwards from three channels into three groups
edges = [(0, 3), (1, 3), (2, 3), (3, 4), (3, 5), (3, 6), (0, 1)]
weights = [5, 2, 9, 1, 1, 4, 3]
g = graph_from_edges([(a, b, w) for (a, b), w in zip(edges, weights)])
table = metrics_table(g)
print("node  in out  w_in w_out   f   betweenness")
for k, m in table.rows.items():
    print(f"{k:4s} {m.in_degree:3d} {m.out_degree:3d} {m.weighted_in:5d} {m.weighted_out:5d} {m.f:4d} {m.betweenness:8.1f}")

# weights do not change shortest paths: every arc counts as one hop
hub = table.rows["n3"]
assert hub.betweenness == 9.0
print(table.stats())

# larger random graph, timed
rng = np.random.default_rng(0)
arcs = [(int(a), int(b)) for a, b in rng.integers(0, 2000, size=(8000, 2)) if a != b]
big = graph_from_edges(arcs, n=2000)
bc = betweenness(big)
top = sorted(bc, key=bc.get, reverse=True)[:5]
print("top brokers:", [(k, round(bc[k])) for k in top])

"""Betweenness centrality and per-node metric tables."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import ForwardGraph, NodeMetrics, degrees

# Sources are processed in fixed blocks; block partials are summed in block
# order, so the result does not depend on the number of workers.
BLOCK = 64


def _gather(indptr: np.ndarray, indices: np.ndarray, frontier: np.ndarray):
    starts = indptr[frontier]
    counts = indptr[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    parents = np.repeat(frontier, counts)
    offsets = np.repeat(starts - np.cumsum(counts) + counts, counts)
    return parents, indices[offsets + np.arange(total)]


def _accumulate(n: int, indptr: np.ndarray, indices: np.ndarray, sources) -> np.ndarray:
    bc = np.zeros(n)
    for s in sources:
        dist = np.full(n, -1, dtype=np.int64)
        sigma = np.zeros(n)
        dist[s] = 0
        sigma[s] = 1.0
        frontier = np.array([s], dtype=np.int64)
        level_edges = []
        d = 0
        while frontier.size:
            par, nb = _gather(indptr, indices, frontier)
            fresh = nb[dist[nb] < 0]
            if fresh.size:
                fresh = np.unique(fresh)
                dist[fresh] = d + 1
            on_path = dist[nb] == d + 1
            par, nb = par[on_path], nb[on_path]
            if par.size:
                sigma += np.bincount(nb, weights=sigma[par], minlength=n)
                level_edges.append((par, nb))
            frontier = fresh
            d += 1
        delta = np.zeros(n)
        for par, nb in reversed(level_edges):
            delta += np.bincount(par, weights=sigma[par] / sigma[nb] * (1.0 + delta[nb]), minlength=n)
        delta[s] = 0.0
        bc += delta
    return bc


def betweenness(graph: ForwardGraph, n_jobs: int = 1) -> dict[str, float]:
    """Unnormalized directed betweenness over hop-count shortest paths.

    Brandes' algorithm: one BFS per source counts shortest paths, then
    dependencies are back-propagated level by level. Edge weights and
    self-loops play no part in path counting.
    """
    n = graph.node_count
    if n == 0:
        return {}
    indptr, indices = graph.csr(self_loops=False)
    blocks = [range(i, min(i + BLOCK, n)) for i in range(0, n, BLOCK)]
    if n_jobs > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            partials = list(pool.map(lambda b: _accumulate(n, indptr, indices, b), blocks))
    else:
        partials = [_accumulate(n, indptr, indices, b) for b in blocks]
    total = np.zeros(n)
    for part in partials:
        total += part
    return {k: float(v) for k, v in zip(graph.ids, total)}


@dataclass
class MetricsTable:
    rows: dict[str, NodeMetrics] = field(default_factory=dict)
    node_count: int = 0
    edge_count: int = 0
    total_weight: int = 0

    def stats(self) -> dict:
        return {
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "total_weight": self.total_weight,
        }


def metrics_table(graph: ForwardGraph, n_jobs: int = 1) -> MetricsTable:
    rows = degrees(graph)
    for k, bc in betweenness(graph, n_jobs=n_jobs).items():
        rows[k].betweenness = bc
    return MetricsTable(rows, graph.node_count, graph.edge_count, graph.total_weight)

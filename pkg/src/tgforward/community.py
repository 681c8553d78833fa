"""Louvain community detection on the undirected projection of a ForwardGraph.

Conventions for the projection: the weight between two distinct nodes is
the sum of both directions' weights; a self-loop of weight ``w`` is kept
once in the total weight ``m`` and adds ``2w`` to its node's strength.
"""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping

from .model import ForwardGraph

MIN_GAIN = 1e-9


@dataclass(frozen=True)
class Partition:
    assignment: dict[str, int]
    community_count: int
    modularity: float
    resolution: float = 1.0

    def communities(self) -> list[list[str]]:
        groups: list[list[str]] = [[] for _ in range(self.community_count)]
        for node, c in self.assignment.items():
            groups[c].append(node)
        return groups


class _Level:
    """Weighted undirected graph on 0..n-1 used at each Louvain level."""

    def __init__(self, n: int):
        self.n = n
        self.adj: list[dict[int, float]] = [dict() for _ in range(n)]
        self.loops = [0.0] * n

    def add(self, i: int, j: int, w: float) -> None:
        if i == j:
            self.loops[i] += w
        else:
            self.adj[i][j] = self.adj[i].get(j, 0.0) + w
            self.adj[j][i] = self.adj[j].get(i, 0.0) + w

    def strengths(self) -> list[float]:
        return [sum(nbrs.values()) + 2.0 * loop for nbrs, loop in zip(self.adj, self.loops)]

    def total(self) -> float:
        return sum(self.loops) + sum(sum(nbrs.values()) for nbrs in self.adj) / 2.0


def projection(graph: ForwardGraph) -> _Level:
    level = _Level(graph.node_count)
    idx = graph.index
    for (s, t), w in graph.edges.items():
        level.add(idx[s], idx[t], float(w))
    return level


def _q(level: _Level, labels: list[int], resolution: float) -> float:
    m = level.total()
    if m == 0:
        return 0.0
    internal: dict[int, float] = defaultdict(float)
    strength: dict[int, float] = defaultdict(float)
    k = level.strengths()
    for i in range(level.n):
        c = labels[i]
        strength[c] += k[i]
        internal[c] += level.loops[i]
        for j, w in level.adj[i].items():
            if j > i and labels[j] == c:
                internal[c] += w
    q = 0.0
    for c in sorted(strength):
        q += internal[c] / m - resolution * (strength[c] / (2.0 * m)) ** 2
    return q


def modularity(graph: ForwardGraph, assignment: Mapping[str, int], resolution: float = 1.0) -> float:
    """Weighted modularity of ``assignment`` on the undirected projection.

    Returns 0.0 for a graph without edges.
    """
    missing = [k for k in graph.nodes if k not in assignment]
    if missing:
        raise ValueError(f"assignment is missing {len(missing)} node(s), e.g. {missing[0]!r}")
    labels = [assignment[k] for k in graph.ids]
    return _q(projection(graph), labels, resolution)


def _move_nodes(level: _Level, labels: list[int], resolution: float, rng: random.Random) -> bool:
    """Local moving phase. Mutates ``labels``; returns True if any node moved."""
    m = level.total()
    if m == 0:
        return False
    k = level.strengths()
    tot: dict[int, float] = defaultdict(float)
    for i, c in enumerate(labels):
        tot[c] += k[i]
    order = list(range(level.n))
    rng.shuffle(order)
    scale = resolution / (2.0 * m * m)
    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            ci, ki = labels[i], k[i]
            links: dict[int, float] = defaultdict(float)
            for j, w in level.adj[i].items():
                links[labels[j]] += w
            tot[ci] -= ki
            stay = links.get(ci, 0.0) / m - scale * ki * tot[ci]
            best, best_gain = ci, 0.0
            for c in sorted(links):
                if c == ci:
                    continue
                gain = links[c] / m - scale * ki * tot[c] - stay
                if gain > best_gain:
                    best, best_gain = c, gain
            if best != ci and best_gain <= MIN_GAIN:
                best = ci
            tot[best] += ki
            if best != ci:
                labels[i] = best
                improved = moved_any = True
    return moved_any


def _aggregate(level: _Level, labels: list[int]) -> tuple[_Level, list[int]]:
    """Collapse communities into nodes; returns the coarse graph and dense labels."""
    relabel: dict[int, int] = {}
    dense = []
    for c in labels:
        if c not in relabel:
            relabel[c] = len(relabel)
        dense.append(relabel[c])
    coarse = _Level(len(relabel))
    for i in range(level.n):
        ci = dense[i]
        if level.loops[i]:
            coarse.add(ci, ci, level.loops[i])
        for j, w in level.adj[i].items():
            if j > i:
                coarse.add(ci, dense[j], w)
    return coarse, dense


def _canonical(labels: list[int]) -> list[int]:
    first: dict[int, int] = {}
    return [first.setdefault(c, len(first)) for c in labels]


def louvain(graph: ForwardGraph, resolution: float = 1.0, seed: int = 0) -> Partition:
    """Two-phase Louvain: local moving then aggregation, until nothing moves.

    A final local-moving pass on the original nodes guarantees that no single
    node can gain more than ``MIN_GAIN`` by joining a neighbouring community.
    Labels are renumbered by first appearance in node-id order.
    """
    if graph.node_count == 0:
        raise ValueError("louvain needs a non-empty graph")
    rng = random.Random(seed)
    base = projection(graph)
    membership = list(range(base.n))
    level = base
    while True:
        labels = list(range(level.n))
        if not _move_nodes(level, labels, resolution, rng):
            break
        level, dense = _aggregate(level, labels)
        membership = [dense[c] for c in membership]
        if level.n == 1:
            break
    _move_nodes(base, membership, resolution, rng)
    labels = _canonical(membership)
    assignment = dict(zip(graph.ids, labels))
    q = _q(base, labels, resolution)
    return Partition(assignment, max(labels) + 1, q, resolution)


def singleton_partition(graph: ForwardGraph) -> dict[str, int]:
    return {k: i for i, k in enumerate(graph.ids)}

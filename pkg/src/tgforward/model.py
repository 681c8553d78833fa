"""Domain types and the directed, weighted forwarding graph.

An edge ``source -> destination`` means that ``destination`` (a group or
channel) posted a message originally authored by ``source``. Parallel
forwards along the same pair are aggregated into the edge weight.
"""

from __future__ import annotations

import enum
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime
from functools import cached_property, lru_cache
from typing import Iterable, Mapping

import numpy as np


class EntityKind(str, enum.Enum):
    USER = "user"
    GROUP = "group"
    CHANNEL = "channel"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, value) -> "EntityKind":
        """Parse a kind tag leniently; empty or missing values map to UNKNOWN."""
        if isinstance(value, EntityKind):
            return value
        if value in _KIND_ALIASES:
            return _KIND_ALIASES[value]
        if value is None:
            return cls.UNKNOWN
        text = str(value).strip().lower()
        if not text:
            return cls.UNKNOWN
        if text in _KIND_ALIASES:
            return _KIND_ALIASES[text]
        raise ValueError(f"unknown entity kind: {value!r}")


_KIND_ALIASES = {
    "user": EntityKind.USER,
    "bot": EntityKind.USER,
    "group": EntityKind.GROUP,
    "supergroup": EntityKind.GROUP,
    "megagroup": EntityKind.GROUP,
    "chat": EntityKind.GROUP,
    "channel": EntityKind.CHANNEL,
    "broadcast": EntityKind.CHANNEL,
    "unknown": EntityKind.UNKNOWN,
}

# Resolution order when the same username is seen with different kinds.
_KIND_RANK = {
    EntityKind.UNKNOWN: 0,
    EntityKind.USER: 1,
    EntityKind.GROUP: 2,
    EntityKind.CHANNEL: 3,
}


def merge_kinds(a: EntityKind, b: EntityKind) -> EntityKind:
    """Combine two observations of the same entity's kind.

    Any known kind beats UNKNOWN. Conflicting known kinds resolve by a fixed
    rank so the result never depends on record order.
    """
    return a if _KIND_RANK[a] >= _KIND_RANK[b] else b


@lru_cache(maxsize=1 << 16)
def entity_id(username: str) -> str:
    """Canonical identity of a username: handles are case-insensitive."""
    return username.strip().lstrip("@").lower()


@dataclass(frozen=True, slots=True)
class Entity:
    id: str
    username: str
    kind: EntityKind = EntityKind.UNKNOWN


@dataclass(frozen=True, slots=True)
class ForwardRecord:
    message_id: str
    chat: str
    chat_kind: EntityKind
    posted_at: datetime | None = None
    forward_source: str | None = None
    forward_source_kind: EntityKind = EntityKind.UNKNOWN

    @property
    def is_forward(self) -> bool:
        return bool(self.forward_source and self.forward_source.strip())


@dataclass(slots=True)
class NodeMetrics:
    in_degree: int = 0
    out_degree: int = 0
    weighted_in: int = 0
    weighted_out: int = 0
    betweenness: float | None = None

    @property
    def f(self) -> int:
        return self.weighted_in + self.weighted_out


def kind_registry(records: Iterable[ForwardRecord]) -> dict[str, EntityKind]:
    """Map entity id -> resolved kind from every chat and source observation."""
    registry: dict[str, EntityKind] = {}

    def note(name: str, kind: EntityKind) -> None:
        key = entity_id(name)
        seen = registry.get(key)
        registry[key] = kind if seen is None else merge_kinds(seen, kind)

    for rec in records:
        note(rec.chat, rec.chat_kind)
        if rec.is_forward:
            note(rec.forward_source, rec.forward_source_kind)
    return registry


@dataclass(frozen=True)
class ForwardGraph:
    """Immutable directed weighted graph keyed by entity id.

    ``nodes`` and ``edges`` are stored sorted (by id, then by pair) so that
    iteration order is a function of content only.
    """

    nodes: Mapping[str, Entity] = field(default_factory=dict)
    edges: Mapping[tuple[str, str], int] = field(default_factory=dict)
    skipped: Mapping[str, int] = field(default_factory=dict)
    directed: bool = True

    def __post_init__(self):
        nodes = {k: self.nodes[k] for k in sorted(self.nodes)}
        edges = {k: int(self.edges[k]) for k in sorted(self.edges)}
        for (s, t), w in edges.items():
            if s not in nodes or t not in nodes:
                raise ValueError(f"edge ({s!r}, {t!r}) references an unknown node")
            if w < 1:
                raise ValueError(f"edge ({s!r}, {t!r}) has weight {w} < 1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "skipped", dict(sorted(self.skipped.items())))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> int:
        return sum(self.edges.values())

    @cached_property
    def ids(self) -> list[str]:
        return list(self.nodes)

    @cached_property
    def index(self) -> dict[str, int]:
        return {k: i for i, k in enumerate(self.nodes)}

    @cached_property
    def successors(self) -> dict[str, tuple[str, ...]]:
        out = defaultdict(list)
        for s, t in self.edges:
            out[s].append(t)
        return {k: tuple(out.get(k, ())) for k in self.nodes}

    @cached_property
    def predecessors(self) -> dict[str, tuple[str, ...]]:
        inc = defaultdict(list)
        for s, t in self.edges:
            inc[t].append(s)
        return {k: tuple(sorted(inc.get(k, ()))) for k in self.nodes}

    def csr(self, self_loops: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Out-adjacency in CSR form over node indices: ``(indptr, indices)``."""
        n = len(self.nodes)
        idx = self.index
        src = np.fromiter((idx[s] for s, t in self.edges if self_loops or s != t), dtype=np.int64)
        dst = np.fromiter((idx[t] for s, t in self.edges if self_loops or s != t), dtype=np.int64)
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return indptr, dst

    def subgraph(self, keep: Iterable[str]) -> "ForwardGraph":
        keep = set(keep)
        return ForwardGraph(
            nodes={k: v for k, v in self.nodes.items() if k in keep},
            edges={e: w for e, w in self.edges.items() if e[0] in keep and e[1] in keep},
        )


def build_graph(
    records: Iterable[ForwardRecord],
    registry: Mapping[str, EntityKind] | None = None,
) -> ForwardGraph:
    """Aggregate forward records into a ForwardGraph.

    Every chat and every forward source becomes a node; each distinct
    ``(forward_source, chat)`` pair becomes an edge whose weight is the
    number of records carrying it. Records posted in a USER chat are
    rejected and tallied under ``graph.skipped``.

    ``registry`` overrides kinds observed in the records; ids missing from it
    fall back to the observed kind.
    """
    records = list(records)
    observed = kind_registry(r for r in records if r.chat_kind != EntityKind.USER)
    registry = {entity_id(k): v for k, v in (registry or {}).items()}
    skipped: Counter[str] = Counter()
    spellings: dict[str, str] = {}
    weights: Counter[tuple[str, str]] = Counter()

    def note(name: str) -> str:
        name = name.strip().lstrip("@")
        key = name.lower()
        # Display spelling is the lexicographic minimum so record order is irrelevant.
        if key not in spellings or name < spellings[key]:
            spellings[key] = name
        return key

    for rec in records:
        if not rec.chat or not rec.chat.strip():
            skipped["missing chat"] += 1
            continue
        if rec.chat_kind == EntityKind.USER:
            skipped["user chat"] += 1
            continue
        dst = note(rec.chat)
        if rec.is_forward:
            weights[(note(rec.forward_source), dst)] += 1

    nodes = {
        key: Entity(key, name, registry.get(key, observed.get(key, EntityKind.UNKNOWN)))
        for key, name in spellings.items()
    }
    return ForwardGraph(nodes=nodes, edges=dict(weights), skipped=dict(skipped))


def degrees(graph: ForwardGraph) -> dict[str, NodeMetrics]:
    """Unique-neighbour and weighted degrees for every node.

    Unique-neighbour degrees ignore self-loops; weighted degrees include
    them, so the weighted totals always balance against the edge weights.
    """
    out = {k: NodeMetrics() for k in graph.nodes}
    for (s, t), w in graph.edges.items():
        out[s].weighted_out += w
        out[t].weighted_in += w
        if s != t:
            out[s].out_degree += 1
            out[t].in_degree += 1
    return out


def filter_min_frequency(graph: ForwardGraph, min_f: int) -> ForwardGraph:
    """Subgraph on nodes whose frequency ``f`` is at least ``min_f``.

    Dropping a node lowers its neighbours' frequencies, so the filter is
    repeated until every surviving node satisfies the threshold within the
    returned graph. This makes the operation idempotent.
    """
    if min_f < 0:
        raise ValueError("min_f must be >= 0")
    current = graph
    while True:
        metrics = degrees(current)
        keep = [k for k, m in metrics.items() if m.f >= min_f]
        if len(keep) == len(current.nodes):
            return current
        current = current.subgraph(keep)

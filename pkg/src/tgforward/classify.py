"""Key-user role assignment for channels of a forwarding network.

Stage 1 assigns degree roles from each eligible channel's unique in/out
degrees. Stage 2 assigns structural roles to channels left over, based on
their direct adjacency to Stage-1 influencers and active engagers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .metrics import MetricsTable
from .model import EntityKind, ForwardGraph


class Role(str, enum.Enum):
    CONVERSATION_STARTER = "Conversation starter"
    INFLUENCER = "Influencer"
    ACTIVE_ENGAGER = "Active engager"
    NETWORK_CREATOR = "Network creator"
    INFORMATION_BRIDGE = "Information bridge"
    NONE = "None"

    @classmethod
    def parse(cls, value: str) -> "Role":
        text = value.strip().lower().replace("_", " ")
        if text == "influenciador":
            return cls.INFLUENCER
        for role in cls:
            if role.value.lower() == text or role.name.lower().replace("_", " ") == text:
                return role
        raise ValueError(f"unknown role: {value!r}")


@dataclass(frozen=True)
class RoleConfig:
    high_out_percentile: float = 0.75
    high_in_percentile: float = 0.75
    cs_max_ratio: float = 0.15
    ae_min_ratio: float = 4.0
    influencer_min_in: int = 5
    min_frequency: int = 50
    # Absolute mode: when set, these replace the percentile thresholds.
    high_out: float | None = None
    high_in: float | None = None

    def __post_init__(self):
        for name in ("high_out_percentile", "high_in_percentile"):
            p = getattr(self, name)
            if not 0 < p <= 1:
                raise ValueError(f"{name} must be in (0, 1], got {p}")
        if self.cs_max_ratio <= 0 or self.ae_min_ratio <= 0:
            raise ValueError("ratio thresholds must be positive")
        if self.cs_max_ratio >= self.ae_min_ratio:
            raise ValueError("cs_max_ratio must be below ae_min_ratio")
        if self.influencer_min_in <= 0 or self.min_frequency <= 0:
            raise ValueError("influencer_min_in and min_frequency must be positive")
        for name in ("high_out", "high_in"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class RoleAssignment:
    entity: str
    role: Role
    f: int
    in_degree: int
    out_degree: int
    ratio: float
    influencers: tuple[str, ...] = ()
    engager: str | None = None


@dataclass(frozen=True)
class Thresholds:
    high_out: float
    high_in: float


def eligible_nodes(graph: ForwardGraph, metrics: MetricsTable, config: RoleConfig) -> set[str]:
    """Channels whose frequency reaches ``config.min_frequency``."""
    return {
        k
        for k, ent in graph.nodes.items()
        if ent.kind == EntityKind.CHANNEL and metrics.rows[k].f >= config.min_frequency
    }


def thresholds(metrics: MetricsTable, eligible, config: RoleConfig) -> Thresholds:
    """High-degree cut-offs: absolute values if configured, else percentiles over ``eligible``."""
    nodes = sorted(eligible)
    outs = np.array([metrics.rows[k].out_degree for k in nodes], dtype=float)
    ins = np.array([metrics.rows[k].in_degree for k in nodes], dtype=float)
    hi_out = config.high_out
    if hi_out is None:
        hi_out = float(np.quantile(outs, config.high_out_percentile)) if len(nodes) else 0.0
    hi_in = config.high_in
    if hi_in is None:
        hi_in = float(np.quantile(ins, config.high_in_percentile)) if len(nodes) else 0.0
    return Thresholds(hi_out, hi_in)


def degree_ratio(in_degree: int, out_degree: int) -> float:
    return in_degree / max(out_degree, 1)


def degree_role(in_degree: int, out_degree: int, cut: Thresholds, config: RoleConfig) -> Role:
    r = degree_ratio(in_degree, out_degree)
    if out_degree >= cut.high_out and r <= config.cs_max_ratio:
        return Role.CONVERSATION_STARTER
    if in_degree >= cut.high_in and r >= config.ae_min_ratio:
        return Role.ACTIVE_ENGAGER
    if (
        out_degree >= cut.high_out
        and in_degree >= config.influencer_min_in
        and config.cs_max_ratio < r < config.ae_min_ratio
    ):
        return Role.INFLUENCER
    return Role.NONE


def classify(graph: ForwardGraph, metrics: MetricsTable, config: RoleConfig | None = None) -> list[RoleAssignment]:
    """One role per eligible channel, sorted by frequency (descending), then id."""
    config = config or RoleConfig()
    missing = [k for k in graph.nodes if k not in metrics.rows]
    if missing:
        raise ValueError(f"metrics table does not cover node {missing[0]!r}")
    eligible = eligible_nodes(graph, metrics, config)
    if not eligible:
        return []
    cut = thresholds(metrics, eligible, config)

    roles: dict[str, Role] = {}
    for k in sorted(eligible):
        row = metrics.rows[k]
        roles[k] = degree_role(row.in_degree, row.out_degree, cut, config)
    influencers = {k for k, r in roles.items() if r == Role.INFLUENCER}
    engagers = {k for k, r in roles.items() if r == Role.ACTIVE_ENGAGER}

    succ, pred = graph.successors, graph.predecessors
    evidence: dict[str, dict] = {}
    for k in sorted(eligible):
        if roles[k] != Role.NONE:
            continue
        out_n = {t for t in succ[k] if t != k}
        in_n = {s for s in pred[k] if s != k}
        linked = sorted((out_n | in_n) & influencers)
        if len(linked) >= 2:
            roles[k] = Role.NETWORK_CREATOR
            evidence[k] = {"influencers": tuple(linked)}
            continue
        # influencer -> k -> engager, or engager -> k -> influencer
        pairs = [(e, i) for i in sorted(in_n & influencers) for e in sorted(out_n & engagers)]
        pairs += [(e, i) for e in sorted(in_n & engagers) for i in sorted(out_n & influencers)]
        if pairs:
            e, i = min(pairs)
            roles[k] = Role.INFORMATION_BRIDGE
            evidence[k] = {"influencers": (i,), "engager": e}

    out = []
    for k, role in roles.items():
        row = metrics.rows[k]
        out.append(
            RoleAssignment(
                entity=k,
                role=role,
                f=row.f,
                in_degree=row.in_degree,
                out_degree=row.out_degree,
                ratio=degree_ratio(row.in_degree, row.out_degree),
                **evidence.get(k, {}),
            )
        )
    out.sort(key=lambda a: (-a.f, a.entity))
    return out

"""Forwarded-message networks from Telegram exports: metrics, communities, key-user roles."""

from .classify import Role, RoleAssignment, RoleConfig, classify, eligible_nodes
from .community import Partition, louvain, modularity
from .ingest import (
    ExpansionPlan,
    IngestReport,
    anonymize,
    expansion_candidates,
    filter_forwarded,
    parse_export,
)
from .layout import Layout, LayoutParams, quadtree_force, yifan_hu
from .metrics import MetricsTable, betweenness, metrics_table
from .model import (
    Entity,
    EntityKind,
    ForwardGraph,
    ForwardRecord,
    NodeMetrics,
    build_graph,
    degrees,
    filter_min_frequency,
)

__version__ = "0.1.0"

__all__ = [
    "Entity",
    "EntityKind",
    "ExpansionPlan",
    "ForwardGraph",
    "ForwardRecord",
    "IngestReport",
    "Layout",
    "LayoutParams",
    "MetricsTable",
    "NodeMetrics",
    "Partition",
    "Role",
    "RoleAssignment",
    "RoleConfig",
    "anonymize",
    "betweenness",
    "build_graph",
    "classify",
    "degrees",
    "eligible_nodes",
    "expansion_candidates",
    "filter_forwarded",
    "filter_min_frequency",
    "louvain",
    "metrics_table",
    "modularity",
    "parse_export",
    "quadtree_force",
    "yifan_hu",
]

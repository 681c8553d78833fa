"""Writers (and a GEXF reader) for graphs, metrics, partitions, roles and layouts."""

from __future__ import annotations

import csv
import io
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .classify import Role, RoleAssignment
from .community import Partition
from .layout import Layout
from .metrics import MetricsTable
from .model import Entity, EntityKind, ForwardGraph, NodeMetrics

GEXF_NS = "http://gexf.net/1.2"
VIZ_NS = "http://gexf.net/1.2/viz"
MIN_SIZE = 1.0
MAX_SIZE = 50.0
INELIGIBLE = "ineligible"

REPORT_HEADER = ["Channel", "Type", "f", "in_degree", "out_degree", "betweenness", "community"]

NODE_ATTRS = [
    ("kind", "string"),
    ("f", "long"),
    ("in_degree", "long"),
    ("out_degree", "long"),
    ("weighted_in", "long"),
    ("weighted_out", "long"),
    ("betweenness", "double"),
    ("community", "integer"),
    ("role", "string"),
]

ROLE_COLORS = {
    Role.CONVERSATION_STARTER: "#d62728",
    Role.INFLUENCER: "#1f77b4",
    Role.ACTIVE_ENGAGER: "#2ca02c",
    Role.NETWORK_CREATOR: "#9467bd",
    Role.INFORMATION_BRIDGE: "#ff7f0e",
    Role.NONE: "#c7c7c7",
}
DEFAULT_COLOR = "#ffffff"


class ExportError(Exception):
    pass


@dataclass(frozen=True)
class KeyUserRow:
    channel: str
    type: Role
    f: int
    in_degree: int
    out_degree: int
    betweenness: float
    community: int


@dataclass
class GexfBundle:
    graph: ForwardGraph
    metrics: MetricsTable
    partition: Partition
    roles: dict[str, Role]
    layout: Layout


def fmt_float(x: float) -> str:
    """Shortest round-trip decimal form, never locale-grouped."""
    return repr(float(x))


def role_map(assignments: Iterable[RoleAssignment]) -> dict[str, Role]:
    return {a.entity: a.role for a in assignments}


def key_user_rows(
    graph: ForwardGraph,
    metrics: MetricsTable,
    partition: Partition,
    assignments: Iterable[RoleAssignment],
    include_none: bool = False,
) -> list[KeyUserRow]:
    """Report rows for classified channels, ordered by f descending then id."""
    rows = []
    for a in assignments:
        if a.role == Role.NONE and not include_none:
            continue
        m = metrics.rows[a.entity]
        rows.append(
            KeyUserRow(
                channel=graph.nodes[a.entity].username,
                type=a.role,
                f=m.f,
                in_degree=m.in_degree,
                out_degree=m.out_degree,
                betweenness=m.betweenness or 0.0,
                community=partition.assignment[a.entity],
            )
        )
    rows.sort(key=lambda r: (-r.f, r.channel.lower()))
    return rows


def _check_coverage(graph, metrics, partition, roles, layout) -> None:
    ids = set(graph.nodes)
    for name, keys in (
        ("metrics", metrics.rows.keys()),
        ("partition", partition.assignment.keys()),
        ("layout", layout.coordinates.keys()),
    ):
        if set(keys) != ids:
            raise ExportError(f"{name} does not cover the same node set as the graph")
    extra = set(roles) - ids
    if extra:
        raise ExportError(f"roles reference unknown node {sorted(extra)[0]!r}")


def _viz_sizes(metrics: MetricsTable) -> dict[str, float]:
    top = max((m.betweenness or 0.0 for m in metrics.rows.values()), default=0.0)
    if top <= 0:
        return {k: MIN_SIZE for k in metrics.rows}
    return {k: MIN_SIZE + (MAX_SIZE - MIN_SIZE) * (m.betweenness or 0.0) / top for k, m in metrics.rows.items()}


def _color(role: Role | None) -> str:
    return ROLE_COLORS.get(role, DEFAULT_COLOR) if role is not None else DEFAULT_COLOR


def gexf_document(
    graph: ForwardGraph,
    metrics: MetricsTable,
    partition: Partition,
    roles: Mapping[str, Role],
    layout: Layout,
) -> str:
    _check_coverage(graph, metrics, partition, roles, layout)
    ET.register_namespace("", GEXF_NS)
    ET.register_namespace("viz", VIZ_NS)
    root = ET.Element(f"{{{GEXF_NS}}}gexf", {"version": "1.2"})
    meta = ET.SubElement(root, f"{{{GEXF_NS}}}meta")
    ET.SubElement(meta, f"{{{GEXF_NS}}}creator").text = "tgforward"
    ET.SubElement(meta, f"{{{GEXF_NS}}}description").text = json.dumps(
        {
            "modularity": partition.modularity,
            "resolution": partition.resolution,
            "community_count": partition.community_count,
            "layout_iterations": layout.iterations_used,
            "layout_energy": layout.final_energy,
            "layout_initial_energy": layout.initial_energy,
            "layout_converged": layout.converged,
        },
        sort_keys=True,
    )
    g = ET.SubElement(root, f"{{{GEXF_NS}}}graph", {"defaultedgetype": "directed", "mode": "static"})
    attrs = ET.SubElement(g, f"{{{GEXF_NS}}}attributes", {"class": "node"})
    for i, (name, typ) in enumerate(NODE_ATTRS):
        ET.SubElement(attrs, f"{{{GEXF_NS}}}attribute", {"id": str(i), "title": name, "type": typ})

    sizes = _viz_sizes(metrics)
    nodes_el = ET.SubElement(g, f"{{{GEXF_NS}}}nodes")
    for k, ent in graph.nodes.items():
        m = metrics.rows[k]
        role = roles.get(k)
        values = {
            "kind": ent.kind.value,
            "f": str(m.f),
            "in_degree": str(m.in_degree),
            "out_degree": str(m.out_degree),
            "weighted_in": str(m.weighted_in),
            "weighted_out": str(m.weighted_out),
            "betweenness": fmt_float(m.betweenness or 0.0),
            "community": str(partition.assignment[k]),
            "role": role.value if role is not None else INELIGIBLE,
        }
        node = ET.SubElement(nodes_el, f"{{{GEXF_NS}}}node", {"id": k, "label": ent.username})
        avs = ET.SubElement(node, f"{{{GEXF_NS}}}attvalues")
        for i, (name, _) in enumerate(NODE_ATTRS):
            ET.SubElement(avs, f"{{{GEXF_NS}}}attvalue", {"for": str(i), "value": values[name]})
        x, y = layout.coordinates[k]
        color = _color(role)
        ET.SubElement(
            node,
            f"{{{VIZ_NS}}}color",
            {"r": str(int(color[1:3], 16)), "g": str(int(color[3:5], 16)), "b": str(int(color[5:7], 16))},
        )
        ET.SubElement(node, f"{{{VIZ_NS}}}position", {"x": fmt_float(x), "y": fmt_float(y), "z": "0.0"})
        ET.SubElement(node, f"{{{VIZ_NS}}}size", {"value": fmt_float(sizes[k])})

    edges_el = ET.SubElement(g, f"{{{GEXF_NS}}}edges")
    for i, ((s, t), w) in enumerate(graph.edges.items()):
        ET.SubElement(
            edges_el,
            f"{{{GEXF_NS}}}edge",
            {"id": str(i), "source": s, "target": t, "weight": str(w)},
        )
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def _write_text(path: str | Path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc


def write_gexf(
    graph: ForwardGraph,
    metrics: MetricsTable,
    partition: Partition,
    roles: Mapping[str, Role],
    layout: Layout,
    path: str | Path,
) -> None:
    """GEXF 1.2 with node attributes, role colours and betweenness-scaled sizes."""
    _write_text(path, gexf_document(graph, metrics, partition, roles, layout))


def read_gexf(path: str | Path) -> GexfBundle:
    """Parse a file produced by write_gexf back into its components."""
    try:
        root = ET.parse(path).getroot()
    except (OSError, ET.ParseError) as exc:
        raise ExportError(f"cannot parse {path}: {exc}") from exc
    ns = {"g": GEXF_NS, "viz": VIZ_NS}
    desc = json.loads(root.findtext("g:meta/g:description", default="{}", namespaces=ns))
    g = root.find("g:graph", ns)
    titles = {a.get("id"): a.get("title") for a in g.findall("g:attributes/g:attribute", ns)}

    nodes, rows, assignment, roles, coords = {}, {}, {}, {}, {}
    for node in g.findall("g:nodes/g:node", ns):
        k = node.get("id")
        vals = {titles[av.get("for")]: av.get("value") for av in node.findall("g:attvalues/g:attvalue", ns)}
        nodes[k] = Entity(k, node.get("label"), EntityKind(vals["kind"]))
        rows[k] = NodeMetrics(
            in_degree=int(vals["in_degree"]),
            out_degree=int(vals["out_degree"]),
            weighted_in=int(vals["weighted_in"]),
            weighted_out=int(vals["weighted_out"]),
            betweenness=float(vals["betweenness"]),
        )
        assignment[k] = int(vals["community"])
        if vals["role"] != INELIGIBLE:
            roles[k] = Role(vals["role"])
        pos = node.find("viz:position", ns)
        coords[k] = (float(pos.get("x")), float(pos.get("y")))
    edges = {
        (e.get("source"), e.get("target")): int(e.get("weight"))
        for e in g.findall("g:edges/g:edge", ns)
    }
    graph = ForwardGraph(nodes=nodes, edges=edges)
    metrics = MetricsTable(rows, graph.node_count, graph.edge_count, graph.total_weight)
    partition = Partition(
        assignment,
        desc.get("community_count", len(set(assignment.values()))),
        desc.get("modularity", 0.0),
        desc.get("resolution", 1.0),
    )
    layout = Layout(
        coords,
        desc.get("layout_iterations", 0),
        desc.get("layout_energy", 0.0),
        desc.get("layout_initial_energy", 0.0),
        desc.get("layout_converged", True),
    )
    return GexfBundle(graph, metrics, partition, roles, layout)


def report_rows(rows: Iterable[KeyUserRow]) -> list[dict]:
    return [
        {
            "Channel": r.channel,
            "Type": r.type.value,
            "f": r.f,
            "in_degree": r.in_degree,
            "out_degree": r.out_degree,
            "betweenness": r.betweenness,
            "community": r.community,
        }
        for r in rows
    ]


def write_report(rows: Iterable[KeyUserRow], path: str | Path, fmt: str = "csv") -> None:
    """Key-user table as RFC-4180 CSV or a JSON array, one entry per row."""
    records = report_rows(rows)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(REPORT_HEADER)
        for r in records:
            writer.writerow([r[h] if h != "betweenness" else fmt_float(r[h]) for h in REPORT_HEADER])
        _write_text(path, buf.getvalue())
    elif fmt == "json":
        _write_text(path, json.dumps(records, indent=2, ensure_ascii=False) + "\n")
    else:
        raise ExportError(f"unknown report format {fmt!r}")


def read_report(path: str | Path) -> list[KeyUserRow]:
    path = Path(path)
    if path.suffix == ".json":
        records = json.loads(path.read_text(encoding="utf-8"))
    else:
        with path.open(encoding="utf-8", newline="") as fh:
            records = list(csv.DictReader(fh))
    return [
        KeyUserRow(
            channel=r["Channel"],
            type=Role(r["Type"]),
            f=int(r["f"]),
            in_degree=int(r["in_degree"]),
            out_degree=int(r["out_degree"]),
            betweenness=float(r["betweenness"]),
            community=int(r["community"]),
        )
        for r in records
    ]


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dot_document(graph: ForwardGraph, roles: Mapping[str, Role] | None = None) -> str:
    roles = roles or {}
    lines = ["digraph {"]
    for k, ent in graph.nodes.items():
        role = roles.get(k)
        attrs = f"label={_dot_id(ent.username)}"
        if role is not None:
            attrs += f", style=filled, fillcolor={_dot_id(_color(role))}"
        lines.append(f"  {_dot_id(k)} [{attrs}];")
    for (s, t), w in graph.edges.items():
        lines.append(f"  {_dot_id(s)} -> {_dot_id(t)} [weight={w}, label={_dot_id(str(w))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(graph: ForwardGraph, roles: Mapping[str, Role] | None, path: str | Path) -> None:
    _write_text(path, dot_document(graph, roles))


def write_metrics_csv(graph: ForwardGraph, metrics: MetricsTable, partition: Partition, path: str | Path) -> None:
    """Every node's metrics, one row per node in id order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["id", "username", "kind", "f", "in_degree", "out_degree", "weighted_in", "weighted_out", "betweenness", "community"])
    for k, ent in graph.nodes.items():
        m = metrics.rows[k]
        writer.writerow([
            k, ent.username, ent.kind.value, m.f, m.in_degree, m.out_degree,
            m.weighted_in, m.weighted_out, fmt_float(m.betweenness or 0.0), partition.assignment[k],
        ])
    _write_text(path, buf.getvalue())

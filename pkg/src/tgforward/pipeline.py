"""End-to-end run: ingest, anonymize, filter, expand, build, analyze, classify, lay out, export."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from . import export
from .classify import Role, RoleConfig, classify, eligible_nodes, thresholds
from .community import Partition, louvain
from .ingest import (
    FORMATS,
    IngestReport,
    anonymize,
    expansion_candidates,
    has_public_username,
    parse_export,
    write_records,
)
from .layout import Layout, LayoutParams, yifan_hu
from .metrics import metrics_table
from .model import EntityKind, build_graph, entity_id, filter_min_frequency, kind_registry

log = logging.getLogger(__name__)

STAGES = ("ingest", "expand", "analyze", "classify", "layout", "export")
MANIFEST = "manifest.json"


class ConfigError(Exception):
    """Invalid run configuration (exit status 2)."""


@dataclass(frozen=True)
class InputSpec:
    path: str
    format: str = "ndjson"
    wave: int = 1


@dataclass
class RunConfig:
    inputs: list[InputSpec] = field(default_factory=list)
    field_map: dict[str, str] = field(default_factory=dict)
    key_env: str = "TGFORWARD_KEY"
    min_frequency: int = 0
    expansion_threshold: int | None = 50
    roles: RoleConfig = field(default_factory=RoleConfig)
    resolution: float = 1.0
    community_seed: int = 0
    layout: LayoutParams = field(default_factory=LayoutParams)
    layout_seed: int = 0
    output_dir: str = "out"
    n_jobs: int = 1

    @classmethod
    def from_dict(cls, data: Mapping) -> "RunConfig":
        """Build from the JSON config layout; unknown keys are rejected."""
        data = dict(data)
        known = {
            "inputs", "field_map", "key_env", "min_frequency", "expansion_threshold",
            "roles", "community", "layout", "output_dir", "n_jobs",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            inputs = [InputSpec(**i) if isinstance(i, Mapping) else InputSpec(str(i)) for i in data.get("inputs", [])]
            community = dict(data.get("community", {}))
            layout = dict(data.get("layout", {}))
            layout_seed = int(layout.pop("seed", 0))
            cfg = cls(
                inputs=inputs,
                field_map=dict(data.get("field_map", {})),
                key_env=str(data.get("key_env", "TGFORWARD_KEY")),
                min_frequency=int(data.get("min_frequency", 0)),
                expansion_threshold=data.get("expansion_threshold", 50),
                roles=RoleConfig(**data.get("roles", {})),
                resolution=float(community.pop("resolution", 1.0)),
                community_seed=int(community.pop("seed", 0)),
                layout=LayoutParams(**layout),
                layout_seed=layout_seed,
                output_dir=str(data.get("output_dir", "out")),
                n_jobs=int(data.get("n_jobs", 1)),
            )
            if community:
                raise ConfigError(f"unknown community keys: {sorted(community)}")
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        for spec in self.inputs:
            if spec.format not in FORMATS:
                raise ConfigError(f"input {spec.path}: unknown format {spec.format!r}")
            if spec.wave not in (1, 2):
                raise ConfigError(f"input {spec.path}: wave must be 1 or 2")
        if self.min_frequency < 0:
            raise ConfigError("min_frequency must be >= 0")
        if self.expansion_threshold is not None and int(self.expansion_threshold) < 1:
            raise ConfigError("expansion_threshold must be >= 1")
        if self.resolution <= 0:
            raise ConfigError("community resolution must be positive")
        if not self.key_env:
            raise ConfigError("key_env must name an environment variable")

    def to_dict(self) -> dict:
        layout = dataclasses.asdict(self.layout)
        layout["seed"] = self.layout_seed
        return {
            "inputs": [dataclasses.asdict(i) for i in self.inputs],
            "field_map": dict(sorted(self.field_map.items())),
            "key_env": self.key_env,
            "min_frequency": self.min_frequency,
            "expansion_threshold": self.expansion_threshold,
            "roles": dataclasses.asdict(self.roles),
            "community": {"resolution": self.resolution, "seed": self.community_seed},
            "layout": layout,
            "output_dir": self.output_dir,
            "n_jobs": self.n_jobs,
        }


def load_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return RunConfig.from_dict(data)


def _secret(config: RunConfig, env: Mapping[str, str]) -> bytes:
    value = env.get(config.key_env)
    if not value:
        raise ConfigError(f"anonymization key variable {config.key_env} is not set")
    return value.encode("utf-8")


@dataclass
class RunResult:
    status: int
    manifest: dict
    artifacts: list[Path]
    graph: object = None
    metrics: object = None
    partition: Partition | None = None
    assignments: list = field(default_factory=list)
    layout: Layout | None = None


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def run_pipeline(config: RunConfig, until: str = "export", env: Mapping[str, str] | None = None) -> RunResult:
    """Run the stages up to ``until`` and write artifacts plus ``manifest.json``.

    Configuration problems raise ConfigError before anything is written. A
    failure in a later stage removes the artifacts of this run and leaves a
    manifest with ``status: failed``.
    """
    if until not in STAGES:
        raise ConfigError(f"unknown stage {until!r}")
    config.validate()
    if not config.inputs:
        raise ConfigError("no inputs configured")
    env = os.environ if env is None else env
    key = _secret(config, env)
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc

    stop = STAGES.index(until)
    manifest: dict = {
        "status": "running",
        "until": until,
        "config": config.to_dict(),
        "seeds": {"community": config.community_seed, "layout": config.layout_seed},
        "stages": {},
    }
    written: list[Path] = []
    result = RunResult(0, manifest, written)

    def artifact(name: str) -> Path:
        p = out / name
        written.append(p)
        return p

    try:
        _run(config, key, stop, manifest, artifact, result)
        manifest["status"] = "ok"
    except Exception as exc:  # noqa: BLE001 - any stage failure is reported in the manifest
        log.error("pipeline failed: %s", exc)
        for p in written:
            p.unlink(missing_ok=True)
        written.clear()
        manifest["status"] = "failed"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        result.status = 1
    manifest["artifacts"] = sorted(p.name for p in written)
    _dump_json(manifest, out / MANIFEST)
    return result


def _run(config: RunConfig, key: bytes, stop: int, manifest: dict, artifact, result: RunResult) -> None:
    stages = manifest["stages"]

    # ingest
    records, waves = [], []
    total = IngestReport()
    per_input = []
    for spec in config.inputs:
        recs, report = parse_export(spec.path, spec.format, config.field_map)
        per_input.append({"path": spec.path, "wave": spec.wave, **report.to_dict()})
        total = total.merge(report)
        records.extend(recs)
        waves.extend([spec.wave] * len(recs))
    total.distinct_sources = len({entity_id(r.forward_source) for r in records if r.is_forward})
    stages["ingest"] = {**total.to_dict(), "inputs": per_input}

    kinds = kind_registry(records)
    records = anonymize(records, key, kinds)
    stages["anonymize"] = {"pseudonymized_entities": sum(1 for k in kinds.values() if k == EntityKind.USER)}

    keep = [i for i, r in enumerate(records) if r.is_forward and has_public_username(r.forward_source)]
    forwards = [records[i] for i in keep]
    forward_waves = [waves[i] for i in keep]
    stages["filter"] = {"records_in": len(records), "forwards_public": len(forwards)}
    write_records(forwards, artifact("forwards.ndjson"))
    if stop < STAGES.index("expand"):
        return

    if config.expansion_threshold is not None:
        first_wave = [r for r, w in zip(forwards, forward_waves) if w == 1]
        plan = expansion_candidates(first_wave, int(config.expansion_threshold))
        stages["expand"] = {
            "threshold": plan.threshold,
            "wave1_forwards": len(first_wave),
            "candidates": len(plan.candidates),
            "by_kind": dict(sorted(Counter(c.kind.value for c in plan.candidates).items())),
        }
        _dump_json(
            {
                "threshold": plan.threshold,
                "candidates": [
                    {"username": c.username, "kind": c.kind.value, "occurrences": c.occurrences}
                    for c in plan.candidates
                ],
            },
            artifact("expansion_plan.json"),
        )
    if stop < STAGES.index("analyze"):
        return

    graph = build_graph(forwards)
    stages["build"] = {
        "nodes": graph.node_count,
        "edges": graph.edge_count,
        "total_weight": graph.total_weight,
        "skipped": dict(graph.skipped),
    }
    manifest["conservation"] = {
        "forwards_equal_weight": len(forwards) == graph.total_weight + sum(graph.skipped.values()),
    }
    graph = filter_min_frequency(graph, config.min_frequency)
    stages["min_frequency"] = {
        "threshold": config.min_frequency,
        "nodes": graph.node_count,
        "edges": graph.edge_count,
        "total_weight": graph.total_weight,
    }
    if graph.node_count == 0:
        raise ValueError("graph is empty after filtering")
    metrics = metrics_table(graph, n_jobs=config.n_jobs)
    stages["metrics"] = metrics.stats()
    partition = louvain(graph, config.resolution, config.community_seed)
    stages["community"] = {
        "community_count": partition.community_count,
        "modularity": partition.modularity,
        "resolution": partition.resolution,
    }
    result.graph, result.metrics, result.partition = graph, metrics, partition
    export.write_metrics_csv(graph, metrics, partition, artifact("metrics.csv"))
    _dump_json(
        {"modularity": partition.modularity, "community_count": partition.community_count,
         "assignment": partition.assignment},
        artifact("partition.json"),
    )
    if stop < STAGES.index("classify"):
        return

    assignments = classify(graph, metrics, config.roles)
    eligible = eligible_nodes(graph, metrics, config.roles)
    cut = thresholds(metrics, eligible, config.roles) if eligible else None
    stages["classify"] = {
        "eligible": len(eligible),
        "thresholds": dataclasses.asdict(cut) if cut else None,
        "roles": {r.value: sum(1 for a in assignments if a.role == r) for r in Role},
    }
    manifest["conservation"]["eligible_count"] = len(eligible)
    result.assignments = assignments
    rows = export.key_user_rows(graph, metrics, partition, assignments)
    export.write_report(rows, artifact("key_users.csv"), "csv")
    export.write_report(rows, artifact("key_users.json"), "json")
    if stop < STAGES.index("layout"):
        return

    params = dataclasses.replace(config.layout, seed=config.layout_seed)
    layout = yifan_hu(graph, params)
    stages["layout"] = {
        "iterations": layout.iterations_used,
        "converged": layout.converged,
        "initial_energy": layout.initial_energy,
        "final_energy": layout.final_energy,
    }
    result.layout = layout
    with artifact("layout.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write("id,x,y\r\n")
        for k, (x, y) in layout.coordinates.items():
            fh.write(f"{k},{export.fmt_float(x)},{export.fmt_float(y)}\r\n")
    if stop < STAGES.index("export"):
        return

    roles = export.role_map(assignments)
    export.write_gexf(graph, metrics, partition, roles, layout, artifact("graph.gexf"))
    export.write_dot(graph, roles, artifact("graph.dot"))

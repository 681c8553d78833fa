"""Command-line entry point.

Every subcommand runs the pipeline up to its stage:

    tgforward ingest   --input wave1.ndjson --output-dir out
    tgforward pipeline --config run.json --layout-seed 3

Exit status: 0 success, 1 fatal stage error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .ingest import IngestError
from .pipeline import STAGES, ConfigError, InputSpec, RunConfig, load_config, run_pipeline

COMMANDS = {stage: stage for stage in STAGES}
COMMANDS["pipeline"] = "export"


def _guess_format(path: str, default: str | None) -> str:
    if default:
        return default
    return "csv" if path.lower().endswith(".csv") else "ndjson"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its values")
    common.add_argument("--input", action="append", default=[], metavar="PATH", help="first-wave export (repeatable)")
    common.add_argument("--wave2", action="append", default=[], metavar="PATH", help="second-wave export (repeatable)")
    common.add_argument("--format", choices=["ndjson", "csv"], help="input format (default: from extension)")
    common.add_argument("--field-map", metavar="JSON", help='foreign->canonical column names, e.g. \'{"id": "message_id"}\'')
    common.add_argument("--output-dir")
    common.add_argument("--key-env", help="environment variable holding the anonymization key")
    common.add_argument("--min-frequency", type=int, help="graph-level frequency floor")
    common.add_argument("--expansion-threshold", type=int, help="second-wave source threshold (0 disables)")
    common.add_argument("--role-min-frequency", type=int, help="frequency floor for role eligibility")
    common.add_argument("--high-out", type=float, help="absolute out-degree threshold (disables percentile)")
    common.add_argument("--high-in", type=float, help="absolute in-degree threshold (disables percentile)")
    common.add_argument("--resolution", type=float)
    common.add_argument("--community-seed", type=int)
    common.add_argument("--layout-seed", type=int)
    common.add_argument("--max-iterations", type=int)
    common.add_argument("--theta", type=float, help="Barnes-Hut opening parameter")
    common.add_argument("--jobs", type=int, help="worker threads for betweenness")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="tgforward", description="Telegram forwarding-network analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=f"run the pipeline through the {COMMANDS[name]} stage")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    inputs = [InputSpec(p, _guess_format(p, args.format), 1) for p in args.input]
    inputs += [InputSpec(p, _guess_format(p, args.format), 2) for p in args.wave2]
    if inputs:
        config.inputs = inputs
    if args.field_map:
        try:
            config.field_map = dict(json.loads(args.field_map))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"--field-map: {exc}") from exc
    for flag, attr in (
        ("output_dir", "output_dir"),
        ("key_env", "key_env"),
        ("min_frequency", "min_frequency"),
        ("resolution", "resolution"),
        ("community_seed", "community_seed"),
        ("layout_seed", "layout_seed"),
        ("jobs", "n_jobs"),
    ):
        value = getattr(args, flag)
        if value is not None:
            setattr(config, attr, value)
    if args.expansion_threshold is not None:
        config.expansion_threshold = args.expansion_threshold or None
    try:
        role_updates = {
            k: v
            for k, v in (("min_frequency", args.role_min_frequency), ("high_out", args.high_out), ("high_in", args.high_in))
            if v is not None
        }
        if role_updates:
            config.roles = dataclasses.replace(config.roles, **role_updates)
        layout_updates = {
            k: v for k, v in (("max_iterations", args.max_iterations), ("barnes_hut_theta", args.theta)) if v is not None
        }
        if layout_updates:
            config.layout = dataclasses.replace(config.layout, **layout_updates)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = config_from_args(args)
        result = run_pipeline(config, until=COMMANDS[args.command])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (IngestError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest = result.manifest
    if result.status != 0:
        print(f"error: {manifest.get('error')}", file=sys.stderr)
    else:
        print(f"{args.command}: ok, {len(manifest['artifacts'])} artifacts in {Path(config.output_dir)}")
    return result.status


if __name__ == "__main__":
    sys.exit(main())

"""Reading message exports, forward filtering, wave expansion and anonymization."""

from __future__ import annotations

import csv
import hashlib
import hmac
import json
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .model import EntityKind, ForwardRecord, entity_id, kind_registry, merge_kinds

log = logging.getLogger(__name__)

FIELDS = ("message_id", "chat", "chat_kind", "posted_at", "forward_source", "forward_source_kind")
FORMATS = ("ndjson", "csv")

PSEUDONYM_PREFIX = "anon_"
PSEUDONYM_HEX = 32  # 128 bits


class IngestError(Exception):
    """Fatal ingest failure (unreadable file, unknown format, bad key)."""


@dataclass
class IngestReport:
    records_read: int = 0
    records_forwarded: int = 0
    records_non_forwarded: int = 0
    records_skipped: int = 0
    skip_reasons: Counter = field(default_factory=Counter)
    distinct_sources: int = 0

    def skip(self, reason: str) -> None:
        self.records_skipped += 1
        self.skip_reasons[reason] += 1

    def merge(self, other: "IngestReport") -> "IngestReport":
        # distinct_sources cannot be summed; callers recompute it over the union
        return IngestReport(
            records_read=self.records_read + other.records_read,
            records_forwarded=self.records_forwarded + other.records_forwarded,
            records_non_forwarded=self.records_non_forwarded + other.records_non_forwarded,
            records_skipped=self.records_skipped + other.records_skipped,
            skip_reasons=self.skip_reasons + other.skip_reasons,
        )

    def to_dict(self) -> dict:
        return {
            "records_read": self.records_read,
            "records_forwarded": self.records_forwarded,
            "records_non_forwarded": self.records_non_forwarded,
            "records_skipped": self.records_skipped,
            "skip_reasons": dict(sorted(self.skip_reasons.items())),
            "distinct_sources": self.distinct_sources,
        }


@dataclass(frozen=True)
class Candidate:
    username: str
    kind: EntityKind
    occurrences: int


@dataclass(frozen=True)
class ExpansionPlan:
    candidates: list[Candidate]
    threshold: int

    def usernames(self) -> list[str]:
        return [c.username for c in self.candidates]


def parse_timestamp(value) -> datetime | None:
    """ISO-8601 string or integer epoch seconds -> aware UTC datetime."""
    if value is None or value == "":
        return None
    if isinstance(value, bool):
        raise ValueError("boolean timestamp")
    if isinstance(value, (int, float)):
        return datetime.fromtimestamp(int(value), tz=timezone.utc)
    text = str(value).strip()
    if text.lstrip("-").isdigit():
        return datetime.fromtimestamp(int(text), tz=timezone.utc)
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def _clean_name(value) -> str | None:
    if value is None:
        return None
    text = str(value).strip().lstrip("@").strip()
    return text or None


def row_to_record(row: Mapping) -> tuple[ForwardRecord | None, str | None]:
    """Convert one canonical-schema row to a record, or return a skip reason."""
    message_id = row.get("message_id")
    if message_id is None or str(message_id).strip() == "":
        return None, "missing message_id"
    chat = _clean_name(row.get("chat"))
    if chat is None:
        return None, "missing chat"
    try:
        chat_kind = EntityKind.parse(row.get("chat_kind"))
    except ValueError:
        return None, "invalid chat_kind"
    if chat_kind == EntityKind.UNKNOWN:
        return None, "invalid chat_kind"
    try:
        source_kind = EntityKind.parse(row.get("forward_source_kind"))
    except ValueError:
        return None, "invalid forward_source_kind"
    try:
        posted_at = parse_timestamp(row.get("posted_at"))
    except (ValueError, OverflowError, OSError):
        return None, "invalid posted_at"
    source = _clean_name(row.get("forward_source"))
    return (
        ForwardRecord(
            message_id=str(message_id),
            chat=chat,
            chat_kind=chat_kind,
            posted_at=posted_at,
            forward_source=source,
            forward_source_kind=source_kind if source else EntityKind.UNKNOWN,
        ),
        None,
    )


def _apply_mapping(row: Mapping, field_map: Mapping[str, str] | None) -> Mapping:
    # field_map: foreign column name -> canonical field name
    if not field_map:
        return row
    out = dict(row)
    for foreign, canonical in field_map.items():
        if foreign in row:
            out[canonical] = row[foreign]
    return out


def _iter_rows(path: Path, fmt: str) -> Iterator[tuple[Mapping | None, str | None]]:
    with path.open("r", encoding="utf-8", newline="") as fh:
        if fmt == "ndjson":
            for line in fh:
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError:
                    yield None, "malformed json"
                    continue
                if not isinstance(obj, dict):
                    yield None, "malformed json"
                    continue
                yield obj, None
        else:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                return
            for row in reader:
                if None in row:
                    yield None, "malformed csv row"
                    continue
                yield row, None


def iter_export(
    path: str | Path,
    fmt: str = "ndjson",
    field_map: Mapping[str, str] | None = None,
    report: IngestReport | None = None,
) -> Iterator[ForwardRecord]:
    """Stream records from one export file, tallying into ``report``."""
    fmt = fmt.lower()
    if fmt not in FORMATS:
        raise IngestError(f"unknown format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    if not path.is_file():
        raise IngestError(f"cannot read {path}")
    report = report if report is not None else IngestReport()
    try:
        for row, problem in _iter_rows(path, fmt):
            report.records_read += 1
            if problem is None:
                rec, problem = row_to_record(_apply_mapping(row, field_map))
            if problem is not None:
                report.skip(problem)
                continue
            if rec.is_forward:
                report.records_forwarded += 1
            else:
                report.records_non_forwarded += 1
            yield rec
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc


def parse_export(
    path: str | Path,
    fmt: str = "ndjson",
    field_map: Mapping[str, str] | None = None,
) -> tuple[list[ForwardRecord], IngestReport]:
    """Parse an NDJSON or CSV export into records plus an ingest report.

    Malformed rows are skipped and tallied by reason; they never abort the
    parse. An unreadable file or an unknown format raises IngestError.
    """
    report = IngestReport()
    records = list(iter_export(path, fmt, field_map, report))
    report.distinct_sources = len({entity_id(r.forward_source) for r in records if r.is_forward})
    if report.records_skipped:
        log.info("%s: skipped %d rows %s", path, report.records_skipped, dict(report.skip_reasons))
    return records, report


def has_public_username(name: str | None) -> bool:
    """False for empty names and bare numeric ids (entities without a handle)."""
    if not name:
        return False
    text = name.strip().lstrip("@")
    if not text:
        return False
    return not text.lstrip("-").isdigit()


def filter_forwarded(records: Iterable[ForwardRecord]) -> list[ForwardRecord]:
    return [r for r in records if r.is_forward and has_public_username(r.forward_source)]


def expansion_candidates(records: Iterable[ForwardRecord], threshold: int = 50) -> ExpansionPlan:
    """Forward sources seen at least ``threshold`` times, most frequent first."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    counts: Counter[str] = Counter()
    kinds: dict[str, EntityKind] = {}
    spelling: dict[str, str] = {}
    for rec in records:
        if not rec.is_forward:
            continue
        name = rec.forward_source.strip().lstrip("@")
        key = name.lower()
        counts[key] += 1
        kinds[key] = merge_kinds(kinds.get(key, EntityKind.UNKNOWN), rec.forward_source_kind)
        if key not in spelling or name < spelling[key]:
            spelling[key] = name
    kept = [
        Candidate(spelling[k], kinds[k], n) for k, n in counts.items() if n >= threshold
    ]
    kept.sort(key=lambda c: (-c.occurrences, c.username.lower()))
    return ExpansionPlan(kept, threshold)


def pseudonym(username: str, secret_key: bytes) -> str:
    digest = hmac.new(secret_key, entity_id(username).encode("utf-8"), hashlib.sha256)
    return PSEUDONYM_PREFIX + digest.hexdigest()[:PSEUDONYM_HEX]


def anonymize(
    records: Iterable[ForwardRecord],
    secret_key: bytes,
    kinds: Mapping[str, EntityKind] | None = None,
) -> list[ForwardRecord]:
    """Replace every USER username with a keyed-hash pseudonym.

    Kinds are resolved across the whole input first, so a user that also
    appears with an unknown kind elsewhere is still masked everywhere.
    Groups and channels pass through unchanged. ``kinds`` may carry a
    registry already computed from these same records.
    """
    if not secret_key:
        raise IngestError("anonymization key must be non-empty")
    if isinstance(secret_key, str):
        secret_key = secret_key.encode("utf-8")
    records = list(records)
    if kinds is None:
        kinds = kind_registry(records)
    cache: dict[str, str] = {}

    def mask(name: str | None) -> str | None:
        if not name:
            return name
        key = entity_id(name)
        if kinds.get(key) != EntityKind.USER:
            return name
        if key not in cache:
            cache[key] = pseudonym(name, secret_key)
        return cache[key]

    out = []
    for rec in records:
        chat, source = mask(rec.chat), mask(rec.forward_source)
        if chat is rec.chat and source is rec.forward_source:
            out.append(rec)
            continue
        out.append(
            replace(
                rec,
                chat=chat,
                forward_source=source,
                chat_kind=EntityKind.USER if chat is not rec.chat else rec.chat_kind,
                forward_source_kind=EntityKind.USER if source is not rec.forward_source else rec.forward_source_kind,
            )
        )
    return out


def record_to_row(rec: ForwardRecord) -> dict:
    return {
        "message_id": rec.message_id,
        "chat": rec.chat,
        "chat_kind": rec.chat_kind.value,
        "posted_at": rec.posted_at.strftime("%Y-%m-%dT%H:%M:%SZ") if rec.posted_at else None,
        "forward_source": rec.forward_source,
        "forward_source_kind": rec.forward_source_kind.value,
    }


def write_records(records: Iterable[ForwardRecord], path: str | Path, fmt: str = "ndjson") -> None:
    """Write records in the canonical schema (the same format parse_export reads)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if fmt == "ndjson":
            for rec in records:
                fh.write(json.dumps(record_to_row(rec), ensure_ascii=False) + "\n")
        elif fmt == "csv":
            writer = csv.DictWriter(fh, fieldnames=FIELDS, lineterminator="\r\n")
            writer.writeheader()
            for rec in records:
                row = record_to_row(rec)
                writer.writerow({k: "" if v is None else v for k, v in row.items()})
        else:
            raise IngestError(f"unknown format {fmt!r}")

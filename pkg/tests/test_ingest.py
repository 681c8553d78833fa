import json
import random
from datetime import datetime, timezone

import pytest

from tgforward.ingest import (
    IngestError,
    anonymize,
    expansion_candidates,
    filter_forwarded,
    has_public_username,
    parse_export,
    parse_timestamp,
    pseudonym,
    write_records,
)
from tgforward.model import EntityKind, ForwardRecord

G, C, U = EntityKind.GROUP, EntityKind.CHANNEL, EntityKind.USER
KEY = b"test-key"


def write_ndjson(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


def row(i, chat="grupo", src=None, src_kind="channel", chat_kind="group", **extra):
    r = {"message_id": str(i), "chat": chat, "chat_kind": chat_kind, "posted_at": "2022-08-03T10:00:00Z"}
    if src is not None:
        r.update(forward_source=src, forward_source_kind=src_kind)
    r.update(extra)
    return r


def rec(i, src=None, src_kind=C, chat="grupo", chat_kind=G):
    return ForwardRecord(str(i), chat, chat_kind, None, src, src_kind if src else EntityKind.UNKNOWN)


def test_missing_chat_is_skipped_with_reason(tmp_path):
    p = write_ndjson(tmp_path / "a.ndjson", [row(1, src="x"), {"message_id": "2", "chat_kind": "group"}, row(3)])
    records, report = parse_export(p)
    assert len(records) == 2
    assert report.records_skipped == 1
    assert report.skip_reasons == {"missing chat": 1}
    assert report.records_read == report.records_forwarded + report.records_non_forwarded + report.records_skipped


def test_empty_file(tmp_path):
    p = tmp_path / "empty.ndjson"
    p.write_text("")
    records, report = parse_export(p)
    assert records == [] and report.records_read == 0


def test_planted_forward_count(tmp_path):
    r = random.Random(3)
    forwarded = set(r.sample(range(1000), 412))
    rows = [row(i, src=f"canal{i % 37}" if i in forwarded else None) for i in range(1000)]
    records, report = parse_export(write_ndjson(tmp_path / "f.ndjson", rows))
    assert report.records_read == 1000
    assert report.records_forwarded == 412
    assert report.records_non_forwarded == 588
    assert report.distinct_sources == 37


def test_malformed_rows_never_abort(tmp_path):
    p = tmp_path / "bad.ndjson"
    lines = [
        json.dumps(row(1)),
        "{not json",
        "[1, 2]",
        json.dumps(row(2, chat_kind="planet")),
        json.dumps(row(3, chat_kind="")),
        json.dumps(row(4, src="a", src_kind="weird")),
        json.dumps(row(5, posted_at="yesterday")),
        json.dumps({"chat": "g", "chat_kind": "group"}),
        "",
    ]
    p.write_text("\n".join(lines) + "\n")
    records, report = parse_export(p)
    assert [r.message_id for r in records] == ["1"]
    assert report.skip_reasons == {
        "malformed json": 2,
        "invalid chat_kind": 2,
        "invalid forward_source_kind": 1,
        "invalid posted_at": 1,
        "missing message_id": 1,
    }


def test_csv_with_field_map_and_quoting(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text(
        'id,chat,chat_kind,date,fwd_from,forward_source_kind\r\n'
        '1,"Grupo, Um",supergroup,1659520800,@CanalA,channel\r\n'
        '2,"Grupo, Um",supergroup,,,\r\n'
        '3,"Grupo ""Dois""",group,2022-08-03T10:00:00+02:00,UserB,user\r\n',
        encoding="utf-8",
    )
    fmap = {"id": "message_id", "date": "posted_at", "fwd_from": "forward_source"}
    records, report = parse_export(p, "csv", fmap)
    assert report.records_skipped == 0
    assert records[0].chat == "Grupo, Um" and records[0].chat_kind == G
    assert records[0].forward_source == "CanalA"
    assert records[0].posted_at == datetime(2022, 8, 3, 10, 0, tzinfo=timezone.utc)
    assert not records[1].is_forward and records[1].posted_at is None
    assert records[2].chat == 'Grupo "Dois"'
    assert records[2].posted_at == datetime(2022, 8, 3, 8, 0, tzinfo=timezone.utc)


def test_csv_row_with_extra_cells_is_skipped(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("message_id,chat,chat_kind\r\n1,g,group\r\n2,g,group,surplus\r\n")
    records, report = parse_export(p, "csv")
    assert len(records) == 1 and report.skip_reasons == {"malformed csv row": 1}


def test_unknown_format_and_missing_file_are_fatal(tmp_path):
    p = write_ndjson(tmp_path / "a.ndjson", [row(1)])
    with pytest.raises(IngestError):
        parse_export(p, "xml")
    with pytest.raises(IngestError):
        parse_export(tmp_path / "nope.ndjson")


def test_parse_timestamp_forms():
    utc = timezone.utc
    assert parse_timestamp(0) == datetime(1970, 1, 1, tzinfo=utc)
    assert parse_timestamp("86400") == datetime(1970, 1, 2, tzinfo=utc)
    assert parse_timestamp("2022-08-01T00:00:00.750Z") == datetime(2022, 8, 1, tzinfo=utc)
    assert parse_timestamp("2022-08-01 03:00:00") == datetime(2022, 8, 1, 3, tzinfo=utc)
    assert parse_timestamp("") is None
    with pytest.raises(ValueError):
        parse_timestamp("soon")


def test_write_then_parse_round_trip(tmp_path):
    records = [
        ForwardRecord("1", "Grupo", G, datetime(2022, 8, 5, 12, tzinfo=timezone.utc), "Canal", C),
        ForwardRecord("2", "Canal", C, None, None, EntityKind.UNKNOWN),
    ]
    for fmt in ("ndjson", "csv"):
        p = tmp_path / f"out.{fmt}"
        write_records(records, p, fmt)
        back, report = parse_export(p, fmt)
        assert back == records and report.records_skipped == 0


def test_has_public_username():
    assert has_public_username("@canal")
    assert not has_public_username("1234567890")
    assert not has_public_username("-100123")
    assert not has_public_username("")
    assert not has_public_username(None)
    assert has_public_username(pseudonym("someone", KEY))


def test_filter_forwarded_rule():
    assert filter_forwarded([rec(i) for i in range(5)]) == []
    records = [rec(i) for i in range(6)] + [rec(6, "a"), rec(7, "b"), rec(8, "c"), rec(9, "987654")]
    out = filter_forwarded(records)
    assert [r.message_id for r in out] == ["6", "7", "8"]


def test_expansion_threshold_is_inclusive():
    at = [rec(i, "Fifty") for i in range(50)]
    below = [rec(100 + i, "FortyNine") for i in range(49)]
    plan = expansion_candidates(at + below, 50)
    assert plan.usernames() == ["Fifty"]
    assert plan.candidates[0].occurrences == 50
    assert expansion_candidates(below, 50).candidates == []
    with pytest.raises(ValueError):
        expansion_candidates(at, 0)


def test_expansion_sorting_and_monotonicity():
    r = random.Random(11)
    records = [rec(i, f"src{r.randrange(30)}", r.choice([U, C, G])) for i in range(3000)]
    plans = {t: expansion_candidates(records, t) for t in (1, 50, 90, 110)}
    for t, plan in plans.items():
        counts = [c.occurrences for c in plan.candidates]
        assert counts == sorted(counts, reverse=True)
        assert all(c >= t for c in counts)
        for a, b in zip(plan.candidates, plan.candidates[1:]):
            if a.occurrences == b.occurrences:
                assert a.username.lower() < b.username.lower()
    assert set(plans[110].usernames()) <= set(plans[90].usernames()) <= set(plans[50].usernames())


def test_expansion_merges_case_variants():
    records = [rec(i, "Canal" if i % 2 else "@canal") for i in range(50)]
    plan = expansion_candidates(records, 50)
    assert plan.usernames() == ["Canal"] and plan.candidates[0].occurrences == 50


def test_anonymize_masks_users_only():
    records = [
        rec(1, "SomeUser", U, chat="Grupo"),
        rec(2, "CanalX", C, chat="Grupo"),
        rec(3, "someuser", EntityKind.UNKNOWN, chat="Grupo"),
    ]
    out = anonymize(records, KEY)
    assert out[0].forward_source == out[2].forward_source == pseudonym("SomeUser", KEY)
    assert out[2].forward_source_kind == U
    assert out[1] == records[1]
    assert all(r.chat == "Grupo" for r in out)
    assert anonymize(records, KEY) == out


def test_pseudonym_is_keyed_and_fixed_length():
    a = pseudonym("alice", KEY)
    assert a == pseudonym("@Alice", KEY)
    assert a != pseudonym("alice", b"other-key")
    assert len(a) == len(pseudonym("a" * 100, KEY)) == len("anon_") + 32


def test_pseudonyms_distinct_over_large_corpus():
    names = [f"user{i}" for i in range(100_000)]
    assert len({pseudonym(n, KEY) for n in names}) == len(names)


def test_anonymize_requires_key():
    with pytest.raises(IngestError):
        anonymize([rec(1, "u", U)], b"")

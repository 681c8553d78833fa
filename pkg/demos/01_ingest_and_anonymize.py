# Reading a forwarding export, pseudonymizing users, picking second-wave sources.
#
#   TGFORWARD_KEY=some-secret python demos/01_ingest_and_anonymize.py

import os
import tempfile
from pathlib import Path

from tgforward.ingest import anonymize, expansion_candidates, parse_export, write_records
from tgforward.model import kind_registry
from tgforward.synthetic import full_scale_corpus

key = os.environ.get("TGFORWARD_KEY", "demo-key").encode()

# A small planted collection. 24 of its sources forward at least 50 times.
corpus = full_scale_corpus(
    wave1_records=9000, wave2_records=4000, forwards=6000, entities=220,
    pairs=700, seed_groups=6, heavy_users=10, heavy_groups=2, heavy_channels=12,
)
tmp = Path(tempfile.mkdtemp())
write_records(corpus.wave1, tmp / "wave1.ndjson")

records, report = parse_export(tmp / "wave1.ndjson")
print("read", report.records_read, "records;", report.records_forwarded, "are forwards")
print("skipped:", dict(report.skip_reasons))

# Users become anon_<32 hex>; channels and groups keep their public names.
kinds = kind_registry(records)
public = anonymize(records, key, kinds)
for before, after in list(zip(records, public))[:200]:
    if before.forward_source and before.forward_source != after.forward_source:
        print(before.forward_source, "->", after.forward_source)
        break

plan = expansion_candidates(records, threshold=50)
for c in plan.candidates:
    print(f"{c.username:24s} {c.kind.value:8s} {c.occurrences}")

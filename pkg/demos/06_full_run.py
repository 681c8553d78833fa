# Whole pipeline on a planted two-wave collection, then reading the GEXF back.

import json
import tempfile
from pathlib import Path

from tgforward.export import read_gexf
from tgforward.ingest import write_records
from tgforward.pipeline import InputSpec, RunConfig, run_pipeline
from tgforward.synthetic import full_scale_corpus

corpus = full_scale_corpus(
    wave1_records=9000, wave2_records=4000, forwards=6000, entities=220,
    pairs=700, seed_groups=6, heavy_users=10, heavy_groups=2, heavy_channels=12,
)
tmp = Path(tempfile.mkdtemp())
write_records(corpus.wave1, tmp / "wave1.ndjson")
write_records(corpus.wave2, tmp / "wave2.ndjson")

config = RunConfig(
    inputs=[InputSpec(str(tmp / "wave1.ndjson"), "ndjson", 1), InputSpec(str(tmp / "wave2.ndjson"), "ndjson", 2)],
    output_dir=str(tmp / "out"),
)
result = run_pipeline(config, env={"TGFORWARD_KEY": "demo-key"})
manifest = result.manifest
print("status", manifest["status"])
print(json.dumps(manifest["stages"]["build"], indent=1))
print(json.dumps(manifest["stages"]["classify"]["roles"], indent=1))
print(sorted(p.name for p in (tmp / "out").iterdir()))

bundle = read_gexf(tmp / "out" / "graph.gexf")
print(bundle.graph.node_count, "nodes and", bundle.graph.edge_count, "edges in the GEXF")
print(open(tmp / "out" / "key_users.csv").read()[:400])

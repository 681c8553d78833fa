# Key-user roles on a graph built to reproduce a known role table.

from collections import Counter

from tgforward.classify import RoleConfig, classify, eligible_nodes, thresholds
from tgforward.metrics import metrics_table
from tgforward.model import build_graph
from tgforward.synthetic import table1_fixture

fx = table1_fixture()
g = build_graph(fx.records)
m = metrics_table(g)
config = RoleConfig()

eligible = eligible_nodes(g, m, config)
cut = thresholds(m, eligible, config)
print(len(eligible), "eligible channels; high out >=", cut.high_out, "high in >=", cut.high_in)

expected = fx.expected_roles()
for a in classify(g, m, config):
    if a.entity in expected:
        flag = "ok" if a.role.value == expected[a.entity] else "MISMATCH"
        print(f"{a.entity:28s} f={a.f:5d} in={a.in_degree:3d} out={a.out_degree:3d} {a.role.value:20s} {flag}")

print(Counter(a.role.value for a in classify(g, m, config)))

# Absolute thresholds skip the percentile step entirely.
strict = RoleConfig(high_out=50, high_in=50)
print(Counter(a.role.value for a in classify(g, m, strict)))

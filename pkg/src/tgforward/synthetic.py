"""Planted corpora and fixture graphs with known ground truth.

The generators here produce inputs whose answers are fixed by construction:
record counts, distinct pairs, heavy sources, degree tuples. Tests and demo
scripts use them in place of the unavailable real collection.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .model import Entity, EntityKind, ForwardGraph, ForwardRecord

AUGUST_2022 = datetime(2022, 8, 1, tzinfo=timezone.utc)
MONTH_SECONDS = 31 * 24 * 3600

# name: (role label, f, in-degree, out-degree)
TABLE1 = {
    "jairbolsonarobrasil": ("Conversation starter", 1491, 0, 38),
    "OsPatriotas": ("Influencer", 1373, 12, 29),
    "QBrasilNews": ("Network creator", 919, 47, 24),
    "juventuderevoltada": ("Active engager", 916, 130, 16),
    "OrdemDourada_Oficial": ("Network creator", 757, 57, 21),
    "oinformanteoficial": ("Conversation starter", 551, 4, 38),
    "ContraOTotalitarismoDaNOM": ("Active engager", 461, 41, 4),
    "bielconn": ("Influencer", 349, 26, 30),
}
TABLE1_INFLUENCERS = ("OsPatriotas", "bielconn")
TABLE1_NETWORK_CREATORS = ("QBrasilNews", "OrdemDourada_Oficial")

# Zachary's karate club, 34 members, 78 ties.
KARATE_EDGES = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11),
    (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3), (1, 7), (1, 13),
    (1, 17), (1, 19), (1, 21), (1, 30), (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27),
    (2, 28), (2, 32), (3, 7), (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16),
    (6, 16), (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33), (15, 32),
    (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33), (22, 32), (22, 33), (23, 25),
    (23, 27), (23, 29), (23, 32), (23, 33), (24, 25), (24, 27), (24, 31), (25, 31), (26, 29),
    (26, 33), (27, 33), (28, 31), (28, 33), (29, 32), (29, 33), (30, 32), (30, 33), (31, 32),
    (31, 33), (32, 33),
]


def graph_from_edges(edges, kind: EntityKind = EntityKind.CHANNEL, n: int | None = None) -> ForwardGraph:
    """ForwardGraph over integer-labelled nodes; weights default to 1.

    ``edges`` may hold ``(a, b)`` or ``(a, b, w)`` items. Ids are zero-padded
    so that id order matches numeric order.
    """
    edges = [e if len(e) == 3 else (e[0], e[1], 1) for e in edges]
    labels = set(range(n)) if n is not None else set()
    for a, b, _ in edges:
        labels.update((a, b))
    width = max(len(str(max(labels, default=0))), 1)
    name = {v: f"n{v:0{width}d}" for v in labels}
    weights: Counter = Counter()
    for a, b, w in edges:
        weights[(name[a], name[b])] += w
    nodes = {name[v]: Entity(name[v], name[v], kind) for v in labels}
    return ForwardGraph(nodes=nodes, edges=dict(weights))


def karate_club() -> ForwardGraph:
    return graph_from_edges(KARATE_EDGES)


def _timestamps(rng: np.random.Generator, n: int) -> list[datetime]:
    secs = rng.integers(0, MONTH_SECONDS, size=n)
    return [AUGUST_2022 + timedelta(seconds=int(s)) for s in secs]


def records_from_pairs(
    pairs: dict[tuple[str, str], int],
    kinds: dict[str, EntityKind],
    rng: np.random.Generator,
    prefix: str = "m",
) -> list[ForwardRecord]:
    """Expand weighted ``(source, chat)`` pairs into individual forward records."""
    out = []
    total = sum(pairs.values())
    stamps = _timestamps(rng, total)
    i = 0
    for (src, dst), w in pairs.items():
        for _ in range(w):
            out.append(ForwardRecord(f"{prefix}{i}", dst, kinds[dst], stamps[i], src, kinds[src]))
            i += 1
    return out


def _split(total: int, parts: int, rng: np.random.Generator) -> np.ndarray:
    """``parts`` positive integers summing to ``total``."""
    if parts == 0:
        return np.zeros(0, dtype=np.int64)
    return 1 + rng.multinomial(total - parts, np.full(parts, 1.0 / parts))


@dataclass
class Table1Fixture:
    records: list[ForwardRecord]
    pairs: dict[tuple[str, str], int]
    kinds: dict[str, EntityKind]
    fillers: list[str]
    eligible_fillers: list[str]

    def expected_roles(self) -> dict[str, str]:
        return {name.lower(): row[0] for name, row in TABLE1.items()}


def table1_fixture(seed: int = 0, fillers: int = 40, eligible_fillers: int = 7) -> Table1Fixture:
    """Graph whose eight named channels carry Table-1 style degree tuples.

    Named channels get exactly the listed in/out degrees and frequencies.
    Both network creators are linked to both influencers. The filler
    channels have degree (2, 1); ``eligible_fillers`` of them carry enough
    forwarding volume to clear the default frequency floor, the rest do not.
    """
    rng = np.random.default_rng(seed)
    kinds: dict[str, EntityKind] = {name: EntityKind.CHANNEL for name in TABLE1}
    groups = [f"grupo_{i:02d}" for i in range(40)]
    users = [f"user_{i:03d}" for i in range(150)]
    kinds.update({g: EntityKind.GROUP for g in groups})
    kinds.update({u: EntityKind.USER for u in users})

    structural = [(i, c) for i in TABLE1_INFLUENCERS for c in TABLE1_NETWORK_CREATORS]
    pairs: dict[tuple[str, str], int] = {p: 1 for p in structural}
    for name, (_, f, din, dout) in TABLE1.items():
        own_in = din - sum(1 for s, t in structural if t == name)
        own_out = dout - sum(1 for s, t in structural if s == name)
        ins = [(u, name) for u in rng.choice(users, size=own_in, replace=False)]
        outs = [(name, g) for g in rng.choice(groups, size=own_out, replace=False)]
        own = ins + outs
        shared = sum(1 for p in structural if name in p)
        for p, w in zip(own, _split(f - shared, len(own), rng)):
            pairs[p] = int(w)

    filler_names = [f"canal_{i:02d}" for i in range(fillers)]
    heavy = filler_names[:eligible_fillers]
    for name in filler_names:
        kinds[name] = EntityKind.CHANNEL
        srcs = rng.choice(users, size=2, replace=False)
        dst = str(rng.choice(groups))
        weight = 20 if name in heavy else 1
        pairs[(str(srcs[0]), name)] = weight
        pairs[(str(srcs[1]), name)] = weight
        pairs[(name, dst)] = weight

    records = records_from_pairs(pairs, kinds, rng, prefix="t")
    order = rng.permutation(len(records))
    records = [records[i] for i in order]
    return Table1Fixture(records, pairs, kinds, filler_names, heavy)


@dataclass
class PlantedCorpus:
    wave1: list[ForwardRecord]
    wave2: list[ForwardRecord]
    pairs: dict[tuple[str, str], int]
    kinds: dict[str, EntityKind]
    heavy_sources: list[str]
    entities: int
    stats: dict = field(default_factory=dict)

    @property
    def records(self) -> list[ForwardRecord]:
        return self.wave1 + self.wave2

    @property
    def forwards(self) -> int:
        return sum(self.pairs.values())


def full_scale_corpus(
    seed: int = 0,
    wave1_records: int = 195_567,
    wave2_records: int = 91_682,
    forwards: int = 80_508,
    entities: int = 2_517,
    pairs: int = 9_198,
    seed_groups: int = 25,
    heavy_users: int = 96,
    heavy_groups: int = 3,
    heavy_channels: int = 142,
    threshold: int = 50,
    numeric_share: float = 0.05,
) -> PlantedCorpus:
    """Two-wave collection with planted counts.

    Wave 1 is captured in ``seed_groups`` groups; exactly ``heavy_*`` sources
    appear there at least ``threshold`` times. Wave 2 is captured in the
    heavy groups and channels. Across both waves there are ``forwards``
    forwards from public usernames over ``pairs`` distinct (source, chat)
    pairs touching ``entities`` entities. The remaining records are plain
    messages or forwards from sources without a public username.
    """
    rng = np.random.default_rng(seed)
    seeds = [f"Grupo_Semente_{i:02d}" for i in range(seed_groups)]
    h_users = [f"usuario_{i:04d}" for i in range(heavy_users)]
    h_groups = [f"GrupoColetado{i:02d}" for i in range(heavy_groups)]
    h_channels = [f"Canal_{i:03d}" for i in range(heavy_channels)]
    heavy = h_users + h_groups + h_channels
    collected = h_groups + h_channels
    n_light = entities - len(seeds) - len(heavy)
    if n_light < 0:
        raise ValueError("not enough entities for the planted structure")
    light_options = [EntityKind.USER, EntityKind.CHANNEL, EntityKind.GROUP]
    light_kind = [light_options[i] for i in rng.choice(3, size=n_light, p=[0.7, 0.25, 0.05])]
    prefix = {EntityKind.USER: "pessoa", EntityKind.CHANNEL: "canal", EntityKind.GROUP: "grupo"}
    light = [f"{prefix[k]}_{i:05d}" for i, k in enumerate(light_kind)]

    kinds: dict[str, EntityKind] = {}
    kinds.update({s: EntityKind.GROUP for s in seeds})
    kinds.update({u: EntityKind.USER for u in h_users})
    kinds.update({g: EntityKind.GROUP for g in h_groups})
    kinds.update({c: EntityKind.CHANNEL for c in h_channels})
    kinds.update(dict(zip(light, light_kind)))
    names = list(kinds)
    seed_set = set(seeds)

    weights: dict[tuple[str, str], int] = {}
    for src in heavy:
        k = int(rng.integers(3, 7))
        dsts = rng.choice(seeds, size=k, replace=False)
        total = int(rng.integers(threshold, 5 * threshold))
        for dst, w in zip(dsts, _split(total, k, rng)):
            weights[(src, str(dst))] = int(w)
    chats = seeds + collected
    for src in light:
        dst = chats[int(rng.integers(len(chats)))]
        weights[(src, dst)] = int(rng.integers(1, 11)) if dst in seed_set else 1
    # Extra pairs land only in wave-2 chats so wave-1 source counts stay planted.
    while len(weights) < pairs:
        src = names[int(rng.integers(len(names)))]
        dst = collected[int(rng.integers(len(collected)))]
        if src != dst and (src, dst) not in weights:
            weights[(src, dst)] = 1
    if len(weights) != pairs:
        raise ValueError("planted structure already exceeds the requested pair count")
    wave2_pairs = [p for p in weights if p[1] not in seed_set]
    remaining = forwards - sum(weights.values())
    if remaining < 0:
        raise ValueError("planted structure already exceeds the requested forward count")
    extra = rng.multinomial(remaining, np.full(len(wave2_pairs), 1.0 / len(wave2_pairs)))
    for p, e in zip(wave2_pairs, extra):
        weights[p] += int(e)

    waves = []
    for wave, (target, chat_pool) in enumerate(((wave1_records, seeds), (wave2_records, collected)), start=1):
        wp = {p: w for p, w in weights.items() if (p[1] in seed_set) == (wave == 1)}
        recs = records_from_pairs(wp, kinds, rng, prefix=f"w{wave}-f")
        rest = target - len(recs)
        if rest < 0:
            raise ValueError(f"wave {wave} cannot hold its planted forwards")
        numeric = int(round(rest * numeric_share))
        stamps = _timestamps(rng, rest)
        for i in range(rest):
            chat = chat_pool[int(rng.integers(len(chat_pool)))]
            if i < numeric:
                src, skind = str(int(rng.integers(10**8, 10**10))), EntityKind.UNKNOWN
            else:
                src, skind = None, EntityKind.UNKNOWN
            recs.append(ForwardRecord(f"w{wave}-p{i}", chat, kinds[chat], stamps[i], src, skind))
        order = rng.permutation(len(recs))
        waves.append([recs[i] for i in order])

    touched = {x for p in weights for x in p}
    stats = {
        "records": wave1_records + wave2_records,
        "wave1_records": wave1_records,
        "wave2_records": wave2_records,
        "forwards": forwards,
        "pairs": len(weights),
        "entities": len(touched),
        "heavy_sources": len(heavy),
    }
    return PlantedCorpus(waves[0], waves[1], weights, kinds, sorted(heavy), len(touched), stats)

from __future__ import annotations

import random
from dataclasses import replace
from pathlib import Path

import pytest

from ege.formats import (
    CorpusFile,
    Document,
    ImageRecord,
    parse_corpus,
    parse_graph,
    parse_instance,
    parse_schema,
)
from ege.model import (
    Argument,
    EntityNode,
    EventNode,
    EventType,
    GateSpec,
    ImageProvenance,
    InstantiatedGraph,
    MATCHED,
    PREDICTED,
    SOURCE_ONLY,
    TemporalEdge,
    TextProvenance,
)

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def fixture_bytes(name: str) -> bytes:
    return (FIXTURES / name).read_bytes()


@pytest.fixture(scope="session")
def corpus() -> CorpusFile:
    parsed = parse_corpus(fixture_bytes("cholera_corpus.json"))
    assert not isinstance(parsed, list)
    return parsed


@pytest.fixture(scope="session")
def schema():
    parsed = parse_schema(fixture_bytes("outbreak_schema.json"))
    assert not isinstance(parsed, list)
    return parsed


@pytest.fixture(scope="session")
def row_schema():
    parsed = parse_schema(fixture_bytes("outbreak_row_schema.json"))
    assert not isinstance(parsed, list)
    return parsed


@pytest.fixture(scope="session")
def instance():
    parsed = parse_instance(fixture_bytes("cholera_instance.json"))
    assert not isinstance(parsed, list)
    return parsed


@pytest.fixture(scope="session")
def row_graph() -> InstantiatedGraph:
    parsed = parse_graph(fixture_bytes("outbreak_row_graph.json"))
    assert not isinstance(parsed, list)
    return parsed


def with_statuses(g: InstantiatedGraph, statuses: dict[str, str]) -> InstantiatedGraph:
    """Row-graph variant with the given event statuses, kept invariant-clean."""
    some_record = next(iter(g.provenance))
    events = {}
    for ev in g.events.values():
        status = statuses.get(ev.id, ev.status)
        if status == MATCHED:
            ev = replace(ev, status=status, schema_ref=ev.id,
                         provenance=ev.provenance or (some_record,))
        elif status == PREDICTED:
            ev = replace(ev, status=status, schema_ref=ev.id, provenance=())
        else:
            ev = replace(ev, status=status, schema_ref=None)
        events[ev.id] = ev
    pairs = tuple(sorted((eid, eid) for eid, ev in events.items() if ev.status == MATCHED))
    return replace(g, events=events, match_pairs=pairs)


# ---------------------------------------------------------------------------
# Random valid graphs (and a corpus to resolve their provenance against)


_DOC_TEXTS = [
    "Alpha paragraph opens the report with context.\n\n"
    "Beta paragraph carries the infection numbers and names the district.\n\n"
    "Gamma paragraph closes with the agency's advice to residents.",
    "Short bulletin without any blank separators, one paragraph only.",
]


def random_corpus(rng: random.Random) -> CorpusFile:
    documents = []
    for i, text in enumerate(_DOC_TEXTS, start=1):
        images = [
            ImageRecord(image_id=f"rimg-{i}-{k}", media=f"media/rimg-{i}-{k}.jpg", width=320, height=240)
            for k in range(rng.randint(1, 2))
        ]
        documents.append(Document(doc_id=f"rdoc-{i}", title=f"Report {i}", text=text, images=images))
    return CorpusFile(documents=documents)


def random_graph(
    rng: random.Random,
    max_events: int = 12,
    max_entities: int = 5,
    corpus: CorpusFile | None = None,
    edge_probability: float = 0.35,
) -> tuple[InstantiatedGraph, CorpusFile]:
    """A structurally valid instantiated graph: forest hierarchy, acyclic
    sibling temporal relations, resolvable arguments and provenance."""
    corpus = corpus or random_corpus(rng)
    n = rng.randint(1, max_events)
    ids = [f"ev-{i:02d}" for i in range(n)]

    parent: dict[str, str | None] = {}
    children: dict[str, list[str]] = {eid: [] for eid in ids}
    for i, eid in enumerate(ids):
        if i == 0 or rng.random() < 0.3:
            parent[eid] = None
        else:
            chosen = rng.choice(ids[:i])
            parent[eid] = chosen
            children[chosen].append(eid)
    roots = [eid for eid in ids if parent[eid] is None]

    records: dict[str, TextProvenance | ImageProvenance] = {}

    def make_record(owner: str) -> str:
        pid = f"prov-{owner}-{len(records)}"
        if rng.random() < 0.75:
            doc = rng.choice(corpus.documents)
            length = rng.randint(3, 12)
            start = rng.randint(0, max(0, len(doc.text) - length))
            end = min(len(doc.text), start + length)
            records[pid] = TextProvenance(pid, doc.doc_id, start, end, doc.text[start:end])
        else:
            doc = rng.choice([d for d in corpus.documents if d.images] or corpus.documents)
            img = rng.choice(doc.images)
            w = rng.randint(1, img.width)
            h = rng.randint(1, img.height)
            x = rng.randint(0, img.width - w)
            y = rng.randint(0, img.height - h)
            records[pid] = ImageProvenance(pid, img.image_id, (x, y, w, h))
        return pid

    m = rng.randint(0, max_entities)
    entities = {}
    for j in range(m):
        ent_id = f"ent-{j:02d}"
        prov = (make_record(ent_id),) if rng.random() < 0.8 else ()
        entities[ent_id] = EntityNode(ent_id, f"Entity {j}", None, prov)

    roles = ["agent", "theme", "place", "topic", "victim"]
    events = {}
    for eid in ids:
        status = rng.choice([MATCHED, SOURCE_ONLY, PREDICTED])
        args = []
        if entities:
            pool = rng.sample(sorted(entities), k=rng.randint(0, min(3, len(entities))))
            for order, ent_id in enumerate(pool):
                args.append(Argument(rng.choice(roles), ent_id, order))
        common = dict(
            id=eid,
            name=f"Event {eid}",
            description=f"Synthetic event {eid}.",
            event_type=EventType(f"Q{rng.randint(1, 999)}", "synthetic"),
            confidence=round(rng.random(), 3),
            children=tuple(children[eid]),
            arguments=tuple(args),
        )
        if status == MATCHED:
            events[eid] = EventNode(status=MATCHED, provenance=(make_record(eid),),
                                    schema_ref=f"s-{eid}", **common)
        elif status == PREDICTED:
            events[eid] = EventNode(status=PREDICTED, provenance=(), schema_ref=f"s-{eid}", **common)
        else:
            prov = (make_record(eid),) if rng.random() < 0.5 else ()
            events[eid] = EventNode(status=SOURCE_ONLY, provenance=prov, schema_ref=None, **common)

    temporal = []
    groups = [roots] + [kids for kids in children.values() if kids]
    for group in groups:
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                if rng.random() < edge_probability:
                    temporal.append(TemporalEdge(group[i], group[j]))

    gates = []
    for eid in ids:
        kids = children[eid]
        if len(kids) >= 1 and rng.random() < 0.3:
            members = tuple(rng.sample(kids, k=rng.randint(1, len(kids))))
            gates.append(GateSpec(f"gate:{eid}", eid, rng.choice(["AND", "OR", "XOR"]), members, "children"))

    graph = InstantiatedGraph(
        events=events,
        entities=entities,
        temporal=tuple(temporal),
        gates=tuple(gates),
        roots=tuple(roots),
        match_pairs=tuple(sorted((f"s-{eid}", eid) for eid in ids if events[eid].status == MATCHED)),
        provenance=records,
    )
    return graph, corpus

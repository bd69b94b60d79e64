"""Domain types for instantiated event graphs and their structural checks.

Everything here is an immutable value: graphs are never mutated in place,
the editor builds new graphs instead. Validation reports problems as
diagnostic values rather than exceptions so callers (CLI, service, UI) can
display them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

MATCHED = "matched"
SOURCE_ONLY = "source-only"
PREDICTED = "predicted"
STATUSES = (MATCHED, SOURCE_ONLY, PREDICTED)

GATE_AND = "AND"
GATE_OR = "OR"
GATE_XOR = "XOR"
GATE_KINDS = (GATE_AND, GATE_OR, GATE_XOR)

PLACEMENT_CHILDREN = "children"
PLACEMENT_SUCCESSORS = "successors"
PLACEMENTS = (PLACEMENT_CHILDREN, PLACEMENT_SUCCESSORS)

SATISFIED = "satisfied"
PENDING = "pending"
VIOLATED = "violated"

_SEVERITY_RANK = {"error": 0, "warning": 1}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: str  # "error" | "warning"
    subject: str
    message: str


def error(code: str, subject: str, message: str) -> Diagnostic:
    return Diagnostic(code, "error", subject, message)


def warning(code: str, subject: str, message: str) -> Diagnostic:
    return Diagnostic(code, "warning", subject, message)


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    """Deterministic report order: errors first, then by subject and code."""
    return sorted(diags, key=lambda d: (_SEVERITY_RANK[d.severity], d.subject, d.code))


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity == "error" for d in diags)


class EngineError(Exception):
    """Raised for precondition violations on operations (not graph problems)."""

    def __init__(self, code: str, subject: str = "", message: str = ""):
        super().__init__(message or code)
        self.code = code
        self.subject = subject
        self.message = message or code

    def as_diagnostic(self) -> Diagnostic:
        return error(self.code, self.subject, self.message)


@dataclass(frozen=True)
class EventType:
    """Ontology type reference: knowledge-base node id plus a readable name."""

    qnode: str
    name: str = ""


@dataclass(frozen=True)
class Argument:
    role: str
    filler: str  # entity id
    order: int


@dataclass(frozen=True)
class EventNode:
    id: str
    name: str
    description: str = ""
    event_type: EventType = EventType("")
    status: str = SOURCE_ONLY
    confidence: float = 1.0
    children: tuple[str, ...] = ()
    arguments: tuple[Argument, ...] = ()
    provenance: tuple[str, ...] = ()
    schema_ref: str | None = None

    def sorted_arguments(self) -> list[Argument]:
        return sorted(self.arguments, key=lambda a: a.order)


@dataclass(frozen=True)
class EntityNode:
    id: str
    name: str
    wd_qnode: str | None = None
    provenance: tuple[str, ...] = ()


@dataclass(frozen=True)
class TemporalEdge:
    before: str
    after: str


@dataclass(frozen=True)
class GateSpec:
    id: str
    source: str
    kind: str  # AND | OR | XOR
    members: tuple[str, ...]
    placement: str = PLACEMENT_CHILDREN


@dataclass(frozen=True)
class GateStatus:
    gate: str  # GateSpec id
    verdict: str  # satisfied | pending | violated
    occurred: tuple[str, ...]


@dataclass(frozen=True)
class TextProvenance:
    id: str
    doc_id: str
    start: int
    end: int
    text: str


@dataclass(frozen=True)
class ImageProvenance:
    id: str
    image_id: str
    bbox: tuple[float, float, float, float]  # x, y, w, h in pixels


ProvenanceRecord = Union[TextProvenance, ImageProvenance]


@dataclass(frozen=True)
class InstantiatedGraph:
    """Result of instantiating a schema with an extracted event graph.

    `events` and `entities` are insertion-ordered id maps; `match_pairs`
    records (schema event id, instance event id) for matched nodes;
    `provenance` carries the grounding records the nodes reference.
    Treat all containers as frozen.
    """

    events: dict[str, EventNode] = field(default_factory=dict)
    entities: dict[str, EntityNode] = field(default_factory=dict)
    temporal: tuple[TemporalEdge, ...] = ()
    gates: tuple[GateSpec, ...] = ()
    roots: tuple[str, ...] = ()
    match_pairs: tuple[tuple[str, str], ...] = ()
    provenance: dict[str, ProvenanceRecord] = field(default_factory=dict)


def parent_map(g: InstantiatedGraph) -> dict[str, str]:
    """child id -> parent id, for children that exist."""
    parents: dict[str, str] = {}
    for ev in g.events.values():
        for child in ev.children:
            if child in g.events and child not in parents:
                parents[child] = ev.id
    return parents


def sibling_groups(g: InstantiatedGraph) -> list[tuple[str | None, tuple[str, ...]]]:
    """(parent id or None for the root group, member ids) per hierarchy group."""
    groups: list[tuple[str | None, tuple[str, ...]]] = []
    if g.roots:
        groups.append((None, tuple(r for r in g.roots if r in g.events)))
    for ev in g.events.values():
        if ev.children:
            groups.append((ev.id, tuple(c for c in ev.children if c in g.events)))
    return groups


def successors_of(g: InstantiatedGraph, event_id: str) -> set[str]:
    return {e.after for e in g.temporal if e.before == event_id}


def _group_edges(g: InstantiatedGraph, members: tuple[str, ...]) -> list[tuple[str, str]]:
    member_set = set(members)
    return [
        (e.before, e.after)
        for e in g.temporal
        if e.before in member_set and e.after in member_set
    ]


def _elementary_cycles(nodes: Iterable[str], edges: list[tuple[str, str]]) -> list[list[str]]:
    """All elementary directed cycles, each rotated to start at its smallest node."""
    adjacency: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in edges:
        if b not in adjacency[a]:
            adjacency[a].append(b)
    for nbrs in adjacency.values():
        nbrs.sort()

    cycles: list[list[str]] = []

    def explore(start: str, node: str, path: list[str], on_path: set[str]) -> None:
        for nxt in adjacency[node]:
            if nxt == start:
                cycles.append(list(path))
            elif nxt > start and nxt not in on_path:
                path.append(nxt)
                on_path.add(nxt)
                explore(start, nxt, path, on_path)
                on_path.discard(nxt)
                path.pop()

    # Rooting each cycle at its minimal node yields every cycle exactly once.
    for start in sorted(adjacency):
        explore(start, start, [start], {start})
    return sorted(cycles)


def detect_temporal_cycles(g: InstantiatedGraph) -> list[list[str]]:
    """Elementary cycles of the temporal relation restricted to sibling groups.

    Empty exactly when every group's restricted relation is a DAG. Cycles are
    reported rotated to their smallest vertex and sorted.
    """
    cycles: list[list[str]] = []
    for _, members in sibling_groups(g):
        edges = _group_edges(g, members)
        if edges:
            cycles.extend(_elementary_cycles(members, edges))
    return sorted(cycles)


def occurred(node: EventNode) -> bool:
    """Predicted nodes are hypotheses; only matched and source-only count."""
    return node.status in (MATCHED, SOURCE_ONLY)


def check_gates(
    g: InstantiatedGraph,
    mode: str = "progressive",
    terminal: frozenset[str] | set[str] = frozenset(),
) -> list[GateStatus]:
    """Evaluate every gate against member occurrence.

    Progressive mode never marks AND/OR violated, only pending; in strict
    mode a pending gate whose source event is in `terminal` is violated
    (the complex event ended, the constraint can no longer be met).
    """
    statuses: list[GateStatus] = []
    for gate in g.gates:
        for member in gate.members:
            if member not in g.events:
                raise EngineError("UNKNOWN_MEMBER", gate.id, f"gate member {member!r} does not exist")
        occ = tuple(m for m in gate.members if occurred(g.events[m]))
        n_occ = len(occ)
        if gate.kind == GATE_XOR:
            verdict = SATISFIED if n_occ == 1 else (PENDING if n_occ == 0 else VIOLATED)
        elif gate.kind == GATE_OR:
            verdict = SATISFIED if n_occ >= 1 else PENDING
        elif gate.kind == GATE_AND:
            verdict = SATISFIED if n_occ == len(gate.members) else PENDING
        else:
            raise EngineError("UNKNOWN_MEMBER", gate.id, f"unknown gate kind {gate.kind!r}")
        if mode == "strict" and verdict == PENDING and gate.source in terminal:
            verdict = VIOLATED
        statuses.append(GateStatus(gate.id, verdict, occ))
    return statuses


def entity_occurrence_counts(g: InstantiatedGraph) -> list[tuple[str, int]]:
    """(entity id, number of distinct events it fills an argument in),
    sorted by count descending then id; zero-count entities at the tail."""
    counts = {eid: 0 for eid in g.entities}
    for ev in g.events.values():
        for eid in {a.filler for a in ev.arguments}:
            if eid in counts:
                counts[eid] += 1
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))


def _hierarchy_cycles(g: InstantiatedGraph) -> list[list[str]]:
    edges = [
        (ev.id, child)
        for ev in g.events.values()
        for child in ev.children
        if child in g.events
    ]
    return _elementary_cycles(g.events.keys(), edges)


def validate_graph(g: InstantiatedGraph, corpus=None) -> list[Diagnostic]:
    """Structural validation; returns a deterministic, sorted report.

    Zero errors iff every type invariant holds. When a corpus is supplied,
    provenance records are additionally resolved against it (see
    provenance.check_corpus).
    """
    diags: list[Diagnostic] = []

    for ev in g.events.values():
        if not 0.0 <= ev.confidence <= 1.0:
            diags.append(error("CONFIDENCE_RANGE", ev.id, f"confidence {ev.confidence} outside [0, 1]"))
        if ev.status not in STATUSES:
            diags.append(error("BAD_STATUS", ev.id, f"unknown status {ev.status!r}"))
        if ev.status == PREDICTED and ev.provenance:
            diags.append(error("PREDICTED_HAS_PROVENANCE", ev.id, "predicted events carry no provenance"))
        if ev.status == SOURCE_ONLY and ev.schema_ref is not None:
            diags.append(error("SOURCE_ONLY_HAS_SCHEMA_REF", ev.id, "source-only events reference no schema event"))
        if ev.status == MATCHED and ev.schema_ref is None:
            diags.append(error("MATCHED_MISSING_SCHEMA_REF", ev.id, "matched events must reference their schema event"))
        if ev.status == MATCHED and not ev.provenance:
            diags.append(error("MATCHED_MISSING_PROVENANCE", ev.id, "matched events must be grounded in sources"))
        if ev.status == PREDICTED and ev.schema_ref is None:
            diags.append(error("PREDICTED_MISSING_SCHEMA_REF", ev.id, "predicted events must reference their schema event"))
        if ev.id in ev.children:
            diags.append(error("SELF_CHILD", ev.id, "event lists itself as a child"))
        seen_children: set[str] = set()
        for child in ev.children:
            if child in seen_children:
                diags.append(error("DUPLICATE_CHILD", ev.id, f"child {child!r} listed twice"))
            seen_children.add(child)
            if child not in g.events:
                diags.append(error("CHILD_MISSING", ev.id, f"child {child!r} does not exist"))
        seen_pairs: set[tuple[str, str]] = set()
        seen_orders: set[int] = set()
        for arg in ev.arguments:
            if arg.filler not in g.entities:
                diags.append(error("ARG_ENTITY_MISSING", ev.id, f"argument {arg.role!r} filler {arg.filler!r} does not exist"))
            pair = (arg.role, arg.filler)
            if pair in seen_pairs:
                diags.append(error("DUPLICATE_ARGUMENT", ev.id, f"duplicate argument ({arg.role!r}, {arg.filler!r})"))
            seen_pairs.add(pair)
            if arg.order in seen_orders:
                diags.append(error("DUPLICATE_ARG_ORDER", ev.id, f"argument order {arg.order} used twice"))
            seen_orders.add(arg.order)
        for pid in ev.provenance:
            if pid not in g.provenance:
                diags.append(error("PROV_MISSING", ev.id, f"provenance {pid!r} does not resolve"))

    for ent in g.entities.values():
        if not ent.name:
            diags.append(error("ENTITY_NAME_EMPTY", ent.id, "entity name must be non-empty"))
        for pid in ent.provenance:
            if pid not in g.provenance:
                diags.append(error("PROV_MISSING", ent.id, f"provenance {pid!r} does not resolve"))

    seen_edges: set[tuple[str, str]] = set()
    for edge in g.temporal:
        subject = f"{edge.before}->{edge.after}"
        if edge.before == edge.after:
            diags.append(error("TEMPORAL_SELF_LOOP", subject, "temporal edge endpoints must differ"))
        for endpoint in (edge.before, edge.after):
            if endpoint not in g.events:
                diags.append(error("TEMPORAL_ENDPOINT_MISSING", subject, f"endpoint {endpoint!r} does not exist"))
        key = (edge.before, edge.after)
        if key in seen_edges:
            diags.append(error("DUPLICATE_TEMPORAL_EDGE", subject, "temporal edge listed twice"))
        seen_edges.add(key)

    # Hierarchy must form a forest rooted exactly at `roots`.
    child_refs: dict[str, list[str]] = {}
    for ev in g.events.values():
        for child in ev.children:
            if child in g.events:
                child_refs.setdefault(child, []).append(ev.id)
    seen_roots: set[str] = set()
    for root in g.roots:
        if root not in g.events:
            diags.append(error("ROOT_MISSING", root, "root does not exist"))
            continue
        if root in seen_roots:
            diags.append(error("DUPLICATE_ROOT", root, "root listed twice"))
        seen_roots.add(root)
        if root in child_refs:
            diags.append(error("ROOT_HAS_PARENT", root, f"root is a child of {child_refs[root][0]!r}"))
    for child, parents in child_refs.items():
        if len(parents) > 1:
            diags.append(error("MULTIPLE_PARENTS", child, f"child of {sorted(parents)}"))
    for ev in g.events.values():
        if ev.id not in child_refs and ev.id not in seen_roots:
            diags.append(error("ORPHAN_EVENT", ev.id, "event has no parent and is not a root"))
    for cycle in _hierarchy_cycles(g):
        diags.append(error("HIERARCHY_CYCLE", cycle[0], "hierarchy cycle: " + " -> ".join(cycle + [cycle[0]])))

    seen_gate_ids: set[str] = set()
    for gate in g.gates:
        if gate.id in seen_gate_ids:
            diags.append(error("DUPLICATE_GATE_ID", gate.id, "gate id used twice"))
        seen_gate_ids.add(gate.id)
        if gate.kind not in GATE_KINDS:
            diags.append(error("GATE_BAD_KIND", gate.id, f"unknown gate kind {gate.kind!r}"))
        if gate.placement not in PLACEMENTS:
            diags.append(error("GATE_BAD_PLACEMENT", gate.id, f"unknown placement {gate.placement!r}"))
        if not gate.members:
            diags.append(error("GATE_EMPTY", gate.id, "gate has no members"))
        if len(set(gate.members)) != len(gate.members):
            diags.append(error("GATE_DUPLICATE_MEMBER", gate.id, "gate members must be distinct"))
        if gate.source not in g.events:
            diags.append(error("GATE_SOURCE_MISSING", gate.id, f"source {gate.source!r} does not exist"))
            continue
        source = g.events[gate.source]
        for member in gate.members:
            if member not in g.events:
                diags.append(error("GATE_MEMBER_MISSING", gate.id, f"member {member!r} does not exist"))
            elif gate.placement == PLACEMENT_CHILDREN and member not in source.children:
                diags.append(error("GATE_MEMBER_NOT_CHILD", gate.id, f"member {member!r} is not a child of {gate.source!r}"))
            elif gate.placement == PLACEMENT_SUCCESSORS and member not in successors_of(g, gate.source):
                diags.append(error("GATE_MEMBER_NOT_SUCCESSOR", gate.id, f"no temporal edge {gate.source!r} -> {member!r}"))

    seen_schema: set[str] = set()
    seen_instance: set[str] = set()
    for schema_id, instance_id in g.match_pairs:
        subject = f"{schema_id}={instance_id}"
        if schema_id in seen_schema or instance_id in seen_instance:
            diags.append(error("MATCH_NOT_INJECTIVE", subject, "match pairs must be one-to-one"))
        seen_schema.add(schema_id)
        seen_instance.add(instance_id)
        node = g.events.get(instance_id)
        if node is None:
            diags.append(error("MATCH_EVENT_MISSING", subject, f"matched event {instance_id!r} does not exist"))
        elif node.status != MATCHED or node.schema_ref != schema_id:
            diags.append(error("MATCH_STATUS_MISMATCH", subject, "match pair disagrees with node status/schema_ref"))

    for cycle in detect_temporal_cycles(g):
        diags.append(error("TEMPORAL_CYCLE", cycle[0], "temporal cycle: " + " -> ".join(cycle + [cycle[0]])))

    if corpus is not None:
        from . import provenance as _provenance

        diags.extend(_provenance.check_corpus(g, corpus))

    return sort_diagnostics(diags)

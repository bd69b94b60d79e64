"""Instantiate a schema with an extracted instance graph.

Schema events are visited top-down by hierarchy depth; at each depth the
candidate (schema event, instance event) pairs scoring at or above the
threshold are accepted greedily in a fixed tie-break order, skipping any
acceptance that would contradict the temporal order already established
among accepted siblings. Unmatched schema events become predicted nodes;
leftover instance events attach as source-only children of the matched
node they share the most argument entities with.

The scorer is deliberately simple and deterministic (exact type identity,
else token-set Dice similarity of names) so results are reproducible and
oracle-checkable; a learned scorer can replace score_match behind the same
result type.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .formats import InstanceEvent, InstanceFile, SchemaEvent, SchemaFile
from .model import (
    Argument,
    EngineError,
    EntityNode,
    EventNode,
    EventType,
    GateSpec,
    InstantiatedGraph,
    MATCHED,
    PREDICTED,
    SOURCE_ONLY,
    TemporalEdge,
)

MATCHED_BY_TYPE = "matched-by-type"
MATCHED_BY_NAME = "matched-by-name"
DECISION_PREDICTED = "predicted"
DECISION_ATTACHED = "attached"


@dataclass(frozen=True)
class MatchConfig:
    """Threshold for accepting a pair; must lie in (0, 1]."""

    tau: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.tau <= 1.0:
            raise EngineError("BAD_TAU", "tau", f"threshold must be in (0, 1], got {self.tau}")


@dataclass
class MatchResult:
    graph: InstantiatedGraph
    decisions: dict[str, str] = field(default_factory=dict)  # output event id -> decision


def _tokens(name: str) -> frozenset[str]:
    return frozenset(name.lower().split())


def score_match(schema_event: SchemaEvent, instance_event: InstanceEvent, cfg: MatchConfig | None = None) -> float:
    """1.0 on identical type qnodes, else Dice similarity of name token sets."""
    if schema_event.wd_node and schema_event.wd_node == instance_event.type:
        return 1.0
    a = _tokens(schema_event.name)
    b = _tokens(instance_event.name)
    if not a or not b:
        return 0.0
    return 2.0 * len(a & b) / (len(a) + len(b))


def _depth_levels(schema: SchemaFile) -> list[list[str]]:
    index = schema.event_index()
    levels: list[list[str]] = []
    frontier = [r for r in schema.roots if r in index]
    seen: set[str] = set()
    while frontier:
        levels.append(frontier)
        nxt: list[str] = []
        for eid in frontier:
            seen.add(eid)
            for child in index[eid].children:
                if child in index and child not in seen:
                    nxt.append(child)
        frontier = nxt
    return levels


def _schema_parent_map(schema: SchemaFile) -> dict[str, str]:
    parents: dict[str, str] = {}
    for ev in schema.events:
        for child in ev.children:
            parents.setdefault(child, ev.id)
    return parents


def _blocks_temporal(
    s_id: str,
    e_id: str,
    accepted_siblings: list[tuple[str, str]],
    schema_out: dict[str, set[str]],
    instance_out: dict[str, set[str]],
) -> bool:
    """Schema says s before s2 while the instance says e2 before e, or vice versa."""
    for s2, e2 in accepted_siblings:
        if s2 in schema_out.get(s_id, ()) and e_id in instance_out.get(e2, ()):
            return True
        if s_id in schema_out.get(s2, ()) and e2 in instance_out.get(e_id, ()):
            return True
    return False


def match_pairs_greedy(
    schema: SchemaFile, instance: InstanceFile, cfg: MatchConfig
) -> list[tuple[str, str]]:
    """Steps 1-4 of the instantiation algorithm: the accepted (schema, instance) pairs."""
    if not schema.roots:
        raise EngineError("EMPTY_SCHEMA", schema.id, "schema has no root events")
    doc_order = {ev.id: i for i, ev in enumerate(schema.events)}
    schema_index = schema.event_index()
    instance_index = {ev.id: ev for ev in instance.events}
    schema_parents = _schema_parent_map(schema)
    schema_out = {ev.id: set(ev.outlinks) for ev in schema.events}
    instance_out: dict[str, set[str]] = {}
    for before, after in instance.temporal:
        instance_out.setdefault(before, set()).add(after)

    accepted: list[tuple[str, str]] = []
    matched_schema: set[str] = set()
    assigned_instance: set[str] = set()

    for level in _depth_levels(schema):
        candidates: list[tuple[float, int, str, str]] = []
        for s_id in level:
            s_ev = schema_index[s_id]
            for e_id, e_ev in instance_index.items():
                if e_id in assigned_instance:
                    continue
                score = score_match(s_ev, e_ev, cfg)
                if score >= cfg.tau:
                    candidates.append((score, doc_order[s_id], s_id, e_id))
        candidates.sort(key=lambda c: (-c[0], c[1], c[3]))
        for _score, _pos, s_id, e_id in candidates:
            if s_id in matched_schema or e_id in assigned_instance:
                continue
            parent = schema_parents.get(s_id)
            siblings = [
                (s2, e2) for s2, e2 in accepted
                if schema_parents.get(s2) == parent and s2 != s_id
            ]
            if _blocks_temporal(s_id, e_id, siblings, schema_out, instance_out):
                continue
            accepted.append((s_id, e_id))
            matched_schema.add(s_id)
            assigned_instance.add(e_id)
    return accepted


def _prediction_confidence(
    schema: SchemaFile, matched_schema: set[str]
) -> dict[str, float]:
    """Laplace-smoothed (occurred + 1) / (group size + 2) per unmatched schema event.

    Group occupancy is taken over schema-defined sibling groups before any
    source-only attachment happens.
    """
    confidences: dict[str, float] = {}
    groups: list[list[str]] = [list(schema.roots)]
    for ev in schema.events:
        if ev.children:
            groups.append(list(ev.children))
    for group in groups:
        n = len(group)
        m = sum(1 for sid in group if sid in matched_schema)
        for sid in group:
            if sid not in matched_schema:
                confidences[sid] = (m + 1) / (n + 2)
    return confidences


def match_graphs(schema: SchemaFile, instance: InstanceFile, cfg: MatchConfig | None = None) -> MatchResult:
    cfg = cfg or MatchConfig()
    pairs = match_pairs_greedy(schema, instance, cfg)
    schema_index = schema.event_index()
    instance_index = {ev.id: ev for ev in instance.events}
    schema_to_instance = dict(pairs)
    matched_schema = set(schema_to_instance)
    assigned_instance = set(schema_to_instance.values())
    predicted_conf = _prediction_confidence(schema, matched_schema)

    # Output ids: matched nodes keep the instance event id, predicted nodes the
    # schema event id. The two id spaces may collide; rename the predicted side.
    instance_ids = {ev.id for ev in instance.events}
    out_map: dict[str, str] = {}
    for s_ev in schema.events:
        if s_ev.id in matched_schema:
            out_map[s_ev.id] = schema_to_instance[s_ev.id]
        elif s_ev.id in instance_ids:
            out_map[s_ev.id] = f"{s_ev.id}~predicted"
        else:
            out_map[s_ev.id] = s_ev.id

    def out_id(schema_id: str) -> str:
        return out_map[schema_id]

    decisions: dict[str, str] = {}
    events: dict[str, EventNode] = {}

    # Schema-derived nodes, in schema document order.
    for s_ev in schema.events:
        node_id = out_id(s_ev.id)
        children = tuple(out_id(c) for c in s_ev.children if c in schema_index)
        if s_ev.id in matched_schema:
            e_ev = instance_index[node_id]
            score = score_match(s_ev, e_ev, cfg)
            events[node_id] = EventNode(
                id=node_id,
                name=e_ev.name,
                description=e_ev.description,
                event_type=EventType(s_ev.wd_node, s_ev.wd_name),
                status=MATCHED,
                confidence=score,
                children=children,
                arguments=_arguments_of(e_ev),
                provenance=tuple(e_ev.provenance),
                schema_ref=s_ev.id,
            )
            decisions[node_id] = (
                MATCHED_BY_TYPE if s_ev.wd_node and s_ev.wd_node == e_ev.type else MATCHED_BY_NAME
            )
        else:
            events[node_id] = EventNode(
                id=node_id,
                name=s_ev.name,
                description=s_ev.description,
                event_type=EventType(s_ev.wd_node, s_ev.wd_name),
                status=PREDICTED,
                confidence=predicted_conf[s_ev.id],
                children=children,
                schema_ref=s_ev.id,
            )
            decisions[node_id] = DECISION_PREDICTED

    # Leftover instance events become source-only nodes, in instance order.
    source_only_ids = [e.id for e in instance.events if e.id not in assigned_instance]
    for e_ev in (instance_index[eid] for eid in source_only_ids):
        events[e_ev.id] = EventNode(
            id=e_ev.id,
            name=e_ev.name,
            description=e_ev.description,
            event_type=EventType(e_ev.type),
            status=SOURCE_ONLY,
            confidence=e_ev.confidence if e_ev.confidence is not None else 1.0,
            arguments=_arguments_of(e_ev),
            provenance=tuple(e_ev.provenance),
        )
        decisions[e_ev.id] = DECISION_ATTACHED

    # Attach each leftover under the matched node sharing the most argument
    # entities with it; ties and zero overlap fall back to the scenario root.
    scenario_root = out_id(schema.roots[0])
    for eid in source_only_ids:
        own_entities = {a.filler for a in events[eid].arguments}
        best_count = 0
        best_nodes: list[str] = []
        for s_id, i_id in pairs:
            shared = len(own_entities & {a.filler for a in events[i_id].arguments})
            if shared > best_count:
                best_count = shared
                best_nodes = [i_id]
            elif shared == best_count and shared > 0:
                best_nodes.append(i_id)
        parent_id = best_nodes[0] if len(best_nodes) == 1 else scenario_root
        parent = events[parent_id]
        events[parent_id] = replace(parent, children=parent.children + (eid,))

    entities = {
        ent.id: EntityNode(ent.id, ent.name, ent.wd_qnode, tuple(ent.provenance))
        for ent in instance.entities
    }

    temporal: list[TemporalEdge] = []
    seen_edges: set[tuple[str, str]] = set()
    for s_ev in schema.events:
        for target in s_ev.outlinks:
            if target not in schema_index:
                continue
            edge = (out_id(s_ev.id), out_id(target))
            if edge not in seen_edges and edge[0] != edge[1]:
                seen_edges.add(edge)
                temporal.append(TemporalEdge(*edge))
    for before, after in instance.temporal:
        if (before, after) not in seen_edges and before != after:
            seen_edges.add((before, after))
            temporal.append(TemporalEdge(before, after))

    gates = tuple(
        GateSpec(
            id=f"gate:{s_ev.id}",
            source=out_id(s_ev.id),
            kind=s_ev.gate.kind,
            members=tuple(out_id(m) for m in s_ev.gate.members if m in schema_index),
            placement=s_ev.gate.placement,
        )
        for s_ev in schema.events
        if s_ev.gate is not None
    )

    graph = InstantiatedGraph(
        events=events,
        entities=entities,
        temporal=tuple(temporal),
        gates=gates,
        roots=tuple(out_id(r) for r in schema.roots),
        match_pairs=tuple(sorted(pairs)),
        provenance={rec.id: rec for rec in instance.provenance},
    )
    return MatchResult(graph=graph, decisions=decisions)


def _arguments_of(e_ev: InstanceEvent) -> tuple[Argument, ...]:
    return tuple(
        Argument(role=a.role, filler=a.filler, order=i)
        for i, a in enumerate(e_ev.arguments)
    )

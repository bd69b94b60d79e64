"""Sessioned editing: validated operations, linear undo/redo history, filters.

Every operation is validated against the model invariants before it commits;
an op may repair an existing problem but may never introduce a new error.
Because graphs are immutable values, each revision keeps the op together
with the graph it produced, so undo and redo restore prior states exactly
by moving a cursor. Applying an edit mid-history truncates the redo tail
(plain linear history, single analyst).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Union

from .formats import CorpusFile
from .model import (
    Argument,
    Diagnostic,
    EngineError,
    EventNode,
    EventType,
    GateSpec,
    ImageProvenance,
    InstantiatedGraph,
    TemporalEdge,
    TextProvenance,
    error,
    sort_diagnostics,
    validate_graph,
)

# ---------------------------------------------------------------------------
# Operation variants (closed set)


@dataclass(frozen=True)
class UpdateEventFields:
    id: str
    name: str | None = None
    description: str | None = None
    event_type: EventType | None = None


@dataclass(frozen=True)
class ReorderArguments:
    id: str
    new_order: tuple[int, ...]  # new row list = old rows permuted by these indices


@dataclass(frozen=True)
class AddArgument:
    id: str
    role: str
    entity: str
    order: int | None = None  # appended at the end when absent


@dataclass(frozen=True)
class RemoveArgument:
    id: str
    role: str
    entity: str


@dataclass(frozen=True)
class AddTemporalEdge:
    before: str
    after: str


@dataclass(frozen=True)
class RemoveTemporalEdge:
    before: str
    after: str


@dataclass(frozen=True)
class ReverseTemporalEdge:
    before: str
    after: str


@dataclass(frozen=True)
class SetGate:
    gate: GateSpec


@dataclass(frozen=True)
class RemoveGate:
    gate: str  # gate id


@dataclass(frozen=True)
class ReparentEvent:
    id: str
    new_parent: str | None  # None moves the event to the root list
    index: int | None = None  # position among the new siblings; appended when absent


@dataclass(frozen=True)
class DeleteEvent:
    id: str


@dataclass(frozen=True)
class MergeEntities:
    keep: str
    drop: str


@dataclass(frozen=True)
class UpdateTextSpan:
    id: str  # provenance id
    start: int
    end: int


@dataclass(frozen=True)
class UpdateBoundingBox:
    id: str  # provenance id
    bbox: tuple[float, float, float, float]


EditOp = Union[
    UpdateEventFields, ReorderArguments, AddArgument, RemoveArgument,
    AddTemporalEdge, RemoveTemporalEdge, ReverseTemporalEdge,
    SetGate, RemoveGate, ReparentEvent, DeleteEvent, MergeEntities,
    UpdateTextSpan, UpdateBoundingBox,
]

_OP_TYPES: dict[str, type] = {
    cls.__name__: cls
    for cls in (
        UpdateEventFields, ReorderArguments, AddArgument, RemoveArgument,
        AddTemporalEdge, RemoveTemporalEdge, ReverseTemporalEdge,
        SetGate, RemoveGate, ReparentEvent, DeleteEvent, MergeEntities,
        UpdateTextSpan, UpdateBoundingBox,
    )
}


# ---------------------------------------------------------------------------
# Wire form: tagged objects {"op": <variant name>, ...fields}


def op_to_obj(op: EditOp) -> dict:
    obj: dict = {"op": type(op).__name__}
    if isinstance(op, UpdateEventFields):
        obj["id"] = op.id
        if op.name is not None:
            obj["name"] = op.name
        if op.description is not None:
            obj["description"] = op.description
        if op.event_type is not None:
            obj["event_type"] = {"qnode": op.event_type.qnode, "name": op.event_type.name}
    elif isinstance(op, ReorderArguments):
        obj.update(id=op.id, new_order=list(op.new_order))
    elif isinstance(op, AddArgument):
        obj.update(id=op.id, role=op.role, entity=op.entity)
        if op.order is not None:
            obj["order"] = op.order
    elif isinstance(op, RemoveArgument):
        obj.update(id=op.id, role=op.role, entity=op.entity)
    elif isinstance(op, (AddTemporalEdge, RemoveTemporalEdge, ReverseTemporalEdge)):
        obj.update(before=op.before, after=op.after)
    elif isinstance(op, SetGate):
        obj["gate"] = {
            "id": op.gate.id, "source": op.gate.source, "kind": op.gate.kind,
            "members": list(op.gate.members), "placement": op.gate.placement,
        }
    elif isinstance(op, RemoveGate):
        obj["gate"] = op.gate
    elif isinstance(op, ReparentEvent):
        obj.update(id=op.id, new_parent=op.new_parent)
        if op.index is not None:
            obj["index"] = op.index
    elif isinstance(op, DeleteEvent):
        obj["id"] = op.id
    elif isinstance(op, MergeEntities):
        obj.update(keep=op.keep, drop=op.drop)
    elif isinstance(op, UpdateTextSpan):
        obj.update(id=op.id, start=op.start, end=op.end)
    elif isinstance(op, UpdateBoundingBox):
        obj.update(id=op.id, bbox=list(op.bbox))
    return obj


def op_from_obj(obj: dict) -> EditOp | list[Diagnostic]:
    if not isinstance(obj, dict) or "op" not in obj:
        return [error("BAD_OP", "op", "expected a tagged object {op: ..., ...}")]
    name = obj["op"]
    cls = _OP_TYPES.get(name)
    if cls is None:
        return [error("UNKNOWN_OP", str(name), f"unknown edit op {name!r}")]
    try:
        if cls is UpdateEventFields:
            et = obj.get("event_type")
            return UpdateEventFields(
                id=obj["id"],
                name=obj.get("name"),
                description=obj.get("description"),
                event_type=EventType(et["qnode"], et.get("name", "")) if et else None,
            )
        if cls is ReorderArguments:
            return ReorderArguments(id=obj["id"], new_order=tuple(int(i) for i in obj["new_order"]))
        if cls is AddArgument:
            return AddArgument(id=obj["id"], role=obj["role"], entity=obj["entity"], order=obj.get("order"))
        if cls is RemoveArgument:
            return RemoveArgument(id=obj["id"], role=obj["role"], entity=obj["entity"])
        if cls in (AddTemporalEdge, RemoveTemporalEdge, ReverseTemporalEdge):
            return cls(before=obj["before"], after=obj["after"])
        if cls is SetGate:
            raw = obj["gate"]
            return SetGate(gate=GateSpec(
                id=raw["id"], source=raw["source"], kind=raw["kind"],
                members=tuple(raw["members"]), placement=raw.get("placement", "children"),
            ))
        if cls is RemoveGate:
            return RemoveGate(gate=obj["gate"])
        if cls is ReparentEvent:
            return ReparentEvent(id=obj["id"], new_parent=obj.get("new_parent"), index=obj.get("index"))
        if cls is DeleteEvent:
            return DeleteEvent(id=obj["id"])
        if cls is MergeEntities:
            return MergeEntities(keep=obj["keep"], drop=obj["drop"])
        if cls is UpdateTextSpan:
            return UpdateTextSpan(id=obj["id"], start=int(obj["start"]), end=int(obj["end"]))
        if cls is UpdateBoundingBox:
            box = obj["bbox"]
            if not isinstance(box, list) or len(box) != 4:
                return [error("BAD_OP", name, "bbox must be [x, y, w, h]")]
            return UpdateBoundingBox(id=obj["id"], bbox=tuple(float(v) for v in box))
    except (KeyError, TypeError, ValueError) as exc:
        return [error("BAD_OP", name, f"malformed op payload: {exc}")]
    return [error("UNKNOWN_OP", str(name), f"unknown edit op {name!r}")]


# ---------------------------------------------------------------------------
# Graph rewriting helpers


def _replace_event(g: InstantiatedGraph, node: EventNode) -> InstantiatedGraph:
    events = dict(g.events)
    events[node.id] = node
    return replace(g, events=events)


def _reject(code: str, subject: str, message: str) -> list[Diagnostic]:
    return [error(code, subject, message)]


def _temporal_cycle_grows(before: InstantiatedGraph, after: InstantiatedGraph) -> bool:
    from .model import detect_temporal_cycles

    return len(detect_temporal_cycles(after)) > len(detect_temporal_cycles(before))


def _apply_op(g: InstantiatedGraph, op: EditOp, corpus: CorpusFile | None) -> InstantiatedGraph | list[Diagnostic]:
    if isinstance(op, UpdateEventFields):
        node = g.events.get(op.id)
        if node is None:
            return _reject("REF_MISSING", op.id, f"event {op.id!r} does not exist")
        return _replace_event(g, replace(
            node,
            name=op.name if op.name is not None else node.name,
            description=op.description if op.description is not None else node.description,
            event_type=op.event_type if op.event_type is not None else node.event_type,
        ))

    if isinstance(op, ReorderArguments):
        node = g.events.get(op.id)
        if node is None:
            return _reject("REF_MISSING", op.id, f"event {op.id!r} does not exist")
        rows = node.sorted_arguments()
        if sorted(op.new_order) != list(range(len(rows))):
            return _reject("BAD_PERMUTATION", op.id, f"new_order must permute 0..{len(rows) - 1}")
        reordered = tuple(
            replace(rows[old_index], order=new_index)
            for new_index, old_index in enumerate(op.new_order)
        )
        return _replace_event(g, replace(node, arguments=reordered))

    if isinstance(op, AddArgument):
        node = g.events.get(op.id)
        if node is None:
            return _reject("REF_MISSING", op.id, f"event {op.id!r} does not exist")
        if op.entity not in g.entities:
            return _reject("REF_MISSING", op.entity, f"entity {op.entity!r} does not exist")
        if any(a.role == op.role and a.filler == op.entity for a in node.arguments):
            return _reject("DUPLICATE_ARGUMENT", op.id, f"argument ({op.role!r}, {op.entity!r}) already present")
        if op.order is not None and any(a.order == op.order for a in node.arguments):
            return _reject("DUPLICATE_ARG_ORDER", op.id, f"argument order {op.order} already in use")
        order = op.order if op.order is not None else (max((a.order for a in node.arguments), default=-1) + 1)
        return _replace_event(g, replace(node, arguments=node.arguments + (Argument(op.role, op.entity, order),)))

    if isinstance(op, RemoveArgument):
        node = g.events.get(op.id)
        if node is None:
            return _reject("REF_MISSING", op.id, f"event {op.id!r} does not exist")
        kept = tuple(a for a in node.arguments if not (a.role == op.role and a.filler == op.entity))
        if len(kept) == len(node.arguments):
            return _reject("REF_MISSING", op.id, f"argument ({op.role!r}, {op.entity!r}) not present")
        return _replace_event(g, replace(node, arguments=kept))

    if isinstance(op, AddTemporalEdge):
        if op.before == op.after:
            return _reject("SELF_EDGE", op.before, "temporal edge endpoints must differ")
        for endpoint in (op.before, op.after):
            if endpoint not in g.events:
                return _reject("REF_MISSING", endpoint, f"event {endpoint!r} does not exist")
        if any(e.before == op.before and e.after == op.after for e in g.temporal):
            return _reject("DUPLICATE_EDGE", f"{op.before}->{op.after}", "temporal edge already present")
        candidate = replace(g, temporal=g.temporal + (TemporalEdge(op.before, op.after),))
        if _temporal_cycle_grows(g, candidate):
            return _reject("WOULD_CYCLE", f"{op.before}->{op.after}", "edge would create a temporal cycle among siblings")
        return candidate

    if isinstance(op, RemoveTemporalEdge):
        kept = tuple(e for e in g.temporal if not (e.before == op.before and e.after == op.after))
        if len(kept) == len(g.temporal):
            return _reject("REF_MISSING", f"{op.before}->{op.after}", "temporal edge not present")
        return replace(g, temporal=kept)

    if isinstance(op, ReverseTemporalEdge):
        if not any(e.before == op.before and e.after == op.after for e in g.temporal):
            return _reject("REF_MISSING", f"{op.before}->{op.after}", "temporal edge not present")
        if any(e.before == op.after and e.after == op.before for e in g.temporal):
            return _reject("DUPLICATE_EDGE", f"{op.after}->{op.before}", "reversed edge already present")
        flipped = tuple(
            TemporalEdge(op.after, op.before) if (e.before == op.before and e.after == op.after) else e
            for e in g.temporal
        )
        candidate = replace(g, temporal=flipped)
        if _temporal_cycle_grows(g, candidate):
            return _reject("WOULD_CYCLE", f"{op.after}->{op.before}", "reversal would create a temporal cycle among siblings")
        return candidate

    if isinstance(op, SetGate):
        gate = op.gate
        if gate.source not in g.events:
            return _reject("REF_MISSING", gate.source, f"event {gate.source!r} does not exist")
        for member in gate.members:
            if member not in g.events:
                return _reject("REF_MISSING", member, f"event {member!r} does not exist")
        if not gate.members:
            return _reject("GATE_EMPTY", gate.id, "gate must have at least one member")
        existing = [gt.id for gt in g.gates]
        if gate.id in existing:
            gates = tuple(gate if gt.id == gate.id else gt for gt in g.gates)
        else:
            gates = g.gates + (gate,)
        return replace(g, gates=gates)

    if isinstance(op, RemoveGate):
        kept_gates = tuple(gt for gt in g.gates if gt.id != op.gate)
        if len(kept_gates) == len(g.gates):
            return _reject("REF_MISSING", op.gate, f"gate {op.gate!r} does not exist")
        return replace(g, gates=kept_gates)

    if isinstance(op, ReparentEvent):
        if op.id not in g.events:
            return _reject("REF_MISSING", op.id, f"event {op.id!r} does not exist")
        if op.new_parent is not None:
            if op.new_parent not in g.events:
                return _reject("REF_MISSING", op.new_parent, f"event {op.new_parent!r} does not exist")
            if op.new_parent == op.id:
                return _reject("SELF_PARENT", op.id, "an event cannot be its own parent")
            if op.new_parent in _subtree(g, op.id):
                return _reject("WOULD_CYCLE", op.id, f"{op.new_parent!r} is a descendant of {op.id!r}")
        events = {}
        for node in g.events.values():
            if op.id in node.children:
                events[node.id] = replace(node, children=tuple(c for c in node.children if c != op.id))
            else:
                events[node.id] = node
        roots = tuple(r for r in g.roots if r != op.id)
        if op.new_parent is None:
            index = len(roots) if op.index is None else min(max(op.index, 0), len(roots))
            roots = roots[:index] + (op.id,) + roots[index:]
        else:
            parent = events[op.new_parent]
            index = len(parent.children) if op.index is None else min(max(op.index, 0), len(parent.children))
            events[op.new_parent] = replace(
                parent, children=parent.children[:index] + (op.id,) + parent.children[index:]
            )
        return replace(g, events=events, roots=roots)

    if isinstance(op, DeleteEvent):
        if op.id not in g.events:
            return _reject("REF_MISSING", op.id, f"event {op.id!r} does not exist")
        doomed = _subtree(g, op.id) | {op.id}
        events = {}
        for node in g.events.values():
            if node.id in doomed:
                continue
            if any(c in doomed for c in node.children):
                node = replace(node, children=tuple(c for c in node.children if c not in doomed))
            events[node.id] = node
        gates = []
        for gt in g.gates:
            if gt.source in doomed:
                continue
            members = tuple(m for m in gt.members if m not in doomed)
            if not members:
                continue
            gates.append(replace(gt, members=members) if members != gt.members else gt)
        return replace(
            g,
            events=events,
            temporal=tuple(e for e in g.temporal if e.before not in doomed and e.after not in doomed),
            gates=tuple(gates),
            roots=tuple(r for r in g.roots if r not in doomed),
            match_pairs=tuple(p for p in g.match_pairs if p[1] not in doomed),
        )

    if isinstance(op, MergeEntities):
        if op.keep not in g.entities:
            return _reject("REF_MISSING", op.keep, f"entity {op.keep!r} does not exist")
        if op.drop not in g.entities:
            return _reject("REF_MISSING", op.drop, f"entity {op.drop!r} does not exist")
        if op.keep == op.drop:
            return _reject("SELF_MERGE", op.keep, "cannot merge an entity with itself")
        events = {}
        for node in g.events.values():
            if any(a.filler == op.drop for a in node.arguments):
                seen: set[tuple[str, str]] = set()
                args = []
                for a in node.sorted_arguments():
                    filler = op.keep if a.filler == op.drop else a.filler
                    key = (a.role, filler)
                    if key in seen:
                        continue
                    seen.add(key)
                    args.append(replace(a, filler=filler))
                events[node.id] = replace(node, arguments=tuple(args))
            else:
                events[node.id] = node
        keep_ent = g.entities[op.keep]
        drop_ent = g.entities[op.drop]
        merged_prov = keep_ent.provenance + tuple(p for p in drop_ent.provenance if p not in keep_ent.provenance)
        entities = {}
        for ent in g.entities.values():
            if ent.id == op.drop:
                continue
            entities[ent.id] = replace(keep_ent, provenance=merged_prov) if ent.id == op.keep else ent
        return replace(g, events=events, entities=entities)

    if isinstance(op, UpdateTextSpan):
        record = g.provenance.get(op.id)
        if record is None:
            return _reject("REF_MISSING", op.id, f"provenance {op.id!r} does not exist")
        if not isinstance(record, TextProvenance):
            return _reject("NOT_TEXT", op.id, "span edits apply to text provenance only")
        if corpus is None:
            return _reject("REF_MISSING", op.id, "no corpus loaded; cannot validate the span")
        doc = corpus.document_index().get(record.doc_id)
        if doc is None:
            return _reject("REF_MISSING", op.id, f"document {record.doc_id!r} not in corpus")
        if op.start < 0 or op.start >= op.end or op.end > len(doc.text):
            return _reject("INVALID_SPAN", op.id, f"span [{op.start}, {op.end}) invalid for a document of length {len(doc.text)}")
        records = dict(g.provenance)
        records[op.id] = replace(record, start=op.start, end=op.end, text=doc.text[op.start:op.end])
        return replace(g, provenance=records)

    if isinstance(op, UpdateBoundingBox):
        record = g.provenance.get(op.id)
        if record is None:
            return _reject("REF_MISSING", op.id, f"provenance {op.id!r} does not exist")
        if not isinstance(record, ImageProvenance):
            return _reject("NOT_IMAGE", op.id, "bounding-box edits apply to image provenance only")
        x, y, w, h = op.bbox
        if w <= 0 or h <= 0 or x < 0 or y < 0:
            return _reject("INVALID_BBOX", op.id, f"bbox {list(op.bbox)} must have positive extent at non-negative origin")
        if corpus is not None:
            entry = corpus.image_index().get(record.image_id)
            if entry is not None:
                img, _ = entry
                if x + w > img.width or y + h > img.height:
                    return _reject("INVALID_BBOX", op.id, f"bbox {list(op.bbox)} outside {img.width}x{img.height} image")
        records = dict(g.provenance)
        records[op.id] = replace(record, bbox=op.bbox)
        return replace(g, provenance=records)

    return _reject("UNKNOWN_OP", type(op).__name__, "unsupported edit op")


def _subtree(g: InstantiatedGraph, event_id: str) -> set[str]:
    out: set[str] = set()
    stack = [c for c in g.events[event_id].children if c in g.events]
    while stack:
        node = stack.pop()
        if node in out:
            continue
        out.add(node)
        stack.extend(c for c in g.events[node].children if c in g.events)
    return out


def apply_op(g: InstantiatedGraph, op: EditOp, corpus: CorpusFile | None = None) -> InstantiatedGraph | list[Diagnostic]:
    """Validated, pure application of one op; an op may fix existing problems
    but is rejected if it introduces any error the base graph did not have."""
    result = _apply_op(g, op, corpus)
    if isinstance(result, list):
        return sort_diagnostics(result)
    base_errors = {(d.code, d.subject) for d in validate_graph(g) if d.severity == "error"}
    introduced = [
        d for d in validate_graph(result)
        if d.severity == "error" and (d.code, d.subject) not in base_errors
    ]
    if introduced:
        return sort_diagnostics(introduced)
    return result


# ---------------------------------------------------------------------------
# Sessions


class EditSession:
    """Linear revision history over an immutable base graph.

    `revisions[i]` holds (op, graph after that op); the visible graph is the
    one at `cursor`. Mutating a session is the caller's single-writer duty
    (the service serializes writes per session); readers can safely hold on
    to any graph value they got.
    """

    def __init__(self, base: InstantiatedGraph, corpus: CorpusFile | None = None):
        self.base = base
        self.corpus = corpus
        self.revisions: list[tuple[EditOp, InstantiatedGraph]] = []
        self.cursor = 0

    @property
    def graph(self) -> InstantiatedGraph:
        if self.cursor == 0:
            return self.base
        return self.revisions[self.cursor - 1][1]

    @property
    def head(self) -> int:
        return len(self.revisions)


def apply_edit(sess: EditSession, op: EditOp) -> int | list[Diagnostic]:
    """Returns the new revision index on success, diagnostics on rejection."""
    result = apply_op(sess.graph, op, sess.corpus)
    if isinstance(result, list):
        return result
    del sess.revisions[sess.cursor:]
    sess.revisions.append((op, result))
    sess.cursor += 1
    return sess.cursor


def apply_batch(sess: EditSession, ops: list[EditOp]) -> int | tuple[int, list[Diagnostic]]:
    """All ops commit or none do; on failure returns (failing index, diagnostics)."""
    saved_cursor = sess.cursor
    saved_len = len(sess.revisions)
    saved_tail = sess.revisions[saved_cursor:]
    for i, op in enumerate(ops):
        result = apply_edit(sess, op)
        if isinstance(result, list):
            del sess.revisions[saved_cursor:]
            sess.revisions.extend(saved_tail)
            assert len(sess.revisions) == saved_len
            sess.cursor = saved_cursor
            return i, result
    return sess.cursor


def undo(sess: EditSession) -> int:
    if sess.cursor == 0:
        raise EngineError("AT_BOUNDARY", "undo", "nothing to undo")
    sess.cursor -= 1
    return sess.cursor


def redo(sess: EditSession) -> int:
    if sess.cursor >= len(sess.revisions):
        raise EngineError("AT_BOUNDARY", "redo", "nothing to redo")
    sess.cursor += 1
    return sess.cursor


# ---------------------------------------------------------------------------
# Filters


def filter_by_entity(g: InstantiatedGraph, entity_id: str) -> frozenset[str]:
    """Events having the entity as any argument filler (the emphasis set)."""
    if entity_id not in g.entities:
        raise EngineError("REF_MISSING", entity_id, f"entity {entity_id!r} does not exist")
    return frozenset(
        ev.id for ev in g.events.values() if any(a.filler == entity_id for a in ev.arguments)
    )


def filter_by_confidence(g: InstantiatedGraph, lo: float, hi: float) -> frozenset[str]:
    """Events with lo <= confidence <= hi, both ends inclusive."""
    if not (0.0 <= lo <= hi <= 1.0):
        raise EngineError("BAD_RANGE", f"[{lo}, {hi}]", "range must satisfy 0 <= lo <= hi <= 1")
    return frozenset(ev.id for ev in g.events.values() if lo <= ev.confidence <= hi)

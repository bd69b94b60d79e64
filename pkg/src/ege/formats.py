"""Text formats for schema, instance, corpus, and instantiated-graph files.

All four are UTF-8 JSON documents with a frozen canonical form: object keys
in the documented order, lists in stored order, two-space indentation, one
trailing newline. parse(serialize(x)) is structurally x, and serializing a
parsed document is a fixed point, which is what the round-trip tests pin.

Unknown fields on documents, events, entities, documents and images are
preserved verbatim (extraction pipelines grow fields faster than editors);
provenance records are closed.

Parsers return either the parsed value or a list of Diagnostics; offset
checks against document text are deferred until a corpus is present.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .model import (
    Argument,
    Diagnostic,
    EntityNode,
    EventNode,
    EventType,
    GateSpec,
    ImageProvenance,
    InstantiatedGraph,
    PLACEMENT_CHILDREN,
    PLACEMENTS,
    GATE_KINDS,
    SOURCE_ONLY,
    STATUSES,
    ProvenanceRecord,
    TemporalEdge,
    TextProvenance,
    error,
    sort_diagnostics,
)

# ---------------------------------------------------------------------------
# Parsed file shapes


@dataclass
class GateDecl:
    kind: str
    members: list[str]
    placement: str = PLACEMENT_CHILDREN


@dataclass
class ArgRole:
    role: str
    allowed: list[str] = field(default_factory=list)


@dataclass
class SchemaEvent:
    id: str
    name: str
    description: str = ""
    wd_node: str = ""
    wd_name: str = ""
    children: list[str] = field(default_factory=list)
    gate: GateDecl | None = None
    outlinks: list[str] = field(default_factory=list)
    arg_roles: list[ArgRole] = field(default_factory=list)
    extra: dict = field(default_factory=dict)


@dataclass
class SchemaFile:
    id: str
    name: str
    events: list[SchemaEvent] = field(default_factory=list)
    roots: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def event_index(self) -> dict[str, SchemaEvent]:
        return {ev.id: ev for ev in self.events}


@dataclass
class Trigger:
    text: str
    doc_id: str
    start: int
    end: int


@dataclass
class InstanceArgument:
    role: str
    filler: str


@dataclass
class InstanceEvent:
    id: str
    trigger: Trigger | None = None
    type: str = ""
    name: str = ""
    description: str = ""
    arguments: list[InstanceArgument] = field(default_factory=list)
    confidence: float | None = None
    provenance: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)


@dataclass
class EntityDecl:
    id: str
    name: str
    wd_qnode: str | None = None
    provenance: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)


@dataclass
class InstanceFile:
    events: list[InstanceEvent] = field(default_factory=list)
    entities: list[EntityDecl] = field(default_factory=list)
    temporal: list[tuple[str, str]] = field(default_factory=list)
    provenance: list[ProvenanceRecord] = field(default_factory=list)
    extra: dict = field(default_factory=dict)


@dataclass
class ImageRecord:
    image_id: str
    media: str
    width: int
    height: int
    extra: dict = field(default_factory=dict)


@dataclass
class Document:
    doc_id: str
    title: str
    text: str
    images: list[ImageRecord] = field(default_factory=list)
    extra: dict = field(default_factory=dict)


@dataclass
class CorpusFile:
    documents: list[Document] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def document_index(self) -> dict[str, Document]:
        return {d.doc_id: d for d in self.documents}

    def image_index(self) -> dict[str, tuple[ImageRecord, Document]]:
        index: dict[str, tuple[ImageRecord, Document]] = {}
        for doc in self.documents:
            for img in doc.images:
                index.setdefault(img.image_id, (img, doc))
        return index


# ---------------------------------------------------------------------------
# Parse helpers


class _Collector:
    def __init__(self) -> None:
        self.diags: list[Diagnostic] = []

    def syntax(self, path: str, message: str) -> None:
        self.diags.append(error("SYNTAX", path, message))

    def add(self, code: str, path: str, message: str) -> None:
        self.diags.append(error(code, path, message))

    @property
    def failed(self) -> bool:
        return bool(self.diags)


def _load_json(data: bytes | str, col: _Collector) -> Any:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            col.syntax("document", f"invalid UTF-8: {exc.reason}")
            return None
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        col.syntax(f"line {exc.lineno}", exc.msg)
        return None


def _obj(value: Any, path: str, col: _Collector) -> dict | None:
    if not isinstance(value, dict):
        col.syntax(path, f"expected an object, got {type(value).__name__}")
        return None
    return value


def _str(obj: dict, key: str, path: str, col: _Collector, default: str = "", required: bool = False) -> str:
    if key not in obj:
        if required:
            col.syntax(f"{path}.{key}", "missing required field")
        return default
    value = obj[key]
    if not isinstance(value, str):
        col.syntax(f"{path}.{key}", "expected a string")
        return default
    return value


def _int(obj: dict, key: str, path: str, col: _Collector, default: int = 0) -> int:
    value = obj.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        col.syntax(f"{path}.{key}", "expected an integer")
        return default
    return value


def _number(value: Any, path: str, col: _Collector, default: float = 0.0) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        col.syntax(path, "expected a number")
        return default
    return value


def _str_list(obj: dict, key: str, path: str, col: _Collector) -> list[str]:
    value = obj.get(key, [])
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        col.syntax(f"{path}.{key}", "expected a list of strings")
        return []
    return value


def _extra(obj: dict, known: tuple[str, ...]) -> dict:
    return {k: v for k, v in obj.items() if k not in known}


# ---------------------------------------------------------------------------
# Schema


_SCHEMA_EVENT_KEYS = ("id", "name", "description", "wd_node", "wd_name", "children", "gate", "outlinks", "arg_roles")


def _parse_schema_event(raw: dict, path: str, col: _Collector) -> SchemaEvent:
    gate = None
    if raw.get("gate") is not None:
        gobj = _obj(raw["gate"], f"{path}.gate", col)
        if gobj is not None:
            kind = _str(gobj, "kind", f"{path}.gate", col, required=True)
            members = _str_list(gobj, "members", f"{path}.gate", col)
            placement = _str(gobj, "placement", f"{path}.gate", col, default=PLACEMENT_CHILDREN)
            if kind and kind not in GATE_KINDS:
                col.syntax(f"{path}.gate.kind", f"unknown gate kind {kind!r}")
            if placement not in PLACEMENTS:
                col.syntax(f"{path}.gate.placement", f"unknown placement {placement!r}")
            if not members:
                col.add("GATE_ARITY", f"{path}.gate.members", "gate must have at least one member")
            gate = GateDecl(kind=kind, members=members, placement=placement)
    arg_roles = []
    raw_roles = raw.get("arg_roles", [])
    if not isinstance(raw_roles, list):
        col.syntax(f"{path}.arg_roles", "expected a list")
        raw_roles = []
    for i, entry in enumerate(raw_roles):
        robj = _obj(entry, f"{path}.arg_roles[{i}]", col)
        if robj is None:
            continue
        arg_roles.append(ArgRole(
            role=_str(robj, "role", f"{path}.arg_roles[{i}]", col, required=True),
            allowed=_str_list(robj, "allowed", f"{path}.arg_roles[{i}]", col),
        ))
    return SchemaEvent(
        id=_str(raw, "id", path, col, required=True),
        name=_str(raw, "name", path, col),
        description=_str(raw, "description", path, col),
        wd_node=_str(raw, "wd_node", path, col),
        wd_name=_str(raw, "wd_name", path, col),
        children=_str_list(raw, "children", path, col),
        gate=gate,
        outlinks=_str_list(raw, "outlinks", path, col),
        arg_roles=arg_roles,
        extra=_extra(raw, _SCHEMA_EVENT_KEYS),
    )


def _check_schema_refs(schema: SchemaFile, col: _Collector) -> None:
    ids: set[str] = set()
    for i, ev in enumerate(schema.events):
        if ev.id in ids:
            col.add("DUPLICATE_ID", f"events[{i}]", f"event id {ev.id!r} used twice")
        ids.add(ev.id)
    parents: dict[str, str] = {}
    for i, ev in enumerate(schema.events):
        path = f"events[{i}]"
        for child in ev.children:
            if child not in ids:
                col.add("SCHEMA_REF", f"{path}.children", f"unknown event id {child!r}")
            elif child in parents:
                col.add("MULTIPLE_PARENTS", child, f"child of both {parents[child]!r} and {ev.id!r}")
            else:
                parents[child] = ev.id
        for out in ev.outlinks:
            if out not in ids:
                col.add("SCHEMA_REF", f"{path}.outlinks", f"unknown event id {out!r}")
        if ev.gate is not None:
            for member in ev.gate.members:
                if member not in ids:
                    col.add("SCHEMA_REF", f"{path}.gate.members", f"unknown event id {member!r}")
                elif ev.gate.placement == PLACEMENT_CHILDREN and member not in ev.children:
                    col.add("GATE_MEMBER_NOT_CHILD", f"{path}.gate.members", f"{member!r} is not a child of {ev.id!r}")
                elif ev.gate.placement != PLACEMENT_CHILDREN and member not in ev.outlinks:
                    col.add("GATE_MEMBER_NOT_SUCCESSOR", f"{path}.gate.members", f"{member!r} is not an outlink of {ev.id!r}")
            if len(set(ev.gate.members)) != len(ev.gate.members):
                col.add("GATE_DUPLICATE_MEMBER", f"{path}.gate.members", "members must be distinct")
    for root in schema.roots:
        if root not in ids:
            col.add("SCHEMA_REF", "roots", f"unknown event id {root!r}")
        elif root in parents:
            col.add("ROOT_HAS_PARENT", root, f"root is a child of {parents[root]!r}")
    for ev in schema.events:
        if ev.id not in parents and ev.id not in schema.roots:
            col.add("ORPHAN_EVENT", ev.id, "event has no parent and is not a root")
    # Cycle check over child links (duplicates already flagged above).
    state: dict[str, int] = {}

    def walk(eid: str) -> bool:
        state[eid] = 1
        for child in next((e.children for e in schema.events if e.id == eid), []):
            if child not in ids:
                continue
            mark = state.get(child, 0)
            if mark == 1 or (mark == 0 and walk(child)):
                return True
        state[eid] = 2
        return False

    for ev in schema.events:
        if state.get(ev.id, 0) == 0 and walk(ev.id):
            col.add("HIERARCHY_CYCLE", ev.id, "hierarchy contains a cycle")
            break


def parse_schema(data: bytes | str) -> SchemaFile | list[Diagnostic]:
    col = _Collector()
    raw = _load_json(data, col)
    if raw is None:
        return sort_diagnostics(col.diags)
    top = _obj(raw, "document", col)
    if top is None:
        return sort_diagnostics(col.diags)
    raw_events = top.get("events", [])
    if not isinstance(raw_events, list):
        col.syntax("events", "expected a list")
        raw_events = []
    events = [
        _parse_schema_event(e, f"events[{i}]", col)
        for i, e in enumerate(raw_events)
        if _obj(e, f"events[{i}]", col) is not None
    ]
    schema = SchemaFile(
        id=_str(top, "id", "document", col, required=True),
        name=_str(top, "name", "document", col),
        events=events,
        roots=_str_list(top, "roots", "document", col),
        extra=_extra(top, ("id", "name", "events", "roots")),
    )
    _check_schema_refs(schema, col)
    if col.failed:
        return sort_diagnostics(col.diags)
    return schema


# ---------------------------------------------------------------------------
# Provenance records (shared by instance and graph documents)


def _parse_record(raw: dict, path: str, col: _Collector) -> ProvenanceRecord | None:
    kind = _str(raw, "kind", path, col, required=True)
    rid = _str(raw, "id", path, col, required=True)
    if kind == "text":
        start = _int(raw, "start", path, col)
        end = _int(raw, "end", path, col)
        if start < 0 or start >= end:
            col.add("OFFSET_ORDER", f"{path}", f"span must satisfy 0 <= start < end, got [{start}, {end})")
        return TextProvenance(
            id=rid,
            doc_id=_str(raw, "doc_id", path, col, required=True),
            start=start,
            end=end,
            text=_str(raw, "text", path, col),
        )
    if kind == "image":
        bbox = raw.get("bbox")
        if not isinstance(bbox, list) or len(bbox) != 4:
            col.syntax(f"{path}.bbox", "expected [x, y, w, h]")
            box = (0.0, 0.0, 0.0, 0.0)
        else:
            box = tuple(_number(v, f"{path}.bbox[{i}]", col) for i, v in enumerate(bbox))
            if box[2] <= 0 or box[3] <= 0 or box[0] < 0 or box[1] < 0:
                col.add("INVALID_BBOX", path, f"bbox must have positive extent inside the image, got {list(box)}")
        return ImageProvenance(
            id=rid,
            image_id=_str(raw, "image_id", path, col, required=True),
            bbox=box,  # type: ignore[arg-type]
        )
    col.syntax(f"{path}.kind", f"unknown provenance kind {kind!r}")
    return None


def _record_to_obj(rec: ProvenanceRecord) -> dict:
    if isinstance(rec, TextProvenance):
        return {"kind": "text", "id": rec.id, "doc_id": rec.doc_id, "start": rec.start, "end": rec.end, "text": rec.text}
    return {"kind": "image", "id": rec.id, "image_id": rec.image_id, "bbox": list(rec.bbox)}


# ---------------------------------------------------------------------------
# Instance


_INSTANCE_EVENT_KEYS = ("id", "trigger", "type", "name", "description", "arguments", "confidence", "provenance")


def _parse_instance_event(raw: dict, path: str, col: _Collector) -> InstanceEvent:
    trigger = None
    if raw.get("trigger") is not None:
        tobj = _obj(raw["trigger"], f"{path}.trigger", col)
        if tobj is not None:
            start = _int(tobj, "start", f"{path}.trigger", col)
            end = _int(tobj, "end", f"{path}.trigger", col)
            if start < 0 or start >= end:
                col.add("OFFSET_ORDER", f"{path}.trigger", f"span must satisfy 0 <= start < end, got [{start}, {end})")
            trigger = Trigger(
                text=_str(tobj, "text", f"{path}.trigger", col),
                doc_id=_str(tobj, "doc_id", f"{path}.trigger", col, required=True),
                start=start,
                end=end,
            )
    arguments = []
    raw_args = raw.get("arguments", [])
    if not isinstance(raw_args, list):
        col.syntax(f"{path}.arguments", "expected a list")
        raw_args = []
    for i, entry in enumerate(raw_args):
        aobj = _obj(entry, f"{path}.arguments[{i}]", col)
        if aobj is None:
            continue
        arguments.append(InstanceArgument(
            role=_str(aobj, "role", f"{path}.arguments[{i}]", col, required=True),
            filler=_str(aobj, "filler", f"{path}.arguments[{i}]", col, required=True),
        ))
    confidence = None
    if "confidence" in raw:
        confidence = _number(raw["confidence"], f"{path}.confidence", col, default=1.0)
        if not 0.0 <= confidence <= 1.0:
            col.add("CONFIDENCE_RANGE", path, f"confidence {confidence} outside [0, 1]")
    return InstanceEvent(
        id=_str(raw, "id", path, col, required=True),
        trigger=trigger,
        type=_str(raw, "type", path, col),
        name=_str(raw, "name", path, col),
        description=_str(raw, "description", path, col),
        arguments=arguments,
        confidence=confidence,
        provenance=_str_list(raw, "provenance", path, col),
        extra=_extra(raw, _INSTANCE_EVENT_KEYS),
    )


def parse_instance(data: bytes | str) -> InstanceFile | list[Diagnostic]:
    col = _Collector()
    raw = _load_json(data, col)
    if raw is None:
        return sort_diagnostics(col.diags)
    top = _obj(raw, "document", col)
    if top is None:
        return sort_diagnostics(col.diags)

    raw_events = top.get("events", [])
    if not isinstance(raw_events, list):
        col.syntax("events", "expected a list")
        raw_events = []
    events = [
        _parse_instance_event(e, f"events[{i}]", col)
        for i, e in enumerate(raw_events)
        if _obj(e, f"events[{i}]", col) is not None
    ]

    entities = []
    raw_entities = top.get("entities", [])
    if not isinstance(raw_entities, list):
        col.syntax("entities", "expected a list")
        raw_entities = []
    for i, entry in enumerate(raw_entities):
        eobj = _obj(entry, f"entities[{i}]", col)
        if eobj is None:
            continue
        wd = eobj.get("wd_qnode")
        if wd is not None and not isinstance(wd, str):
            col.syntax(f"entities[{i}].wd_qnode", "expected a string or null")
            wd = None
        entities.append(EntityDecl(
            id=_str(eobj, "id", f"entities[{i}]", col, required=True),
            name=_str(eobj, "name", f"entities[{i}]", col, required=True),
            wd_qnode=wd,
            provenance=_str_list(eobj, "provenance", f"entities[{i}]", col),
            extra=_extra(eobj, ("id", "name", "wd_qnode", "provenance")),
        ))

    temporal = []
    raw_temporal = top.get("temporal", [])
    if not isinstance(raw_temporal, list):
        col.syntax("temporal", "expected a list")
        raw_temporal = []
    for i, entry in enumerate(raw_temporal):
        tobj = _obj(entry, f"temporal[{i}]", col)
        if tobj is None:
            continue
        temporal.append((
            _str(tobj, "before", f"temporal[{i}]", col, required=True),
            _str(tobj, "after", f"temporal[{i}]", col, required=True),
        ))

    records = []
    raw_records = top.get("provenance", [])
    if not isinstance(raw_records, list):
        col.syntax("provenance", "expected a list")
        raw_records = []
    for i, entry in enumerate(raw_records):
        robj = _obj(entry, f"provenance[{i}]", col)
        if robj is None:
            continue
        record = _parse_record(robj, f"provenance[{i}]", col)
        if record is not None:
            records.append(record)

    instance = InstanceFile(
        events=events,
        entities=entities,
        temporal=temporal,
        provenance=records,
        extra=_extra(top, ("events", "entities", "temporal", "provenance")),
    )

    entity_ids = {e.id for e in entities}
    event_ids = {e.id for e in events}
    record_ids = {r.id for r in records}
    seen: set[str] = set()
    for i, ev in enumerate(events):
        if ev.id in seen:
            col.add("DUPLICATE_ID", f"events[{i}]", f"event id {ev.id!r} used twice")
        seen.add(ev.id)
        for arg in ev.arguments:
            if arg.filler not in entity_ids:
                col.add("SCHEMA_REF", f"events[{i}].arguments", f"unknown entity {arg.filler!r}")
        for pid in ev.provenance:
            if pid not in record_ids:
                col.add("SCHEMA_REF", f"events[{i}].provenance", f"unknown provenance {pid!r}")
    for i, ent in enumerate(entities):
        for pid in ent.provenance:
            if pid not in record_ids:
                col.add("SCHEMA_REF", f"entities[{i}].provenance", f"unknown provenance {pid!r}")
    for i, (before, after) in enumerate(temporal):
        for endpoint in (before, after):
            if endpoint not in event_ids:
                col.add("SCHEMA_REF", f"temporal[{i}]", f"unknown event {endpoint!r}")

    if col.failed:
        return sort_diagnostics(col.diags)
    return instance


# ---------------------------------------------------------------------------
# Corpus


def parse_corpus(data: bytes | str) -> CorpusFile | list[Diagnostic]:
    col = _Collector()
    raw = _load_json(data, col)
    if raw is None:
        return sort_diagnostics(col.diags)
    top = _obj(raw, "document", col)
    if top is None:
        return sort_diagnostics(col.diags)
    documents = []
    raw_docs = top.get("documents", [])
    if not isinstance(raw_docs, list):
        col.syntax("documents", "expected a list")
        raw_docs = []
    doc_ids: set[str] = set()
    image_ids: set[str] = set()
    for i, entry in enumerate(raw_docs):
        dobj = _obj(entry, f"documents[{i}]", col)
        if dobj is None:
            continue
        images = []
        raw_images = dobj.get("images", [])
        if not isinstance(raw_images, list):
            col.syntax(f"documents[{i}].images", "expected a list")
            raw_images = []
        for j, img_entry in enumerate(raw_images):
            iobj = _obj(img_entry, f"documents[{i}].images[{j}]", col)
            if iobj is None:
                continue
            image = ImageRecord(
                image_id=_str(iobj, "image_id", f"documents[{i}].images[{j}]", col, required=True),
                media=_str(iobj, "media", f"documents[{i}].images[{j}]", col),
                width=_int(iobj, "width", f"documents[{i}].images[{j}]", col),
                height=_int(iobj, "height", f"documents[{i}].images[{j}]", col),
                extra=_extra(iobj, ("image_id", "media", "width", "height")),
            )
            if image.width <= 0 or image.height <= 0:
                col.add("BAD_DIMENSION", f"documents[{i}].images[{j}]", "image width and height must be positive")
            if image.image_id in image_ids:
                col.add("DUPLICATE_ID", f"documents[{i}].images[{j}]", f"image id {image.image_id!r} used twice")
            image_ids.add(image.image_id)
            images.append(image)
        doc = Document(
            doc_id=_str(dobj, "doc_id", f"documents[{i}]", col, required=True),
            title=_str(dobj, "title", f"documents[{i}]", col),
            text=_str(dobj, "text", f"documents[{i}]", col),
            images=images,
            extra=_extra(dobj, ("doc_id", "title", "text", "images")),
        )
        if doc.doc_id in doc_ids:
            col.add("DUPLICATE_ID", f"documents[{i}]", f"doc id {doc.doc_id!r} used twice")
        doc_ids.add(doc.doc_id)
        documents.append(doc)
    if col.failed:
        return sort_diagnostics(col.diags)
    return CorpusFile(documents=documents, extra=_extra(top, ("documents",)))


# ---------------------------------------------------------------------------
# Instantiated graph


def parse_graph(data: bytes | str) -> InstantiatedGraph | list[Diagnostic]:
    """Shape-level parse of an instantiated-graph document.

    Semantic validation (forest, gates, cycles, ...) is validate_graph's job.
    """
    col = _Collector()
    raw = _load_json(data, col)
    if raw is None:
        return sort_diagnostics(col.diags)
    top = _obj(raw, "document", col)
    if top is None:
        return sort_diagnostics(col.diags)

    events: dict[str, EventNode] = {}
    raw_events = top.get("events", [])
    if not isinstance(raw_events, list):
        col.syntax("events", "expected a list")
        raw_events = []
    for i, entry in enumerate(raw_events):
        eobj = _obj(entry, f"events[{i}]", col)
        if eobj is None:
            continue
        path = f"events[{i}]"
        tobj = eobj.get("event_type", {})
        if not isinstance(tobj, dict):
            col.syntax(f"{path}.event_type", "expected an object")
            tobj = {}
        args = []
        raw_args = eobj.get("arguments", [])
        if not isinstance(raw_args, list):
            col.syntax(f"{path}.arguments", "expected a list")
            raw_args = []
        for j, arg_entry in enumerate(raw_args):
            aobj = _obj(arg_entry, f"{path}.arguments[{j}]", col)
            if aobj is None:
                continue
            args.append(Argument(
                role=_str(aobj, "role", f"{path}.arguments[{j}]", col, required=True),
                filler=_str(aobj, "filler", f"{path}.arguments[{j}]", col, required=True),
                order=_int(aobj, "order", f"{path}.arguments[{j}]", col),
            ))
        status = _str(eobj, "status", path, col, default=SOURCE_ONLY)
        if status not in STATUSES:
            col.syntax(f"{path}.status", f"unknown status {status!r}")
        schema_ref = eobj.get("schema_ref")
        if schema_ref is not None and not isinstance(schema_ref, str):
            col.syntax(f"{path}.schema_ref", "expected a string or null")
            schema_ref = None
        node = EventNode(
            id=_str(eobj, "id", path, col, required=True),
            name=_str(eobj, "name", path, col),
            description=_str(eobj, "description", path, col),
            event_type=EventType(
                qnode=_str(tobj, "qnode", f"{path}.event_type", col),
                name=_str(tobj, "name", f"{path}.event_type", col),
            ),
            status=status,
            confidence=_number(eobj.get("confidence", 1.0), f"{path}.confidence", col, default=1.0),
            children=tuple(_str_list(eobj, "children", path, col)),
            arguments=tuple(args),
            provenance=tuple(_str_list(eobj, "provenance", path, col)),
            schema_ref=schema_ref,
        )
        if node.id in events:
            col.add("DUPLICATE_ID", path, f"event id {node.id!r} used twice")
        events[node.id] = node

    entities: dict[str, EntityNode] = {}
    raw_entities = top.get("entities", [])
    if not isinstance(raw_entities, list):
        col.syntax("entities", "expected a list")
        raw_entities = []
    for i, entry in enumerate(raw_entities):
        eobj = _obj(entry, f"entities[{i}]", col)
        if eobj is None:
            continue
        wd = eobj.get("wd_qnode")
        if wd is not None and not isinstance(wd, str):
            col.syntax(f"entities[{i}].wd_qnode", "expected a string or null")
            wd = None
        ent = EntityNode(
            id=_str(eobj, "id", f"entities[{i}]", col, required=True),
            name=_str(eobj, "name", f"entities[{i}]", col),
            wd_qnode=wd,
            provenance=tuple(_str_list(eobj, "provenance", f"entities[{i}]", col)),
        )
        if ent.id in entities:
            col.add("DUPLICATE_ID", f"entities[{i}]", f"entity id {ent.id!r} used twice")
        entities[ent.id] = ent

    temporal = []
    raw_temporal = top.get("temporal", [])
    if not isinstance(raw_temporal, list):
        col.syntax("temporal", "expected a list")
        raw_temporal = []
    for i, entry in enumerate(raw_temporal):
        tobj2 = _obj(entry, f"temporal[{i}]", col)
        if tobj2 is None:
            continue
        temporal.append(TemporalEdge(
            before=_str(tobj2, "before", f"temporal[{i}]", col, required=True),
            after=_str(tobj2, "after", f"temporal[{i}]", col, required=True),
        ))

    gates = []
    raw_gates = top.get("gates", [])
    if not isinstance(raw_gates, list):
        col.syntax("gates", "expected a list")
        raw_gates = []
    for i, entry in enumerate(raw_gates):
        gobj = _obj(entry, f"gates[{i}]", col)
        if gobj is None:
            continue
        gates.append(GateSpec(
            id=_str(gobj, "id", f"gates[{i}]", col, required=True),
            source=_str(gobj, "source", f"gates[{i}]", col, required=True),
            kind=_str(gobj, "kind", f"gates[{i}]", col, required=True),
            members=tuple(_str_list(gobj, "members", f"gates[{i}]", col)),
            placement=_str(gobj, "placement", f"gates[{i}]", col, default=PLACEMENT_CHILDREN),
        ))

    pairs = []
    raw_pairs = top.get("match_pairs", [])
    if not isinstance(raw_pairs, list):
        col.syntax("match_pairs", "expected a list")
        raw_pairs = []
    for i, entry in enumerate(raw_pairs):
        if not isinstance(entry, list) or len(entry) != 2 or any(not isinstance(v, str) for v in entry):
            col.syntax(f"match_pairs[{i}]", "expected [schema id, instance id]")
            continue
        pairs.append((entry[0], entry[1]))

    records: dict[str, ProvenanceRecord] = {}
    raw_records = top.get("provenance", [])
    if not isinstance(raw_records, list):
        col.syntax("provenance", "expected a list")
        raw_records = []
    for i, entry in enumerate(raw_records):
        robj = _obj(entry, f"provenance[{i}]", col)
        if robj is None:
            continue
        record = _parse_record(robj, f"provenance[{i}]", col)
        if record is not None:
            if record.id in records:
                col.add("DUPLICATE_ID", f"provenance[{i}]", f"provenance id {record.id!r} used twice")
            records[record.id] = record

    if col.failed:
        return sort_diagnostics(col.diags)
    return InstantiatedGraph(
        events=events,
        entities=entities,
        temporal=tuple(temporal),
        gates=tuple(gates),
        roots=tuple(_str_list(top, "roots", "document", col)),
        match_pairs=tuple(pairs),
        provenance=records,
    )


# ---------------------------------------------------------------------------
# Serialization (canonical form)


def _dump(obj: Any) -> bytes:
    return (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def serialize_schema(schema: SchemaFile) -> bytes:
    events = []
    for ev in schema.events:
        entry: dict[str, Any] = {
            "id": ev.id,
            "name": ev.name,
            "description": ev.description,
            "wd_node": ev.wd_node,
            "wd_name": ev.wd_name,
            "children": list(ev.children),
        }
        if ev.gate is not None:
            entry["gate"] = {"kind": ev.gate.kind, "members": list(ev.gate.members), "placement": ev.gate.placement}
        entry["outlinks"] = list(ev.outlinks)
        entry["arg_roles"] = [{"role": r.role, "allowed": list(r.allowed)} for r in ev.arg_roles]
        entry.update(ev.extra)
        events.append(entry)
    top: dict[str, Any] = {"id": schema.id, "name": schema.name, "events": events, "roots": list(schema.roots)}
    top.update(schema.extra)
    return _dump(top)


def serialize_instance(instance: InstanceFile) -> bytes:
    events = []
    for ev in instance.events:
        entry: dict[str, Any] = {"id": ev.id}
        if ev.trigger is not None:
            entry["trigger"] = {
                "text": ev.trigger.text,
                "doc_id": ev.trigger.doc_id,
                "start": ev.trigger.start,
                "end": ev.trigger.end,
            }
        entry["type"] = ev.type
        entry["name"] = ev.name
        entry["description"] = ev.description
        entry["arguments"] = [{"role": a.role, "filler": a.filler} for a in ev.arguments]
        if ev.confidence is not None:
            entry["confidence"] = ev.confidence
        entry["provenance"] = list(ev.provenance)
        entry.update(ev.extra)
        events.append(entry)
    entities = []
    for ent in instance.entities:
        entry = {"id": ent.id, "name": ent.name, "wd_qnode": ent.wd_qnode, "provenance": list(ent.provenance)}
        entry.update(ent.extra)
        entities.append(entry)
    top: dict[str, Any] = {
        "events": events,
        "entities": entities,
        "temporal": [{"before": b, "after": a} for b, a in instance.temporal],
        "provenance": [_record_to_obj(r) for r in instance.provenance],
    }
    top.update(instance.extra)
    return _dump(top)


def serialize_corpus(corpus: CorpusFile) -> bytes:
    documents = []
    for doc in corpus.documents:
        images = []
        for img in doc.images:
            entry = {"image_id": img.image_id, "media": img.media, "width": img.width, "height": img.height}
            entry.update(img.extra)
            images.append(entry)
        doc_entry: dict[str, Any] = {"doc_id": doc.doc_id, "title": doc.title, "text": doc.text, "images": images}
        doc_entry.update(doc.extra)
        documents.append(doc_entry)
    top: dict[str, Any] = {"documents": documents}
    top.update(corpus.extra)
    return _dump(top)


def serialize_graph(g: InstantiatedGraph) -> bytes:
    events = []
    for ev in g.events.values():
        entry: dict[str, Any] = {
            "id": ev.id,
            "name": ev.name,
            "description": ev.description,
            "event_type": {"qnode": ev.event_type.qnode, "name": ev.event_type.name},
            "status": ev.status,
            "confidence": ev.confidence,
            "children": list(ev.children),
            "arguments": [{"role": a.role, "filler": a.filler, "order": a.order} for a in ev.arguments],
            "provenance": list(ev.provenance),
        }
        if ev.schema_ref is not None:
            entry["schema_ref"] = ev.schema_ref
        events.append(entry)
    top = {
        "events": events,
        "entities": [
            {"id": e.id, "name": e.name, "wd_qnode": e.wd_qnode, "provenance": list(e.provenance)}
            for e in g.entities.values()
        ],
        "temporal": [{"before": e.before, "after": e.after} for e in g.temporal],
        "gates": [
            {"id": gt.id, "source": gt.source, "kind": gt.kind, "members": list(gt.members), "placement": gt.placement}
            for gt in g.gates
        ],
        "roots": list(g.roots),
        "match_pairs": [[s, i] for s, i in g.match_pairs],
        "provenance": [_record_to_obj(r) for r in g.provenance.values()],
    }
    return _dump(top)


def sniff_kind(data: bytes | str) -> str:
    """Best-effort document kind from top-level keys: corpus, graph, schema, or instance."""
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError:
        return "unknown"
    if not isinstance(raw, dict):
        return "unknown"
    if "documents" in raw:
        return "corpus"
    if "match_pairs" in raw:
        return "graph"
    if "roots" in raw:
        return "schema"
    return "instance"

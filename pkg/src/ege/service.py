"""Session-scoped HTTP interface over matching, layout, provenance and editing.

One session = one (schema, instance, corpus) trio matched into an editable
graph. Reads are served from immutable revision snapshots and are
byte-stable for a fixed (revision, query); writes are serialized per
session under a lock. With a data directory configured, sessions persist
as their base files plus an append-only op log, and a restart replays the
log back to the same revision (verified hash per entry).
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI
from fastapi.responses import JSONResponse, Response

from . import editor
from .editor import EditSession, apply_batch, op_from_obj, op_to_obj
from .formats import (
    CorpusFile,
    InstanceFile,
    SchemaFile,
    parse_corpus,
    parse_instance,
    parse_schema,
    serialize_corpus,
    serialize_graph,
    serialize_instance,
    serialize_schema,
)
from .layout import ExpansionState, compute_layout, layout_to_obj
from .matcher import MatchConfig, match_graphs
from .model import (
    Diagnostic,
    EngineError,
    InstantiatedGraph,
    MATCHED,
    PREDICTED,
    SOURCE_ONLY,
    entity_occurrence_counts,
    error,
    validate_graph,
)
from .provenance import ProvenanceIndex

OPS_LOG = "ops.jsonl"
META_FILE = "meta.json"


def _dump_bytes(obj: Any) -> bytes:
    return (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def graph_hash(g: InstantiatedGraph) -> str:
    return hashlib.sha256(serialize_graph(g)).hexdigest()


class Session:
    def __init__(
        self,
        session_id: str,
        schema: SchemaFile,
        instance: InstanceFile,
        corpus: CorpusFile,
        cfg: MatchConfig,
    ):
        self.id = session_id
        self.schema = schema
        self.instance = instance
        self.corpus = corpus
        self.cfg = cfg
        result = match_graphs(schema, instance, cfg)
        self.decisions = result.decisions
        self.edit = EditSession(result.graph, corpus)
        self.revision = 0
        self.lock = threading.Lock()

    @property
    def graph(self) -> InstantiatedGraph:
        return self.edit.graph

    def provenance_index(self) -> ProvenanceIndex:
        return ProvenanceIndex(self.graph.provenance, self.corpus)

    def summary(self) -> dict:
        g = self.graph
        by_status = {MATCHED: 0, SOURCE_ONLY: 0, PREDICTED: 0}
        for ev in g.events.values():
            if ev.status in by_status:
                by_status[ev.status] += 1
        return {
            "events": len(g.events),
            "matched": by_status[MATCHED],
            "source_only": by_status[SOURCE_ONLY],
            "predicted": by_status[PREDICTED],
            "entities": len(g.entities),
            "match_pairs": len(g.match_pairs),
        }


class SessionStore:
    """In-memory sessions, optionally persisted under a data directory."""

    def __init__(self, data_dir: str | Path | None = None):
        self.sessions: dict[str, Session] = {}
        self.data_dir = Path(data_dir) if data_dir else None
        self._lock = threading.Lock()
        if self.data_dir is not None and self.data_dir.exists():
            for entry in sorted(self.data_dir.iterdir()):
                if (entry / META_FILE).exists():
                    sess = replay_session_dir(entry)
                    self.sessions[sess.id] = sess

    def get(self, session_id: str) -> Session:
        sess = self.sessions.get(session_id)
        if sess is None:
            raise EngineError("UNKNOWN_SESSION", session_id, f"session {session_id!r} does not exist")
        return sess

    def create(
        self,
        schema_bytes: bytes | str,
        instance_bytes: bytes | str,
        corpus_bytes: bytes | str,
        tau: float = 0.5,
    ) -> Session | list[Diagnostic]:
        diags: list[Diagnostic] = []
        schema = parse_schema(schema_bytes)
        if isinstance(schema, list):
            diags.extend(schema)
        instance = parse_instance(instance_bytes)
        if isinstance(instance, list):
            diags.extend(instance)
        corpus = parse_corpus(corpus_bytes)
        if isinstance(corpus, list):
            diags.extend(corpus)
        if diags:
            return diags
        try:
            cfg = MatchConfig(tau=tau)
            sess = Session(uuid.uuid4().hex, schema, instance, corpus, cfg)
        except EngineError as exc:
            return [exc.as_diagnostic()]
        with self._lock:
            self.sessions[sess.id] = sess
        if self.data_dir is not None:
            sdir = self.data_dir / sess.id
            sdir.mkdir(parents=True, exist_ok=True)
            (sdir / "schema.json").write_bytes(serialize_schema(schema))
            (sdir / "instance.json").write_bytes(serialize_instance(instance))
            (sdir / "corpus.json").write_bytes(serialize_corpus(corpus))
            (sdir / META_FILE).write_bytes(_dump_bytes({"session_id": sess.id, "tau": tau}))
        return sess

    def log_mutation(self, sess: Session, kind: str, ops_objs: list[dict] | None) -> None:
        if self.data_dir is None:
            return
        entry: dict[str, Any] = {"revision": sess.revision, "kind": kind}
        if ops_objs is not None:
            entry["ops"] = ops_objs
        entry["hash"] = graph_hash(sess.graph)
        path = self.data_dir / sess.id / OPS_LOG
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")


def replay_session_dir(session_dir: str | Path) -> Session:
    """Rebuild a session from its base files and op log; raises REPLAY_MISMATCH
    when an entry cannot be applied or its recorded hash disagrees."""
    session_dir = Path(session_dir)
    meta = json.loads((session_dir / META_FILE).read_text("utf-8"))
    schema = parse_schema((session_dir / "schema.json").read_bytes())
    instance = parse_instance((session_dir / "instance.json").read_bytes())
    corpus = parse_corpus((session_dir / "corpus.json").read_bytes())
    for name, parsed in (("schema", schema), ("instance", instance), ("corpus", corpus)):
        if isinstance(parsed, list):
            raise EngineError("REPLAY_MISMATCH", str(session_dir), f"base {name} file no longer parses")
    sess = Session(meta["session_id"], schema, instance, corpus, MatchConfig(tau=meta.get("tau", 0.5)))
    log_path = session_dir / OPS_LOG
    if not log_path.exists():
        return sess
    with log_path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            subject = f"{session_dir.name}:{lineno}"
            try:
                entry = json.loads(line)
            except json.JSONDecodeError:
                raise EngineError("REPLAY_MISMATCH", subject, "op log entry is not valid JSON")
            kind = entry.get("kind")
            if kind == "edits":
                ops = []
                for obj in entry.get("ops", []):
                    op = op_from_obj(obj)
                    if isinstance(op, list):
                        raise EngineError("REPLAY_MISMATCH", subject, "op log entry holds a malformed op")
                    ops.append(op)
                outcome = apply_batch(sess.edit, ops)
                if isinstance(outcome, tuple):
                    raise EngineError("REPLAY_MISMATCH", subject, "logged edit no longer applies")
            elif kind == "undo":
                editor.undo(sess.edit)
            elif kind == "redo":
                editor.redo(sess.edit)
            else:
                raise EngineError("REPLAY_MISMATCH", subject, f"unknown log entry kind {kind!r}")
            sess.revision = entry.get("revision", sess.revision + 1)
            recorded = entry.get("hash")
            if recorded != graph_hash(sess.graph):
                raise EngineError("REPLAY_MISMATCH", subject, "replayed graph hash differs from the recorded hash")
    return sess


# ---------------------------------------------------------------------------
# HTTP layer


def _error_response(status: int, diags: list[Diagnostic] | Diagnostic, extra: dict | None = None) -> JSONResponse:
    if isinstance(diags, Diagnostic):
        diags = [diags]
    body: dict[str, Any] = {
        "errors": [{"code": d.code, "subject": d.subject, "message": d.message} for d in diags]
    }
    if extra:
        body.update(extra)
    return JSONResponse(status_code=status, content=body)


_STATUS_FOR = {
    "UNKNOWN_SESSION": 404,
    "REF_MISSING": 404,
    "NOT_TEXT": 400,
    "NOT_IMAGE": 400,
    "BAD_RANGE": 400,
    "AT_BOUNDARY": 409,
    "STALE_SPAN": 409,
    "TEMPORAL_CYCLE": 409,
    "NOT_A_PARENT": 400,
    "EMPTY_LAYOUT": 400,
}


def _engine_error_response(exc: EngineError) -> JSONResponse:
    return _error_response(_STATUS_FOR.get(exc.code, 400), exc.as_diagnostic())


def _canonical(obj: Any, status: int = 200) -> Response:
    return Response(content=_dump_bytes(obj), media_type="application/json", status_code=status)


def create_app(data_dir: str | Path | None = None) -> FastAPI:
    store = SessionStore(data_dir)
    app = FastAPI(title="event graph engine")
    app.state.store = store

    @app.post("/sessions")
    def create_session(payload: dict = Body(...)):
        def as_text(value: Any) -> str:
            return value if isinstance(value, str) else json.dumps(value)

        missing = [k for k in ("schema", "instance", "corpus") if k not in payload]
        if missing:
            return _error_response(400, [error("SYNTAX", k, "missing document") for k in missing])
        tau = payload.get("tau", 0.5)
        if not isinstance(tau, (int, float)) or isinstance(tau, bool):
            return _error_response(400, error("BAD_TAU", "tau", "tau must be a number"))
        result = store.create(
            as_text(payload["schema"]), as_text(payload["instance"]), as_text(payload["corpus"]), tau=float(tau)
        )
        if isinstance(result, list):
            return _error_response(400, result)
        return _canonical({
            "session_id": result.id,
            "revision": result.revision,
            "summary": result.summary(),
        })

    @app.get("/sessions/{sid}")
    def session_info(sid: str):
        try:
            sess = store.get(sid)
        except EngineError as exc:
            return _engine_error_response(exc)
        return _canonical({
            "session_id": sess.id,
            "revision": sess.revision,
            "cursor": sess.edit.cursor,
            "head": sess.edit.head,
            "summary": sess.summary(),
            "diagnostics": [
                {"code": d.code, "severity": d.severity, "subject": d.subject, "message": d.message}
                for d in validate_graph(sess.graph, sess.corpus)
            ],
        })

    @app.get("/sessions/{sid}/graph")
    def get_view(sid: str, expanded: str = "", entity: str | None = None,
                 lo: float | None = None, hi: float | None = None):
        try:
            sess = store.get(sid)
            g = sess.graph
            parents = {ev.id for ev in g.events.values() if ev.children}
            if expanded == "all":
                requested = parents
            else:
                requested = {e for e in expanded.split(",") if e} & parents
            dim: frozenset[str] | None = None
            if entity is not None:
                dim = editor.filter_by_entity(g, entity)
            if lo is not None or hi is not None:
                conf = editor.filter_by_confidence(g, lo if lo is not None else 0.0, hi if hi is not None else 1.0)
                dim = conf if dim is None else dim & conf
            layout = compute_layout(g, ExpansionState(frozenset(requested)), dim)
        except EngineError as exc:
            return _engine_error_response(exc)
        payload = layout_to_obj(layout)
        for node in payload["nodes"]:
            event = g.events.get(node["id"])
            if event is not None:
                node["name"] = event.name
                node["confidence"] = event.confidence
        payload["revision"] = sess.revision
        return _canonical(payload)

    @app.get("/sessions/{sid}/events/{eid}")
    def get_event_info(sid: str, eid: str):
        try:
            sess = store.get(sid)
            g = sess.graph
            node = g.events.get(eid)
            if node is None:
                raise EngineError("REF_MISSING", eid, f"event {eid!r} does not exist")
        except EngineError as exc:
            return _engine_error_response(exc)
        rows = []
        for arg in node.sorted_arguments():
            ent = g.entities.get(arg.filler)
            if ent is None or not ent.provenance:
                continue  # only source-backed entities are shown
            rows.append({
                "role": arg.role,
                "order": arg.order,
                "entity": {"id": ent.id, "name": ent.name, "wd_qnode": ent.wd_qnode},
            })
        return _canonical({
            "id": node.id,
            "name": node.name,
            "description": node.description,
            "event_type": {"qnode": node.event_type.qnode, "name": node.event_type.name},
            "status": node.status,
            "confidence": node.confidence,
            "schema_ref": node.schema_ref,
            "decision": sess.decisions.get(node.id, ""),
            "arguments": rows,
            "provenance": list(node.provenance),
            "revision": sess.revision,
        })

    @app.get("/sessions/{sid}/entities")
    def list_entities(sid: str):
        try:
            sess = store.get(sid)
        except EngineError as exc:
            return _engine_error_response(exc)
        g = sess.graph
        ranked = [
            {"id": eid, "name": g.entities[eid].name, "wd_qnode": g.entities[eid].wd_qnode, "count": count}
            for eid, count in entity_occurrence_counts(g)
        ]
        return _canonical({"entities": ranked, "revision": sess.revision})

    @app.get("/sessions/{sid}/provenance/{pid}")
    def resolve_provenance(sid: str, pid: str):
        try:
            sess = store.get(sid)
            payload = sess.provenance_index().resolve(pid)
        except EngineError as exc:
            return _engine_error_response(exc)
        payload["revision"] = sess.revision
        return _canonical(payload)

    @app.get("/sessions/{sid}/provenance/{pid}/context")
    def provenance_context(sid: str, pid: str):
        try:
            sess = store.get(sid)
            payload = sess.provenance_index().expand_context(pid)
        except EngineError as exc:
            return _engine_error_response(exc)
        payload["revision"] = sess.revision
        return _canonical(payload)

    @app.get("/sessions/{sid}/documents/{doc_id}")
    def get_document(sid: str, doc_id: str):
        try:
            sess = store.get(sid)
        except EngineError as exc:
            return _engine_error_response(exc)
        doc = sess.corpus.document_index().get(doc_id)
        if doc is None:
            return _engine_error_response(EngineError("REF_MISSING", doc_id, f"document {doc_id!r} does not exist"))
        return _canonical({
            "doc_id": doc.doc_id,
            "title": doc.title,
            "text": doc.text,
            "images": [
                {"image_id": i.image_id, "media": i.media, "width": i.width, "height": i.height}
                for i in doc.images
            ],
            "revision": sess.revision,
        })

    @app.get("/sessions/{sid}/filter/entity/{entity_id}")
    def entity_filter(sid: str, entity_id: str):
        try:
            sess = store.get(sid)
            events = editor.filter_by_entity(sess.graph, entity_id)
        except EngineError as exc:
            return _engine_error_response(exc)
        return _canonical({"events": sorted(events), "revision": sess.revision})

    @app.get("/sessions/{sid}/filter/confidence")
    def confidence_filter(sid: str, lo: float = 0.0, hi: float = 1.0):
        try:
            sess = store.get(sid)
            events = editor.filter_by_confidence(sess.graph, lo, hi)
        except EngineError as exc:
            return _engine_error_response(exc)
        return _canonical({"events": sorted(events), "revision": sess.revision})

    @app.post("/sessions/{sid}/edits")
    def post_edits(sid: str, payload: dict = Body(...)):
        try:
            sess = store.get(sid)
        except EngineError as exc:
            return _engine_error_response(exc)
        raw_ops = payload.get("ops")
        if not isinstance(raw_ops, list) or not raw_ops:
            return _error_response(400, error("BAD_OP", "ops", "expected a non-empty list of ops"))
        ops = []
        for i, obj in enumerate(raw_ops):
            op = op_from_obj(obj)
            if isinstance(op, list):
                return _error_response(422, op, extra={"code": "ATOMICITY_ABORT", "failed_index": i})
            ops.append(op)
        with sess.lock:
            outcome = apply_batch(sess.edit, ops)
            if isinstance(outcome, tuple):
                failed_index, diags = outcome
                return _error_response(422, diags, extra={"code": "ATOMICITY_ABORT", "failed_index": failed_index})
            sess.revision += 1
            store.log_mutation(sess, "edits", [op_to_obj(op) for op in ops])
        return _canonical({"revision": sess.revision, "cursor": sess.edit.cursor, "head": sess.edit.head})

    def _history_move(sid: str, kind: str):
        try:
            sess = store.get(sid)
        except EngineError as exc:
            return _engine_error_response(exc)
        with sess.lock:
            try:
                if kind == "undo":
                    editor.undo(sess.edit)
                else:
                    editor.redo(sess.edit)
            except EngineError as exc:
                return _engine_error_response(exc)
            sess.revision += 1
            store.log_mutation(sess, kind, None)
        return _canonical({"revision": sess.revision, "cursor": sess.edit.cursor, "head": sess.edit.head})

    @app.post("/sessions/{sid}/undo")
    def post_undo(sid: str):
        return _history_move(sid, "undo")

    @app.post("/sessions/{sid}/redo")
    def post_redo(sid: str):
        return _history_move(sid, "redo")

    @app.get("/sessions/{sid}/export")
    def export_graph(sid: str):
        try:
            sess = store.get(sid)
        except EngineError as exc:
            return _engine_error_response(exc)
        return Response(content=serialize_graph(sess.graph), media_type="application/json")

    return app

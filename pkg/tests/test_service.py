import json

import pytest
from fastapi.testclient import TestClient

from ege.formats import serialize_graph
from ege.matcher import match_graphs
from ege.model import MATCHED, PREDICTED, SOURCE_ONLY
from ege.service import create_app, graph_hash, replay_session_dir

from conftest import fixture_bytes
from oracles import info_arguments_oracle, occurrence_counts_oracle


@pytest.fixture()
def client() -> TestClient:
    return TestClient(create_app())


def make_session(client, tau=0.5, instance_bytes=None) -> str:
    response = client.post("/sessions", json={
        "schema": fixture_bytes("outbreak_schema.json").decode(),
        "instance": (instance_bytes or fixture_bytes("cholera_instance.json")).decode(),
        "corpus": fixture_bytes("cholera_corpus.json").decode(),
        "tau": tau,
    })
    assert response.status_code == 200, response.text
    return response.json()["session_id"]


EMPTY_INSTANCE = json.dumps({"events": [], "entities": [], "temporal": [], "provenance": []})


class TestCreateSession:
    def test_summary_matches_direct_matcher_call(self, client, schema, instance):
        response = client.post("/sessions", json={
            "schema": fixture_bytes("outbreak_schema.json").decode(),
            "instance": fixture_bytes("cholera_instance.json").decode(),
            "corpus": fixture_bytes("cholera_corpus.json").decode(),
        })
        assert response.status_code == 200
        summary = response.json()["summary"]
        g = match_graphs(schema, instance).graph
        statuses = [ev.status for ev in g.events.values()]
        assert summary["events"] == len(g.events)
        assert summary["matched"] == statuses.count(MATCHED)
        assert summary["predicted"] == statuses.count(PREDICTED)
        assert summary["source_only"] == statuses.count(SOURCE_ONLY)
        assert summary["match_pairs"] == len(g.match_pairs)

    def test_empty_instance_all_predicted(self, client):
        sid = make_session(client, instance_bytes=EMPTY_INSTANCE.encode())
        info = client.get(f"/sessions/{sid}").json()
        assert info["summary"]["predicted"] == info["summary"]["events"] == 7
        assert info["summary"]["matched"] == 0

    def test_malformed_schema_no_session(self, client):
        response = client.post("/sessions", json={
            "schema": "{ nope", "instance": EMPTY_INSTANCE,
            "corpus": json.dumps({"documents": []}),
        })
        assert response.status_code == 400
        assert response.json()["errors"][0]["code"] == "SYNTAX"

    def test_embedded_objects_accepted(self, client):
        response = client.post("/sessions", json={
            "schema": json.loads(fixture_bytes("outbreak_schema.json")),
            "instance": json.loads(EMPTY_INSTANCE),
            "corpus": {"documents": []},
        })
        assert response.status_code == 200

    def test_bad_tau_rejected(self, client):
        response = client.post("/sessions", json={
            "schema": json.loads(fixture_bytes("outbreak_schema.json")),
            "instance": json.loads(EMPTY_INSTANCE),
            "corpus": {"documents": []},
            "tau": 1.5,
        })
        assert response.status_code == 400
        assert response.json()["errors"][0]["code"] == "BAD_TAU"


class TestGetView:
    def test_default_view_is_top_level(self, client):
        sid = make_session(client)
        payload = client.get(f"/sessions/{sid}/graph").json()
        assert [n["id"] for n in payload["nodes"]] == ["illness"]
        assert payload["nodes"][0]["shape"] == "diamond"
        assert payload["revision"] == 0

    def test_expansion_and_confidence_payload(self, client):
        sid = make_session(client)
        payload = client.get(f"/sessions/{sid}/graph", params={"expanded": "illness"}).json()
        ids = {n["id"] for n in payload["nodes"]}
        assert {"illness", "ev-symptoms", "ev-outcomes", "ev-diagnosis", "gate:illness"} <= ids
        conf = {n["id"]: n.get("confidence") for n in payload["nodes"]}
        assert conf["ev-symptoms"] == 1.0
        assert conf["gate:illness"] is None  # glyphs carry no confidence

    def test_entity_filter_dims_unrelated(self, client, schema, instance):
        from ege.editor import filter_by_entity

        sid = make_session(client)
        payload = client.get(f"/sessions/{sid}/graph",
                             params={"expanded": "all", "entity": "ent-cholera"}).json()
        g = match_graphs(schema, instance).graph
        emphasis = filter_by_entity(g, "ent-cholera")
        for node in payload["nodes"]:
            if node["id"].startswith("gate:"):
                continue
            assert node["dimmed"] == (node["id"] not in emphasis), node

    def test_confidence_filter_dims(self, client):
        sid = make_session(client)
        payload = client.get(f"/sessions/{sid}/graph",
                             params={"expanded": "all", "lo": 0.9, "hi": 1.0}).json()
        dimmed = {n["id"]: n["dimmed"] for n in payload["nodes"]}
        assert dimmed["ev-symptoms"] is False  # confidence 1.0
        assert dimmed["death-outcomes"] is True  # prediction at 1/3

    def test_byte_identical_responses(self, client):
        sid = make_session(client)
        first = client.get(f"/sessions/{sid}/graph", params={"expanded": "all"})
        second = client.get(f"/sessions/{sid}/graph", params={"expanded": "all"})
        assert first.content == second.content

    def test_unknown_session(self, client):
        response = client.get("/sessions/ghost/graph")
        assert response.status_code == 404
        assert response.json()["errors"][0]["code"] == "UNKNOWN_SESSION"

    def test_unknown_entity_filter(self, client):
        sid = make_session(client)
        response = client.get(f"/sessions/{sid}/graph", params={"entity": "ghost"})
        assert response.status_code == 404


class TestEventInfo:
    def test_analysis_event_rows(self, client):
        sid = make_session(client)
        payload = client.get(f"/sessions/{sid}/events/ev-data-analysis").json()
        rows = [(r["role"], r["entity"]["id"]) for r in payload["arguments"]]
        assert ("theme", "ent-confirmed-cases") in rows
        assert payload["status"] == "source-only"
        assert payload["decision"] == "attached"

    def test_rows_follow_stored_order_and_provenance_rule(self, client, schema, instance):
        sid = make_session(client)
        g = match_graphs(schema, instance).graph
        for eid in g.events:
            payload = client.get(f"/sessions/{sid}/events/{eid}").json()
            rows = [(r["role"], r["entity"]["id"]) for r in payload["arguments"]]
            assert rows == info_arguments_oracle(g, eid)

    def test_provenance_less_entities_omitted(self, client, schema):
        doc = json.loads(fixture_bytes("cholera_instance.json"))
        doc["entities"].append({"id": "ent-bare", "name": "Generic Thing", "provenance": []})
        for ev in doc["events"]:
            if ev["id"] == "ev-symptoms":
                ev["arguments"] = [{"role": "theme", "filler": "ent-bare"}]
        response = client.post("/sessions", json={
            "schema": fixture_bytes("outbreak_schema.json").decode(),
            "instance": json.dumps(doc),
            "corpus": fixture_bytes("cholera_corpus.json").decode(),
        })
        sid = response.json()["session_id"]
        payload = client.get(f"/sessions/{sid}/events/ev-symptoms").json()
        assert payload["arguments"] == []

    def test_unknown_event(self, client):
        sid = make_session(client)
        assert client.get(f"/sessions/{sid}/events/ghost").status_code == 404


class TestEntitiesAndFilters:
    def test_ranked_entities(self, client, schema, instance):
        sid = make_session(client)
        payload = client.get(f"/sessions/{sid}/entities").json()
        g = match_graphs(schema, instance).graph
        expected = occurrence_counts_oracle(g)
        assert [(e["id"], e["count"]) for e in payload["entities"]] == expected
        assert payload["entities"][0]["id"] == "ent-cholera"

    def test_filter_routes(self, client):
        sid = make_session(client)
        by_entity = client.get(f"/sessions/{sid}/filter/entity/ent-cholera").json()
        assert by_entity["events"] == ["ev-data-analysis", "ev-diagnosis", "ev-symptoms"]
        by_conf = client.get(f"/sessions/{sid}/filter/confidence", params={"lo": 1.0, "hi": 1.0}).json()
        assert set(by_conf["events"]) == {"ev-symptoms", "ev-diagnosis"}
        bad = client.get(f"/sessions/{sid}/filter/confidence", params={"lo": 0.9, "hi": 0.1})
        assert bad.status_code == 400


class TestProvenanceRoutes:
    def test_resolve_and_context_and_document(self, client):
        sid = make_session(client)
        resolved = client.get(f"/sessions/{sid}/provenance/prov-specialist-img").json()
        assert resolved["kind"] == "image" and resolved["bbox"] == [120, 40, 200, 300]
        context = client.get(f"/sessions/{sid}/provenance/prov-specialist-text/context").json()
        assert "disease specialist" in context["text"]
        doc = client.get(f"/sessions/{sid}/documents/doc-01").json()
        assert doc["title"] == "Cholera outbreak confirmed in Dominica"
        assert len(doc["images"]) == 9
        missing = client.get(f"/sessions/{sid}/provenance/ghost")
        assert missing.status_code == 404
        not_text = client.get(f"/sessions/{sid}/provenance/prov-specialist-img/context")
        assert not_text.status_code == 400


class TestEdits:
    def test_apply_and_undo_redo(self, client):
        sid = make_session(client)
        response = client.post(f"/sessions/{sid}/edits", json={"ops": [
            {"op": "UpdateEventFields", "id": "ev-symptoms", "name": "Renamed"},
        ]})
        assert response.status_code == 200
        assert response.json() == {"revision": 1, "cursor": 1, "head": 1}
        payload = client.get(f"/sessions/{sid}/events/ev-symptoms").json()
        assert payload["name"] == "Renamed"

        undone = client.post(f"/sessions/{sid}/undo").json()
        assert undone == {"revision": 2, "cursor": 0, "head": 1}
        assert client.get(f"/sessions/{sid}/events/ev-symptoms").json()["name"] == "Vomiting and Diarrhea"
        redone = client.post(f"/sessions/{sid}/redo").json()
        assert redone == {"revision": 3, "cursor": 1, "head": 1}

    def test_atomic_abort(self, client):
        sid = make_session(client)
        before = client.get(f"/sessions/{sid}").json()
        response = client.post(f"/sessions/{sid}/edits", json={"ops": [
            {"op": "UpdateEventFields", "id": "ev-symptoms", "name": "Renamed"},
            {"op": "AddTemporalEdge", "before": "ev-symptoms", "after": "ev-symptoms"},
        ]})
        assert response.status_code == 422
        body = response.json()
        assert body["code"] == "ATOMICITY_ABORT" and body["failed_index"] == 1
        after = client.get(f"/sessions/{sid}").json()
        assert after["revision"] == before["revision"] == 0
        assert client.get(f"/sessions/{sid}/events/ev-symptoms").json()["name"] == "Vomiting and Diarrhea"

    def test_undo_past_base(self, client):
        sid = make_session(client)
        response = client.post(f"/sessions/{sid}/undo")
        assert response.status_code == 409
        assert response.json()["errors"][0]["code"] == "AT_BOUNDARY"

    def test_malformed_op_payload(self, client):
        sid = make_session(client)
        response = client.post(f"/sessions/{sid}/edits", json={"ops": [{"op": "Explode"}]})
        assert response.status_code == 422
        assert response.json()["failed_index"] == 0

    def test_sessions_are_isolated(self, client):
        sid_a = make_session(client)
        sid_b = make_session(client)
        client.post(f"/sessions/{sid_a}/edits", json={"ops": [
            {"op": "UpdateEventFields", "id": "ev-symptoms", "name": "Changed in A"},
        ]})
        assert client.get(f"/sessions/{sid_b}/events/ev-symptoms").json()["name"] == "Vomiting and Diarrhea"
        assert client.get(f"/sessions/{sid_b}").json()["revision"] == 0


class TestRepairWorkflow:
    def test_cyclic_extraction_is_fixable_through_the_editor(self, client):
        # a news cluster with contradictory temporal extractions produces a
        # sibling cycle: the graph view refuses until the analyst repairs it
        doc = json.loads(fixture_bytes("cholera_instance.json"))
        doc["temporal"].append({"before": "ev-diagnosis", "after": "ev-symptoms"})
        response = client.post("/sessions", json={
            "schema": fixture_bytes("outbreak_schema.json").decode(),
            "instance": json.dumps(doc),
            "corpus": fixture_bytes("cholera_corpus.json").decode(),
        })
        sid = response.json()["session_id"]

        refused = client.get(f"/sessions/{sid}/graph", params={"expanded": "all"})
        assert refused.status_code == 409
        assert refused.json()["errors"][0]["code"] == "TEMPORAL_CYCLE"

        fixed = client.post(f"/sessions/{sid}/edits", json={"ops": [
            {"op": "RemoveTemporalEdge", "before": "ev-diagnosis", "after": "ev-symptoms"},
        ]})
        assert fixed.status_code == 200
        assert client.get(f"/sessions/{sid}/graph", params={"expanded": "all"}).status_code == 200


class TestExport:
    def test_export_equals_matcher_serialization(self, client, schema, instance):
        sid = make_session(client)
        response = client.get(f"/sessions/{sid}/export")
        expected = serialize_graph(match_graphs(schema, instance).graph)
        assert response.content == expected

    def test_export_tracks_edits(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/edits", json={"ops": [
            {"op": "UpdateEventFields", "id": "ev-symptoms", "name": "Edited"},
        ]})
        assert b"Edited" in client.get(f"/sessions/{sid}/export").content


class TestPersistenceAndReplay:
    def _ten_ops(self):
        return [
            {"op": "UpdateEventFields", "id": "ev-symptoms", "name": "Step 1"},
            {"op": "AddArgument", "id": "ev-symptoms", "role": "place", "entity": "ent-outbreak"},
            {"op": "AddTemporalEdge", "before": "ev-symptoms", "after": "ev-data-analysis"},
            {"op": "UpdateEventFields", "id": "ev-diagnosis", "description": "Step 4"},
            {"op": "ReorderArguments", "id": "ev-data-analysis", "new_order": [2, 0, 1]},
            {"op": "UpdateBoundingBox", "id": "prov-specialist-img", "bbox": [10, 10, 80, 90]},
            {"op": "UpdateTextSpan", "id": "prov-victims-text", "start": 0, "end": 16},
            {"op": "RemoveArgument", "id": "ev-outcomes", "role": "topic", "entity": "ent-outbreak"},
            {"op": "SetGate", "gate": {"id": "gate:extra", "source": "illness", "kind": "OR",
                                       "members": ["ev-symptoms"], "placement": "children"}},
            {"op": "UpdateEventFields", "id": "ev-outcomes", "name": "Step 10"},
        ]

    def test_restart_replays_to_identical_state(self, tmp_path):
        app = create_app(tmp_path)
        client = TestClient(app)
        sid = make_session(client)
        for op in self._ten_ops():
            response = client.post(f"/sessions/{sid}/edits", json={"ops": [op]})
            assert response.status_code == 200, response.text
        client.post(f"/sessions/{sid}/undo")
        client.post(f"/sessions/{sid}/redo")
        final_export = client.get(f"/sessions/{sid}/export").content
        final_revision = client.get(f"/sessions/{sid}").json()["revision"]
        live_hash = graph_hash(app.state.store.get(sid).graph)

        restarted = TestClient(create_app(tmp_path))
        assert restarted.get(f"/sessions/{sid}").json()["revision"] == final_revision == 12
        assert restarted.get(f"/sessions/{sid}/export").content == final_export
        restarted_hash = graph_hash(restarted.app.state.store.get(sid).graph)
        assert restarted_hash == live_hash

    def test_corrupt_log_detected(self, tmp_path):
        client = TestClient(create_app(tmp_path))
        sid = make_session(client)
        client.post(f"/sessions/{sid}/edits", json={"ops": [
            {"op": "UpdateEventFields", "id": "ev-symptoms", "name": "Edited"},
        ]})
        log = tmp_path / sid / "ops.jsonl"
        entry = json.loads(log.read_text().strip())
        entry["hash"] = "0" * 64
        log.write_text(json.dumps(entry) + "\n")
        with pytest.raises(Exception) as err:
            replay_session_dir(tmp_path / sid)
        assert getattr(err.value, "code", "") == "REPLAY_MISMATCH"

    def test_replay_without_log_is_base(self, tmp_path):
        client = TestClient(create_app(tmp_path))
        sid = make_session(client)
        base_export = client.get(f"/sessions/{sid}/export").content
        sess = replay_session_dir(tmp_path / sid)
        assert serialize_graph(sess.graph) == base_export

    def test_replay_reproduces_history_truncation(self, tmp_path):
        # edit A, edit B, undo, edit C: replay must rebuild base + A + C
        client = TestClient(create_app(tmp_path))
        sid = make_session(client)
        for name in ("Step A", "Step B"):
            client.post(f"/sessions/{sid}/edits", json={"ops": [
                {"op": "UpdateEventFields", "id": "ev-symptoms", "name": name},
            ]})
        client.post(f"/sessions/{sid}/undo")
        client.post(f"/sessions/{sid}/edits", json={"ops": [
            {"op": "UpdateEventFields", "id": "ev-diagnosis", "name": "Step C"},
        ]})
        live_export = client.get(f"/sessions/{sid}/export").content
        live_info = client.get(f"/sessions/{sid}").json()
        assert (live_info["cursor"], live_info["head"]) == (2, 2)

        restarted = TestClient(create_app(tmp_path))
        info = restarted.get(f"/sessions/{sid}").json()
        assert (info["cursor"], info["head"]) == (2, 2)
        assert info["revision"] == live_info["revision"] == 4
        assert restarted.get(f"/sessions/{sid}/export").content == live_export
        assert b"Step A" in live_export and b"Step C" in live_export and b"Step B" not in live_export

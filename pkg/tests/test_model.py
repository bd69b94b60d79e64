import random
from dataclasses import replace
from itertools import product

import pytest

from ege.model import (
    Argument,
    EngineError,
    EntityNode,
    EventNode,
    GateSpec,
    InstantiatedGraph,
    TemporalEdge,
    check_gates,
    detect_temporal_cycles,
    entity_occurrence_counts,
    validate_graph,
)

from conftest import random_graph, with_statuses
from oracles import (
    enumerate_cycles_oracle,
    gate_verdict_oracle,
    group_is_dag,
    occurrence_counts_oracle,
)


def _sibling_row(ids, edges):
    """Flat graph: all ids are roots, so they form one sibling group."""
    events = {i: EventNode(id=i, name=i.upper()) for i in ids}
    return InstantiatedGraph(
        events=events,
        temporal=tuple(TemporalEdge(a, b) for a, b in edges),
        roots=tuple(ids),
    )


class TestValidateGraph:
    def test_row_fixture_is_clean(self, row_graph):
        assert validate_graph(row_graph) == []

    def test_empty_graph_is_clean(self):
        assert validate_graph(InstantiatedGraph()) == []

    def test_two_node_sibling_cycle(self):
        g = _sibling_row(["ev-a", "ev-b"], [("ev-a", "ev-b"), ("ev-b", "ev-a")])
        report = validate_graph(g)
        errors = [d for d in report if d.code == "TEMPORAL_CYCLE"]
        assert len(errors) == 1
        assert "ev-a" in errors[0].message and "ev-b" in errors[0].message
        # brute-force enumeration agrees there is exactly this one cycle
        assert enumerate_cycles_oracle(["ev-a", "ev-b"], {("ev-a", "ev-b"), ("ev-b", "ev-a")}) == [["ev-a", "ev-b"]]

    def test_pure_and_idempotent(self, row_graph):
        assert validate_graph(row_graph) == validate_graph(row_graph)
        rng = random.Random(7)
        for _ in range(10):
            g, _ = random_graph(rng)
            assert validate_graph(g) == validate_graph(g)

    def test_random_graphs_are_clean_by_construction(self):
        rng = random.Random(11)
        for _ in range(25):
            g, corpus = random_graph(rng)
            assert validate_graph(g, corpus) == []

    def test_reports_are_sorted(self):
        bad = InstantiatedGraph(
            events={
                "ev-b": EventNode(id="ev-b", name="B", confidence=2.0, children=("zzz",)),
                "ev-a": EventNode(id="ev-a", name="A", status="matched"),
            },
            roots=("ev-b", "ev-a"),
        )
        report = validate_graph(bad)
        assert report == sorted(report, key=lambda d: ({"error": 0, "warning": 1}[d.severity], d.subject, d.code))
        codes = {d.code for d in report}
        assert {"CONFIDENCE_RANGE", "CHILD_MISSING", "MATCHED_MISSING_SCHEMA_REF"} <= codes

    def test_structural_codes(self):
        g = InstantiatedGraph(
            events={
                "ev-a": EventNode(id="ev-a", name="A", children=("ev-a",)),
            },
            roots=("ev-a",),
        )
        assert any(d.code == "SELF_CHILD" for d in validate_graph(g))

        orphan = InstantiatedGraph(events={"ev-a": EventNode(id="ev-a", name="A")})
        assert any(d.code == "ORPHAN_EVENT" for d in validate_graph(orphan))

    def test_gate_placement_codes(self, row_graph):
        bad_gate = GateSpec("gate:x", "symptoms", "AND", ("death",), "successors")
        g = replace(row_graph, gates=row_graph.gates + (bad_gate,))
        assert any(d.code == "GATE_MEMBER_NOT_SUCCESSOR" for d in validate_graph(g))


class TestDetectTemporalCycles:
    def test_row_fixture_is_a_dag(self, row_graph):
        assert detect_temporal_cycles(row_graph) == []

    def test_single_event_no_edges(self):
        assert detect_temporal_cycles(_sibling_row(["ev-a"], [])) == []

    def test_three_cycle(self):
        g = _sibling_row(["a", "b", "c"], [("a", "b"), ("b", "c"), ("c", "a")])
        assert detect_temporal_cycles(g) == [["a", "b", "c"]]

    def test_cross_group_edges_do_not_count(self):
        # parent -> child -> parent is a cycle only if they were siblings
        parent = EventNode(id="p", name="P", children=("c",))
        child = EventNode(id="c", name="C")
        g = InstantiatedGraph(
            events={"p": parent, "c": child},
            temporal=(TemporalEdge("p", "c"), TemporalEdge("c", "p")),
            roots=("p",),
        )
        assert detect_temporal_cycles(g) == []

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_exhaustive_enumeration(self, seed):
        rng = random.Random(seed)
        ids = [f"n{i}" for i in range(rng.randint(2, 6))]
        edges = set()
        for a in ids:
            for b in ids:
                if a != b and rng.random() < 0.3:
                    edges.add((a, b))
        g = _sibling_row(ids, sorted(edges))
        assert detect_temporal_cycles(g) == enumerate_cycles_oracle(ids, edges)
        # empty exactly when a topological order exists
        assert (detect_temporal_cycles(g) == []) == group_is_dag(ids, edges)


class TestCheckGates:
    def test_or_gate_with_one_matched_member(self, row_graph):
        statuses = {s.gate: s for s in check_gates(row_graph)}
        or_status = statuses["gate:illness"]
        assert or_status.verdict == "satisfied"
        assert or_status.occurred == ("symptoms",)

    def test_xor_zero_occurred_is_pending(self, row_graph):
        statuses = {s.gate: s for s in check_gates(row_graph)}
        assert statuses["gate:illness-outcomes"].verdict == "pending"

    def test_and_gate_progression(self, row_graph):
        both = with_statuses(row_graph, {"death": "matched", "funeral": "matched"})
        one = with_statuses(row_graph, {"death": "matched"})
        assert {s.gate: s.verdict for s in check_gates(both)}["gate:death-outcomes"] == "satisfied"
        assert {s.gate: s.verdict for s in check_gates(one)}["gate:death-outcomes"] == "pending"

    def test_xor_two_occurred_is_violated(self, row_graph):
        g = with_statuses(row_graph, {"symptoms": "matched", "illness-outcomes": "source-only"})
        assert {s.gate: s.verdict for s in check_gates(g)}["gate:illness"] != "violated"  # OR never violates
        xor = GateSpec("gate:xor2", "illness", "XOR", ("symptoms", "illness-outcomes"), "successors")
        g2 = replace(g, gates=g.gates + (xor,))
        assert {s.gate: s.verdict for s in check_gates(g2)}["gate:xor2"] == "violated"

    def test_exhaustive_truth_table(self):
        """Every kind, member counts 1..6, all occurrence assignments."""
        for kind in ("AND", "OR", "XOR"):
            for n in range(1, 7):
                member_ids = [f"m{i}" for i in range(n)]
                for bits in product([False, True], repeat=n):
                    events = {"src": EventNode(id="src", name="S")}
                    for mid, occ in zip(member_ids, bits):
                        status = "source-only" if occ else "predicted"
                        schema_ref = None if occ else mid
                        events[mid] = EventNode(id=mid, name=mid, status=status, schema_ref=schema_ref)
                    g = InstantiatedGraph(
                        events=events,
                        temporal=tuple(TemporalEdge("src", m) for m in member_ids),
                        gates=(GateSpec("gate:src", "src", kind, tuple(member_ids), "successors"),),
                        roots=tuple(["src"] + member_ids),
                    )
                    [status] = check_gates(g)
                    assert status.verdict == gate_verdict_oracle(kind, list(bits)), (kind, bits)
                    assert set(status.occurred) == {m for m, b in zip(member_ids, bits) if b}

    def test_occurred_means_matched_or_source_only(self, row_graph):
        g = with_statuses(row_graph, {"symptoms": "predicted"})
        statuses = {s.gate: s for s in check_gates(g)}
        assert statuses["gate:illness"].verdict == "pending"
        assert statuses["gate:illness"].occurred == ()

    def test_strict_mode_flips_pending_on_terminal_source(self, row_graph):
        progressive = {s.gate: s.verdict for s in check_gates(row_graph)}
        assert progressive["gate:death-outcomes"] == "pending"
        strict = {
            s.gate: s.verdict
            for s in check_gates(row_graph, mode="strict", terminal={"death-outcomes"})
        }
        assert strict["gate:death-outcomes"] == "violated"
        assert strict["gate:illness-outcomes"] == "pending"  # source not terminal

    def test_unknown_member_raises(self, row_graph):
        bad = GateSpec("gate:bad", "illness", "OR", ("nope",), "successors")
        g = replace(row_graph, gates=(bad,))
        with pytest.raises(EngineError) as err:
            check_gates(g)
        assert err.value.code == "UNKNOWN_MEMBER"


class TestEntityOccurrenceCounts:
    def test_fixture_ranking(self, schema, instance):
        from ege.matcher import match_graphs

        g = match_graphs(schema, instance).graph
        ranked = entity_occurrence_counts(g)
        counts = dict(ranked)
        assert ranked[0] == ("ent-cholera", 3)
        assert counts["ent-disease-specialist"] == 1
        # ranking rule: count descending, ties by id ascending
        assert ranked == sorted(ranked, key=lambda kv: (-kv[1], kv[0]))

    def test_no_arguments_all_zero(self):
        g = InstantiatedGraph(
            events={"ev-a": EventNode(id="ev-a", name="A")},
            entities={
                "ent-b": EntityNode("ent-b", "B"),
                "ent-a": EntityNode("ent-a", "A"),
            },
            roots=("ev-a",),
        )
        assert entity_occurrence_counts(g) == [("ent-a", 0), ("ent-b", 0)]

    def test_counts_distinct_events_not_rows(self):
        ents = {"ent-a": EntityNode("ent-a", "A")}
        node = EventNode(
            id="ev-a", name="A",
            arguments=(Argument("agent", "ent-a", 0), Argument("theme", "ent-a", 1)),
        )
        g = InstantiatedGraph(events={"ev-a": node}, entities=ents, roots=("ev-a",))
        assert entity_occurrence_counts(g) == [("ent-a", 1)]

    @pytest.mark.parametrize("seed", range(15))
    def test_matches_brute_force_scan(self, seed):
        rng = random.Random(seed)
        g, _ = random_graph(rng, max_events=8, max_entities=5)
        ranked = entity_occurrence_counts(g)
        assert ranked == occurrence_counts_oracle(g)
        assert sorted(eid for eid, _ in ranked) == sorted(g.entities)

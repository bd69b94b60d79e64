"""Writes the golden files the byte-equality tests pin.

Run after the derived layout/matcher assertions pass:
    python tests/make_goldens.py
"""

from __future__ import annotations

import json
from pathlib import Path

from ege.formats import parse_graph, parse_instance, parse_schema, serialize_graph
from ege.layout import ExpansionState, compute_layout, layout_to_obj
from ege.matcher import match_graphs

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"


def main() -> None:
    GOLDEN.mkdir(exist_ok=True)

    row_graph = parse_graph((FIXTURES / "outbreak_row_graph.json").read_bytes())
    parents = frozenset(ev.id for ev in row_graph.events.values() if ev.children)
    layout = compute_layout(row_graph, ExpansionState(parents))
    data = (json.dumps(layout_to_obj(layout), indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    (GOLDEN / "outbreak_layout.json").write_bytes(data)

    schema = parse_schema((FIXTURES / "outbreak_schema.json").read_bytes())
    instance = parse_instance((FIXTURES / "cholera_instance.json").read_bytes())
    graph = match_graphs(schema, instance).graph
    (GOLDEN / "outbreak_match.json").write_bytes(serialize_graph(graph))

    print("goldens written to", GOLDEN)


if __name__ == "__main__":
    main()

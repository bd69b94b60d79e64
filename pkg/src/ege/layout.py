"""Deterministic positions for the graph panel.

Hierarchy runs down the vertical axis (parents exactly one row above their
children), temporal order runs left to right within each sibling group, and
gates render as one glyph node between their source and members. Pan, zoom
and user dragging are view-state for the client; the engine never stores
coordinates it did not compute.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace

from .model import (
    EngineError,
    GateSpec,
    InstantiatedGraph,
    check_gates,
)

ROW_HEIGHT = 120.0  # vertical units per hierarchy level
SLOT_WIDTH = 160.0  # horizontal units per leaf slot

SHAPE_CIRCLE = "circle"
SHAPE_DIAMOND = "diamond"
GATE_SHAPES = {"AND": "gate-and", "OR": "gate-or", "XOR": "gate-xor"}

EDGE_HIERARCHY = "hierarchy"
EDGE_TEMPORAL = "temporal"
EDGE_GATE = "gate"


@dataclass(frozen=True)
class ExpansionState:
    """Parents whose children are currently rendered."""

    expanded: frozenset[str] = frozenset()

    def is_expanded(self, event_id: str) -> bool:
        return event_id in self.expanded


@dataclass(frozen=True)
class LayoutNode:
    id: str
    x: float
    y: float
    shape: str
    status: str
    dimmed: bool = False


@dataclass(frozen=True)
class LayoutEdge:
    src: str
    dst: str
    kind: str


@dataclass(frozen=True)
class Layout:
    nodes: tuple[LayoutNode, ...]
    edges: tuple[LayoutEdge, ...]
    bounds: tuple[float, float, float, float]  # min x, min y, max x, max y


def _descendants(g: InstantiatedGraph, event_id: str) -> set[str]:
    out: set[str] = set()
    stack = [c for c in g.events[event_id].children if c in g.events]
    while stack:
        node = stack.pop()
        if node in out:
            continue
        out.add(node)
        stack.extend(c for c in g.events[node].children if c in g.events)
    return out


def toggle_expansion(g: InstantiatedGraph, state: ExpansionState, parent_id: str) -> ExpansionState:
    """Flip one parent; collapsing also forgets the expansion of its descendants."""
    node = g.events.get(parent_id)
    if node is None or not node.children:
        raise EngineError("NOT_A_PARENT", parent_id, f"{parent_id!r} is not a parent event")
    if parent_id in state.expanded:
        drop = _descendants(g, parent_id) | {parent_id}
        return ExpansionState(state.expanded - drop)
    return ExpansionState(state.expanded | {parent_id})


def _order_group(g: InstantiatedGraph, members: tuple[str, ...]) -> list[str]:
    """Topological order of the group-restricted temporal relation; ties break
    by position in the stored sibling order, then id."""
    position = {m: i for i, m in enumerate(members)}
    member_set = set(members)
    indegree = {m: 0 for m in members}
    out: dict[str, list[str]] = {m: [] for m in members}
    seen: set[tuple[str, str]] = set()
    for edge in g.temporal:
        if edge.before in member_set and edge.after in member_set:
            key = (edge.before, edge.after)
            if key in seen:
                continue
            seen.add(key)
            out[edge.before].append(edge.after)
            indegree[edge.after] += 1
    heap = [(position[m], m) for m in members if indegree[m] == 0]
    heapq.heapify(heap)
    ordered: list[str] = []
    while heap:
        _, node = heapq.heappop(heap)
        ordered.append(node)
        for nxt in out[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(heap, (position[nxt], nxt))
    if len(ordered) != len(members):
        stuck = sorted(m for m in members if m not in set(ordered))
        raise EngineError("TEMPORAL_CYCLE", stuck[0], "sibling group temporal relation is cyclic: " + ", ".join(stuck))
    return ordered


def compute_layout(
    g: InstantiatedGraph,
    state: ExpansionState | None = None,
    dim: set[str] | frozenset[str] | None = None,
) -> Layout:
    """Positions, shapes and visibility for the rendered part of the graph.

    Raises TEMPORAL_CYCLE when a rendered sibling group cannot be ordered;
    the offending edge must be edited before layout can proceed.
    """
    state = state or ExpansionState()
    expanded = {e for e in state.expanded if e in g.events and g.events[e].children}

    nodes: list[LayoutNode] = []
    coords: dict[str, tuple[float, float]] = {}
    next_slot = 0

    def place(event_id: str, depth: int) -> float:
        nonlocal next_slot
        node = g.events[event_id]
        rendered_children = (
            [c for c in node.children if c in g.events] if event_id in expanded else []
        )
        if rendered_children:
            xs = [place(c, depth + 1) for c in _order_group(g, tuple(rendered_children))]
            x = (min(xs) + max(xs)) / 2.0
        else:
            x = next_slot * SLOT_WIDTH
            next_slot += 1
        coords[event_id] = (x, depth * ROW_HEIGHT)
        return x

    roots = tuple(r for r in g.roots if r in g.events)
    for root in _order_group(g, roots):
        place(root, 0)

    # Emit event nodes in a stable order: depth-first in sibling order.
    emit_order: list[str] = []

    def walk(event_id: str) -> None:
        emit_order.append(event_id)
        if event_id in expanded:
            children = tuple(c for c in g.events[event_id].children if c in g.events)
            for child in _order_group(g, children):
                walk(child)

    for root in _order_group(g, roots):
        walk(root)

    for event_id in emit_order:
        node = g.events[event_id]
        x, y = coords[event_id]
        nodes.append(LayoutNode(
            id=event_id,
            x=x,
            y=y,
            shape=SHAPE_DIAMOND if node.children else SHAPE_CIRCLE,
            status=node.status,
            dimmed=dim is not None and event_id not in dim,
        ))

    edges: list[LayoutEdge] = []
    rendered = set(coords)
    for event_id in emit_order:
        if event_id in expanded:
            for child in g.events[event_id].children:
                if child in rendered:
                    edges.append(LayoutEdge(event_id, child, EDGE_HIERARCHY))
    for edge in g.temporal:
        if edge.before in rendered and edge.after in rendered:
            edges.append(LayoutEdge(edge.before, edge.after, EDGE_TEMPORAL))

    verdicts = {s.gate: s.verdict for s in check_gates(g)} if g.gates else {}
    for gate in g.gates:
        if gate.source not in rendered or any(m not in rendered for m in gate.members):
            continue
        member_xs = [coords[m][0] for m in gate.members]
        member_ys = [coords[m][1] for m in gate.members]
        gx = (min(member_xs) + max(member_xs)) / 2.0
        gy = (coords[gate.source][1] + sum(member_ys) / len(member_ys)) / 2.0
        nodes.append(LayoutNode(
            id=gate.id,
            x=gx,
            y=gy,
            shape=GATE_SHAPES.get(gate.kind, "gate-and"),
            status=verdicts.get(gate.id, ""),
            dimmed=False,
        ))
        edges.append(LayoutEdge(gate.source, gate.id, EDGE_GATE))
        for member in gate.members:
            edges.append(LayoutEdge(gate.id, member, EDGE_GATE))

    if nodes:
        bounds = (
            min(n.x for n in nodes),
            min(n.y for n in nodes),
            max(n.x for n in nodes),
            max(n.y for n in nodes),
        )
    else:
        bounds = (0.0, 0.0, 0.0, 0.0)
    return Layout(nodes=tuple(nodes), edges=tuple(edges), bounds=bounds)


def minimap_view(layout: Layout) -> Layout:
    """Affine rescale into the unit square, preserving aspect ratio and order."""
    if not layout.nodes:
        raise EngineError("EMPTY_LAYOUT", "", "cannot build a minimap of an empty layout")
    min_x, min_y, max_x, max_y = layout.bounds
    width = max_x - min_x
    height = max_y - min_y
    if width == 0 and height == 0:
        nodes = tuple(replace(n, x=0.5, y=0.5) for n in layout.nodes)
        return Layout(nodes=nodes, edges=layout.edges, bounds=(0.0, 0.0, 1.0, 1.0))
    scale = 1.0 / max(width, height)
    nodes = tuple(
        replace(n, x=(n.x - min_x) * scale, y=(n.y - min_y) * scale)
        for n in layout.nodes
    )
    return Layout(nodes=nodes, edges=layout.edges, bounds=(0.0, 0.0, width * scale, height * scale))


def layout_to_obj(layout: Layout) -> dict:
    """JSON-ready form used by the service payload and golden files."""
    return {
        "nodes": [
            {"id": n.id, "x": n.x, "y": n.y, "shape": n.shape, "status": n.status, "dimmed": n.dimmed}
            for n in layout.nodes
        ],
        "edges": [{"from": e.src, "to": e.dst, "kind": e.kind} for e in layout.edges],
        "bounds": list(layout.bounds),
    }


def gate_glyphs(g: InstantiatedGraph) -> dict[str, GateSpec]:
    return {gate.id: gate for gate in g.gates}

/** Pure scene builder: server layout payload + camera -> drawable primitives.
 *
 * Keeping this a data transform (no canvas calls) makes the render testable;
 * canvas.ts does the actual 2D drawing.
 */

import type { Camera } from "./state.js";
import type { GraphView, ViewNode } from "./types.js";

export const NODE_RADIUS = 26;
export const GATE_SIZE = 30;
export const DIMMED_OPACITY = 0.25;

/** Status palette: the engine names the statuses, the palette is ours. */
export const STATUS_COLORS: Record<string, string> = {
  matched: "#2e7d32",
  "source-only": "#1565c0",
  predicted: "#ef6c00",
};

export const VERDICT_COLORS: Record<string, string> = {
  satisfied: "#2e7d32",
  pending: "#9e9e9e",
  violated: "#c62828",
};

export const GATE_LABELS: Record<string, string> = {
  "gate-and": "AND",
  "gate-or": "OR",
  "gate-xor": "XOR",
};

export interface SceneNode {
  id: string;
  x: number;
  y: number;
  shape: ViewNode["shape"];
  label: string;
  fill: string;
  opacity: number;
  selected: boolean;
  isGate: boolean;
  confidence: number | null;
}

export interface SceneEdge {
  fromX: number;
  fromY: number;
  toX: number;
  toY: number;
  kind: "hierarchy" | "temporal" | "gate";
  opacity: number;
}

export interface Scene {
  nodes: SceneNode[];
  edges: SceneEdge[];
  width: number;
  height: number;
}

const MARGIN = 60;

export function toScreen(camera: Camera, x: number, y: number): [number, number] {
  return [(x + MARGIN) * camera.zoom + camera.panX, (y + MARGIN) * camera.zoom + camera.panY];
}

export function buildScene(view: GraphView, camera: Camera, selected: string | null): Scene {
  const positions = new Map<string, [number, number]>();
  const opacity = new Map<string, number>();
  const nodes: SceneNode[] = [];

  for (const node of view.nodes) {
    const [sx, sy] = toScreen(camera, node.x, node.y);
    positions.set(node.id, [sx, sy]);
    const isGate = node.shape.startsWith("gate-");
    const alpha = node.dimmed ? DIMMED_OPACITY : 1;
    opacity.set(node.id, alpha);
    nodes.push({
      id: node.id,
      x: sx,
      y: sy,
      shape: node.shape,
      label: isGate ? GATE_LABELS[node.shape] ?? "GATE" : node.name ?? node.id,
      fill: isGate
        ? VERDICT_COLORS[node.status] ?? "#9e9e9e"
        : STATUS_COLORS[node.status] ?? "#616161",
      opacity: alpha,
      selected: node.id === selected,
      isGate,
      confidence: node.confidence ?? null,
    });
  }

  const edges: SceneEdge[] = [];
  for (const edge of view.edges) {
    const from = positions.get(edge.from);
    const to = positions.get(edge.to);
    if (!from || !to) continue; // payload invariant says this never happens
    edges.push({
      fromX: from[0],
      fromY: from[1],
      toX: to[0],
      toY: to[1],
      kind: edge.kind,
      opacity: Math.min(opacity.get(edge.from) ?? 1, opacity.get(edge.to) ?? 1),
    });
  }

  const [bx0, by0, bx1, by1] = view.bounds;
  const [wx0, wy0] = toScreen(camera, bx0, by0);
  const [wx1, wy1] = toScreen(camera, bx1, by1);
  return {
    nodes,
    edges,
    width: Math.max(wx1 - wx0 + 2 * MARGIN * camera.zoom, 0),
    height: Math.max(wy1 - wy0 + 2 * MARGIN * camera.zoom, 0),
  };
}

/** Topmost node under a screen point, for clicks and hover tooltips. */
export function hitTest(scene: Scene, sx: number, sy: number): SceneNode | null {
  for (let i = scene.nodes.length - 1; i >= 0; i--) {
    const node = scene.nodes[i]!;
    const half = node.isGate ? GATE_SIZE / 2 : NODE_RADIUS;
    if (Math.abs(sx - node.x) <= half && Math.abs(sy - node.y) <= half) {
      return node;
    }
  }
  return null;
}

/** Thin canvas adapter: draws a Scene onto a 2D context.
 * The context is typed structurally so tests can pass a recording stub. */

import { GATE_SIZE, NODE_RADIUS, type Scene, type SceneNode } from "./scene.js";

export interface Draw2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
  globalAlpha: number;
  strokeStyle: string;
  fillStyle: string;
  lineWidth: number;
  font: string;
  textAlign: string;
}

const EDGE_STYLE: Record<string, { color: string; dash: number[] }> = {
  hierarchy: { color: "#90a4ae", dash: [] },
  temporal: { color: "#455a64", dash: [] },
  gate: { color: "#8d6e63", dash: [4, 3] },
};

export function drawScene(ctx: Draw2D, scene: Scene, width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);

  for (const edge of scene.edges) {
    const style = EDGE_STYLE[edge.kind] ?? EDGE_STYLE["temporal"]!;
    ctx.globalAlpha = edge.opacity;
    ctx.strokeStyle = style.color;
    ctx.setLineDash(style.dash);
    ctx.lineWidth = edge.kind === "temporal" ? 2 : 1;
    ctx.beginPath();
    ctx.moveTo(edge.fromX, edge.fromY);
    ctx.lineTo(edge.toX, edge.toY);
    ctx.stroke();
    if (edge.kind === "temporal") drawArrowHead(ctx, edge.fromX, edge.fromY, edge.toX, edge.toY);
  }
  ctx.setLineDash([]);

  for (const node of scene.nodes) {
    ctx.globalAlpha = node.opacity;
    ctx.fillStyle = node.fill;
    ctx.strokeStyle = node.selected ? "#000000" : "#37474f";
    ctx.lineWidth = node.selected ? 3 : 1;
    if (node.isGate) {
      drawGate(ctx, node);
    } else if (node.shape === "diamond") {
      drawDiamond(ctx, node);
    } else {
      ctx.beginPath();
      ctx.arc(node.x, node.y, NODE_RADIUS, 0, Math.PI * 2);
      ctx.fill();
      ctx.stroke();
    }
    ctx.fillStyle = "#212121";
    ctx.textAlign = "center";
    ctx.font = node.isGate ? "10px sans-serif" : "12px sans-serif";
    const labelOffset = node.isGate ? 4 : NODE_RADIUS + 14;
    ctx.fillText(node.label, node.x, node.y + labelOffset);
  }
  ctx.globalAlpha = 1;
}

function drawDiamond(ctx: Draw2D, node: SceneNode): void {
  const r = NODE_RADIUS;
  ctx.beginPath();
  ctx.moveTo(node.x, node.y - r);
  ctx.lineTo(node.x + r, node.y);
  ctx.lineTo(node.x, node.y + r);
  ctx.lineTo(node.x - r, node.y);
  ctx.closePath();
  ctx.fill();
  ctx.stroke();
}

function drawGate(ctx: Draw2D, node: SceneNode): void {
  const half = GATE_SIZE / 2;
  ctx.beginPath();
  ctx.rect(node.x - half, node.y - half, GATE_SIZE, GATE_SIZE);
  ctx.fill();
  ctx.stroke();
}

function drawArrowHead(ctx: Draw2D, x0: number, y0: number, x1: number, y1: number): void {
  const angle = Math.atan2(y1 - y0, x1 - x0);
  const size = 8;
  ctx.beginPath();
  ctx.moveTo(x1, y1);
  ctx.lineTo(x1 - size * Math.cos(angle - 0.4), y1 - size * Math.sin(angle - 0.4));
  ctx.lineTo(x1 - size * Math.cos(angle + 0.4), y1 - size * Math.sin(angle + 0.4));
  ctx.closePath();
  ctx.fill();
}

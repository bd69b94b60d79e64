/** Minimap: the layout squeezed into the unit square, plus the viewport box. */

import type { Camera } from "./state.js";
import type { GraphView } from "./types.js";

export interface MinimapPoint {
  id: string;
  x: number;
  y: number;
}

export interface Minimap {
  points: MinimapPoint[];
  /** extent of the scaled content inside the unit square */
  extentX: number;
  extentY: number;
}

/** Uniform scale into [0,1]^2 preserving aspect ratio; a degenerate layout
 * (single point) centers at (0.5, 0.5). Relative order never changes. */
export function buildMinimap(view: GraphView): Minimap {
  const [minX, minY, maxX, maxY] = view.bounds;
  const width = maxX - minX;
  const height = maxY - minY;
  if (view.nodes.length === 0) {
    return { points: [], extentX: 1, extentY: 1 };
  }
  if (width === 0 && height === 0) {
    return {
      points: view.nodes.map((n) => ({ id: n.id, x: 0.5, y: 0.5 })),
      extentX: 1,
      extentY: 1,
    };
  }
  const scale = 1 / Math.max(width, height);
  return {
    points: view.nodes.map((n) => ({
      id: n.id,
      x: (n.x - minX) * scale,
      y: (n.y - minY) * scale,
    })),
    extentX: width * scale,
    extentY: height * scale,
  };
}

/** Where the main-canvas viewport sits inside the minimap, in unit coords. */
export function viewportRect(
  view: GraphView,
  camera: Camera,
  canvasWidth: number,
  canvasHeight: number,
): { x: number; y: number; w: number; h: number } {
  const [minX, minY, maxX, maxY] = view.bounds;
  const extent = Math.max(maxX - minX, maxY - minY);
  if (extent === 0) return { x: 0, y: 0, w: 1, h: 1 };
  const scale = 1 / extent;
  const worldLeft = -camera.panX / camera.zoom + minX;
  const worldTop = -camera.panY / camera.zoom + minY;
  return {
    x: (worldLeft - minX) * scale,
    y: (worldTop - minY) * scale,
    w: (canvasWidth / camera.zoom) * scale,
    h: (canvasHeight / camera.zoom) * scale,
  };
}

/** Bounding-box editing on image provenance: drag to move, handles to resize.
 * All coordinates are image pixels; results are clamped to the image. */

import type { EditOp } from "./types.js";

export type Bbox = [number, number, number, number]; // x, y, w, h
export type Handle = "nw" | "ne" | "sw" | "se" | "move";

const MIN_EXTENT = 1;

export function clampBbox(box: Bbox, imageWidth: number, imageHeight: number): Bbox {
  let [x, y, w, h] = box;
  w = Math.max(MIN_EXTENT, Math.min(w, imageWidth));
  h = Math.max(MIN_EXTENT, Math.min(h, imageHeight));
  x = Math.max(0, Math.min(x, imageWidth - w));
  y = Math.max(0, Math.min(y, imageHeight - h));
  return [x, y, w, h];
}

/** Apply a drag of (dx, dy) pixels on a handle; corners resize, the body moves. */
export function dragBbox(box: Bbox, handle: Handle, dx: number, dy: number, imageWidth: number, imageHeight: number): Bbox {
  const [x, y, w, h] = box;
  let next: Bbox;
  switch (handle) {
    case "move":
      next = [x + dx, y + dy, w, h];
      break;
    case "nw":
      next = [x + dx, y + dy, w - dx, h - dy];
      break;
    case "ne":
      next = [x, y + dy, w + dx, h - dy];
      break;
    case "sw":
      next = [x + dx, y, w - dx, h + dy];
      break;
    case "se":
      next = [x, y, w + dx, h + dy];
      break;
  }
  if (next[2] < MIN_EXTENT) next[2] = MIN_EXTENT;
  if (next[3] < MIN_EXTENT) next[3] = MIN_EXTENT;
  return clampBbox(next, imageWidth, imageHeight);
}

export function bboxOp(provId: string, box: Bbox): EditOp {
  return { op: "UpdateBoundingBox", id: provId, bbox: box };
}

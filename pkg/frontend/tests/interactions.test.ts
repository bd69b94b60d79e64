import { describe, expect, it } from "vitest";

import { applyPermutation, reorderOp, reorderPermutation } from "../src/argtable.js";
import { clampBbox, dragBbox } from "../src/bbox.js";
import type { ArgumentRow } from "../src/types.js";

describe("argument reorder", () => {
  it("drag down shifts the block between", () => {
    expect(reorderPermutation(4, 0, 2)).toEqual([1, 2, 0, 3]);
  });

  it("drag up shifts the block down", () => {
    expect(reorderPermutation(4, 3, 1)).toEqual([0, 3, 1, 2]);
  });

  it("single-row table permits only the identity", () => {
    expect(reorderPermutation(1, 0, 0)).toEqual([0]);
  });

  it("out-of-range drags are refused", () => {
    expect(() => reorderPermutation(3, 3, 0)).toThrow(RangeError);
    expect(() => reorderPermutation(3, 0, -1)).toThrow(RangeError);
  });

  it("builds the wire op", () => {
    expect(reorderOp("ev-x", 3, 2, 0)).toEqual({ op: "ReorderArguments", id: "ev-x", new_order: [2, 0, 1] });
  });

  it("applyPermutation mirrors the server's row order", () => {
    const rows: ArgumentRow[] = [
      { role: "theme", order: 0, entity: { id: "e1", name: "One", wd_qnode: null } },
      { role: "topic", order: 1, entity: { id: "e2", name: "Two", wd_qnode: null } },
      { role: "agent", order: 2, entity: { id: "e3", name: "Three", wd_qnode: null } },
    ];
    const moved = applyPermutation(rows, reorderPermutation(3, 2, 0));
    expect(moved.map((r) => r.entity.id)).toEqual(["e3", "e1", "e2"]);
    expect(moved.map((r) => r.order)).toEqual([0, 1, 2]);
  });
});

describe("bounding box editing", () => {
  it("clamps to the image and enforces positive extent", () => {
    expect(clampBbox([-10, -10, 50, 50], 100, 100)).toEqual([0, 0, 50, 50]);
    expect(clampBbox([80, 80, 50, 50], 100, 100)).toEqual([50, 50, 50, 50]);
    expect(clampBbox([10, 10, 0, 0], 100, 100)).toEqual([10, 10, 1, 1]);
  });

  it("corner handles resize", () => {
    expect(dragBbox([10, 10, 40, 40], "se", 20, 10, 200, 200)).toEqual([10, 10, 60, 50]);
    expect(dragBbox([10, 10, 40, 40], "nw", 5, 5, 200, 200)).toEqual([15, 15, 35, 35]);
    expect(dragBbox([10, 10, 40, 40], "ne", 10, -5, 200, 200)).toEqual([10, 5, 50, 45]);
    expect(dragBbox([10, 10, 40, 40], "sw", -5, 10, 200, 200)).toEqual([5, 10, 45, 50]);
  });

  it("moving never resizes", () => {
    const moved = dragBbox([10, 10, 40, 40], "move", 500, 500, 200, 200);
    expect(moved[2]).toBe(40);
    expect(moved[3]).toBe(40);
    expect(moved[0] + moved[2]).toBeLessThanOrEqual(200);
    expect(moved[1] + moved[3]).toBeLessThanOrEqual(200);
  });

  it("shrinking past zero pins at the minimum extent", () => {
    const shrunk = dragBbox([10, 10, 40, 40], "se", -100, -100, 200, 200);
    expect(shrunk[2]).toBe(1);
    expect(shrunk[3]).toBe(1);
  });
});

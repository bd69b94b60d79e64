/** Argument-table interactions: drag reorder and add/remove rows. */

import type { ArgumentRow, EditOp } from "./types.js";

/** Permutation for ReorderArguments after dragging a row to a new position:
 * new_order[k] = index (in the current display order) of the row that ends
 * up at position k. */
export function reorderPermutation(rowCount: number, fromIndex: number, toIndex: number): number[] {
  if (fromIndex < 0 || fromIndex >= rowCount || toIndex < 0 || toIndex >= rowCount) {
    throw new RangeError(`drag ${fromIndex} -> ${toIndex} outside 0..${rowCount - 1}`);
  }
  const order = Array.from({ length: rowCount }, (_, i) => i);
  const [moved] = order.splice(fromIndex, 1);
  order.splice(toIndex, 0, moved!);
  return order;
}

export function reorderOp(eventId: string, rowCount: number, fromIndex: number, toIndex: number): EditOp {
  return { op: "ReorderArguments", id: eventId, new_order: reorderPermutation(rowCount, fromIndex, toIndex) };
}

export function addArgumentOp(eventId: string, role: string, entityId: string): EditOp {
  return { op: "AddArgument", id: eventId, role, entity: entityId };
}

export function removeArgumentOp(eventId: string, row: ArgumentRow): EditOp {
  return { op: "RemoveArgument", id: eventId, role: row.role, entity: row.entity.id };
}

/** Local optimistic version of a reorder, for immediate feedback. */
export function applyPermutation(rows: ArgumentRow[], permutation: number[]): ArgumentRow[] {
  if (permutation.length !== rows.length) {
    throw new RangeError("permutation length must match the row count");
  }
  return permutation.map((oldIndex, newIndex) => {
    const row = rows[oldIndex];
    if (row === undefined) throw new RangeError(`index ${oldIndex} out of range`);
    return { ...row, order: newIndex };
  });
}

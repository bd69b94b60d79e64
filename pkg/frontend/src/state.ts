/** Workbench view-state: camera, expansion mirror, filters, selection, panels.
 *
 * The store never owns graph data: it caches the latest server responses and
 * refetches after every committed mutation, so a full reload from the API
 * always reproduces the same visible state.
 */

import { ApiClient, ApiFailure } from "./api.js";
import type { ApiError, EditOp, EventInfo, GraphView, ProvenancePayload } from "./types.js";

export type PanelId = "graph" | "information" | "entities" | "minimap" | "provenance" | "source";

/** Panels open from their immediate parent panel; the graph panel is the root. */
export const PANEL_PARENT: Record<PanelId, PanelId | null> = {
  graph: null,
  information: "graph",
  entities: "graph",
  minimap: "graph",
  provenance: "information",
  source: "provenance",
};

export interface Camera {
  panX: number;
  panY: number;
  zoom: number;
}

export interface Filters {
  entity?: string;
  lo?: number;
  hi?: number;
}

export interface Toast {
  kind: "error" | "info";
  text: string;
}

export class PanelViolation extends Error {}

export class Workbench {
  readonly api: ApiClient;
  sessionId = "";
  revision = -1;
  cursor = 0;
  head = 0;

  camera: Camera = { panX: 0, panY: 0, zoom: 1 };
  expanded = new Set<string>();
  filters: Filters = {};
  selected: string | null = null;
  openPanels = new Set<PanelId>(["graph"]);

  view: GraphView | null = null;
  selectedInfo: EventInfo | null = null;
  openProvenanceId: string | null = null;
  provenancePayload: ProvenancePayload | null = null;
  toasts: Toast[] = [];

  /** at most one in-flight edit batch per session */
  private editChain: Promise<unknown> = Promise.resolve();

  constructor(api: ApiClient) {
    this.api = api;
  }

  // -- panels ---------------------------------------------------------------

  openPanel(panel: PanelId): void {
    const parent = PANEL_PARENT[panel];
    if (parent !== null && !this.openPanels.has(parent)) {
      throw new PanelViolation(`panel ${panel} opens from ${parent}, which is closed`);
    }
    this.openPanels.add(panel);
  }

  closePanel(panel: PanelId): void {
    if (panel === "graph") return; // the root panel never closes
    const doomed = new Set<PanelId>([panel]);
    let grew = true;
    while (grew) {
      grew = false;
      for (const id of Object.keys(PANEL_PARENT) as PanelId[]) {
        const parent = PANEL_PARENT[id];
        if (parent !== null && doomed.has(parent) && !doomed.has(id) && this.openPanels.has(id)) {
          doomed.add(id);
          grew = true;
        }
      }
    }
    for (const id of doomed) this.openPanels.delete(id);
    if (doomed.has("information")) {
      this.selected = null;
      this.selectedInfo = null;
    }
    if (doomed.has("provenance")) {
      this.openProvenanceId = null;
      this.provenancePayload = null;
    }
  }

  /** Every open panel must have its parent open; the graph panel is always up. */
  panelHierarchyHolds(): boolean {
    if (!this.openPanels.has("graph")) return false;
    for (const id of this.openPanels) {
      const parent = PANEL_PARENT[id];
      if (parent !== null && !this.openPanels.has(parent)) return false;
    }
    return true;
  }

  // -- session lifecycle ------------------------------------------------------

  async createSession(documents: { schema: string; instance: string; corpus: string; tau?: number }) {
    const created = await this.api.createSession(documents);
    this.sessionId = created.session_id;
    this.revision = created.revision;
    await this.refresh();
    return created;
  }

  /** Re-fetch everything the open panels display, in panel order. */
  async refresh(): Promise<void> {
    const info = await this.api.sessionInfo(this.sessionId);
    this.revision = info.revision;
    this.cursor = info.cursor;
    this.head = info.head;
    this.view = await this.api.graph(this.sessionId, {
      expanded: [...this.expanded],
      entity: this.filters.entity,
      lo: this.filters.lo,
      hi: this.filters.hi,
    });
    // drop expansion entries for events that no longer exist or are leaves now
    const present = new Set(this.view.nodes.map((n) => n.id));
    for (const id of [...this.expanded]) {
      if (!present.has(id)) this.expanded.delete(id);
    }
    if (this.selected !== null && this.openPanels.has("information")) {
      try {
        this.selectedInfo = await this.api.eventInfo(this.sessionId, this.selected);
      } catch (failure) {
        if (failure instanceof ApiFailure && failure.status === 404) {
          this.closePanel("information");
        } else {
          throw failure;
        }
      }
    }
    if (this.openProvenanceId !== null && this.openPanels.has("provenance")) {
      this.provenancePayload = await this.api.provenance(this.sessionId, this.openProvenanceId);
    }
  }

  // -- navigation -------------------------------------------------------------

  async toggleExpand(eventId: string): Promise<void> {
    if (this.expanded.has(eventId)) {
      this.expanded.delete(eventId);
    } else {
      this.expanded.add(eventId);
    }
    await this.refresh();
  }

  async select(eventId: string): Promise<void> {
    this.selected = eventId;
    this.openPanel("information");
    this.selectedInfo = await this.api.eventInfo(this.sessionId, eventId);
  }

  async openProvenance(provId: string): Promise<void> {
    this.openPanel("provenance");
    this.openProvenanceId = provId;
    this.provenancePayload = await this.api.provenance(this.sessionId, provId);
  }

  async openSourceDocument(): Promise<{ docId: string }> {
    this.openPanel("source");
    if (this.provenancePayload === null) throw new PanelViolation("no provenance loaded");
    return { docId: this.provenancePayload.doc_id };
  }

  async setEntityFilter(entityId: string | undefined): Promise<void> {
    this.filters.entity = entityId;
    await this.refresh();
  }

  async setConfidenceFilter(lo: number | undefined, hi: number | undefined): Promise<void> {
    this.filters.lo = lo;
    this.filters.hi = hi;
    await this.refresh();
  }

  pan(dx: number, dy: number): void {
    this.camera.panX += dx;
    this.camera.panY += dy;
  }

  zoomBy(factor: number): void {
    this.camera.zoom = Math.min(8, Math.max(0.125, this.camera.zoom * factor));
  }

  // -- edits --------------------------------------------------------------------

  toast(kind: Toast["kind"], text: string): void {
    this.toasts.push({ kind, text });
  }

  /** Optimistic edit: apply a local patch immediately, POST the ops, then
   * reconcile against the server revision; roll back and toast on rejection. */
  submitEdits(ops: EditOp[], optimistic?: { apply: () => void; rollback: () => void }): Promise<boolean> {
    const run = async (): Promise<boolean> => {
      optimistic?.apply();
      try {
        const result = await this.api.postEdits(this.sessionId, ops);
        this.revision = result.revision;
        this.cursor = result.cursor;
        this.head = result.head;
        await this.refresh();
        return true;
      } catch (failure) {
        optimistic?.rollback();
        if (failure instanceof ApiFailure) {
          for (const err of failure.errors.length > 0 ? failure.errors : defaultErrors(failure)) {
            this.toast("error", `${err.code}: ${err.message}`);
          }
          return false;
        }
        throw failure;
      }
    };
    const outcome = this.editChain.then(run, run);
    this.editChain = outcome;
    return outcome;
  }

  async undo(): Promise<boolean> {
    return this.historyMove(() => this.api.undo(this.sessionId));
  }

  async redo(): Promise<boolean> {
    return this.historyMove(() => this.api.redo(this.sessionId));
  }

  private async historyMove(call: () => Promise<{ revision: number; cursor: number; head: number }>): Promise<boolean> {
    try {
      const result = await call();
      this.revision = result.revision;
      this.cursor = result.cursor;
      this.head = result.head;
      await this.refresh();
      return true;
    } catch (failure) {
      if (failure instanceof ApiFailure) {
        for (const err of failure.errors) this.toast("error", `${err.code}: ${err.message}`);
        return false;
      }
      throw failure;
    }
  }
}

function defaultErrors(failure: ApiFailure): ApiError[] {
  return [{ code: `HTTP_${failure.status}`, subject: "", message: failure.message }];
}

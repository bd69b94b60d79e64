/** Browser bootstrap: wires the workbench store to the DOM.
 * Everything interesting lives in the imported modules; this file only
 * translates DOM events into store calls and repaints after each change. */

import { ApiClient } from "./api.js";
import { addArgumentOp, removeArgumentOp, reorderOp } from "./argtable.js";
import { bboxOp, dragBbox, type Bbox, type Handle } from "./bbox.js";
import { drawScene, type Draw2D } from "./canvas.js";
import { buildMinimap } from "./minimap.js";
import { buildScene, hitTest, type Scene } from "./scene.js";
import { Workbench } from "./state.js";
import type { ImageProvenancePayload } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

export function startApp(baseUrl: string = ""): Workbench {
  const store = new Workbench(new ApiClient(baseUrl || window.location.origin));
  const canvas = el<HTMLCanvasElement>("graph-canvas");
  const ctx = canvas.getContext("2d") as unknown as Draw2D;
  const tooltip = el<HTMLDivElement>("tooltip");
  let scene: Scene | null = null;
  let dragging = false;
  let lastX = 0;
  let lastY = 0;

  function repaint(): void {
    if (!store.view) return;
    scene = buildScene(store.view, store.camera, store.selected);
    drawScene(ctx, scene, canvas.width, canvas.height);
    paintMinimap();
    paintInfoPanel();
    paintEntities();
    paintProvenance();
    paintToasts();
    el<HTMLSpanElement>("revision").textContent = `rev ${store.revision}`;
  }

  function paintMinimap(): void {
    if (!store.view || !store.openPanels.has("minimap")) return;
    const mini = el<HTMLCanvasElement>("minimap-canvas");
    const mctx = mini.getContext("2d")!;
    mctx.clearRect(0, 0, mini.width, mini.height);
    for (const point of buildMinimap(store.view).points) {
      mctx.fillStyle = "#546e7a";
      mctx.fillRect(point.x * mini.width - 1, point.y * mini.height - 1, 3, 3);
    }
  }

  function paintInfoPanel(): void {
    const panel = el<HTMLDivElement>("info-panel");
    panel.hidden = !store.openPanels.has("information");
    const info = store.selectedInfo;
    if (panel.hidden || !info) return;
    el<HTMLHeadingElement>("info-name").textContent = info.name;
    el<HTMLParagraphElement>("info-description").textContent = info.description;
    el<HTMLParagraphElement>("info-type").textContent =
      `${info.event_type.name || info.event_type.qnode} · ${info.status} · ${info.confidence.toFixed(2)}`;
    const table = el<HTMLTableSectionElement>("argument-rows");
    table.replaceChildren();
    info.arguments.forEach((row, index) => {
      const tr = document.createElement("tr");
      tr.draggable = true;
      tr.dataset.index = String(index);
      const role = document.createElement("td");
      role.textContent = row.role;
      const entity = document.createElement("td");
      entity.textContent = row.entity.name;
      entity.addEventListener("click", () => {
        void store.setEntityFilter(row.entity.id).then(repaint);
      });
      const remove = document.createElement("td");
      remove.textContent = "×";
      remove.addEventListener("click", () => {
        void store.submitEdits([removeArgumentOp(info.id, row)]).then(repaint);
      });
      tr.append(role, entity, remove);
      tr.addEventListener("dragstart", (event) => {
        event.dataTransfer?.setData("text/plain", String(index));
      });
      tr.addEventListener("drop", (event) => {
        event.preventDefault();
        const from = Number(event.dataTransfer?.getData("text/plain"));
        if (Number.isInteger(from) && from !== index) {
          void store.submitEdits([reorderOp(info.id, info.arguments.length, from, index)]).then(repaint);
        }
      });
      tr.addEventListener("dragover", (event) => event.preventDefault());
      table.append(tr);
    });
  }

  function paintEntities(): void {
    const list = el<HTMLUListElement>("entity-list");
    if (!store.openPanels.has("entities")) return;
    void store.api.entities(store.sessionId).then((ranked) => {
      list.replaceChildren();
      for (const entity of ranked.entities) {
        const item = document.createElement("li");
        item.textContent = `${entity.name} (${entity.count})`;
        item.addEventListener("click", () => {
          void store.setEntityFilter(entity.id).then(repaint);
        });
        list.append(item);
      }
    });
  }

  function paintProvenance(): void {
    const panel = el<HTMLDivElement>("provenance-panel");
    panel.hidden = !store.openPanels.has("provenance");
    const payload = store.provenancePayload;
    if (panel.hidden || !payload) return;
    const body = el<HTMLDivElement>("provenance-body");
    body.replaceChildren();
    if (payload.kind === "text") {
      const quote = document.createElement("blockquote");
      quote.textContent = payload.text;
      body.append(quote);
    } else {
      body.append(renderBboxEditor(payload));
    }
  }

  function renderBboxEditor(payload: ImageProvenancePayload): HTMLElement {
    const wrapper = document.createElement("div");
    wrapper.className = "bbox-editor";
    const box = document.createElement("div");
    box.className = "bbox";
    const scale = 240 / payload.width;
    const place = (b: Bbox) => {
      box.style.left = `${b[0] * scale}px`;
      box.style.top = `${b[1] * scale}px`;
      box.style.width = `${b[2] * scale}px`;
      box.style.height = `${b[3] * scale}px`;
    };
    place(payload.bbox);
    let current: Bbox = [...payload.bbox];
    for (const handle of ["nw", "ne", "sw", "se", "move"] as Handle[]) {
      const grip = document.createElement("span");
      grip.className = `grip grip-${handle}`;
      grip.addEventListener("pointerdown", (down) => {
        const startX = down.clientX;
        const startY = down.clientY;
        const origin: Bbox = [...current];
        const onMove = (move: PointerEvent) => {
          current = dragBbox(
            origin, handle,
            (move.clientX - startX) / scale, (move.clientY - startY) / scale,
            payload.width, payload.height,
          );
          place(current);
        };
        const onUp = () => {
          window.removeEventListener("pointermove", onMove);
          window.removeEventListener("pointerup", onUp);
          void store.submitEdits([bboxOp(payload.id, current)]).then(repaint);
        };
        window.addEventListener("pointermove", onMove);
        window.addEventListener("pointerup", onUp);
      });
      box.append(grip);
    }
    wrapper.append(box);
    const trace = document.createElement("button");
    trace.textContent = "open source document";
    trace.addEventListener("click", () => {
      void store.openSourceDocument().then(({ docId }) =>
        store.api.document(store.sessionId, docId).then((doc) => {
          el<HTMLDivElement>("source-panel").hidden = false;
          el<HTMLPreElement>("source-text").textContent = doc.text;
        }),
      );
    });
    wrapper.append(trace);
    return wrapper;
  }

  function paintToasts(): void {
    const host = el<HTMLDivElement>("toasts");
    host.replaceChildren();
    for (const toast of store.toasts.slice(-3)) {
      const div = document.createElement("div");
      div.className = `toast toast-${toast.kind}`;
      div.textContent = toast.text;
      host.append(div);
    }
  }

  canvas.addEventListener("pointerdown", (event) => {
    dragging = true;
    lastX = event.clientX;
    lastY = event.clientY;
  });
  canvas.addEventListener("pointermove", (event) => {
    if (dragging) {
      store.pan(event.clientX - lastX, event.clientY - lastY);
      lastX = event.clientX;
      lastY = event.clientY;
      repaint();
      return;
    }
    if (!scene) return;
    const hit = hitTest(scene, event.offsetX, event.offsetY);
    if (hit && !hit.isGate) {
      tooltip.hidden = false;
      tooltip.style.left = `${event.clientX + 12}px`;
      tooltip.style.top = `${event.clientY + 12}px`;
      tooltip.textContent = hit.label;
      void store.api.eventInfo(store.sessionId, hit.id).then((info) => {
        tooltip.textContent = info.description || info.name;
      });
    } else {
      tooltip.hidden = true;
    }
  });
  window.addEventListener("pointerup", () => {
    dragging = false;
  });
  canvas.addEventListener("wheel", (event) => {
    event.preventDefault();
    store.zoomBy(event.deltaY < 0 ? 1.1 : 1 / 1.1);
    repaint();
  });
  canvas.addEventListener("dblclick", (event) => {
    if (!scene) return;
    const hit = hitTest(scene, event.offsetX, event.offsetY);
    if (hit && hit.shape === "diamond") {
      void store.toggleExpand(hit.id).then(repaint);
    }
  });
  canvas.addEventListener("click", (event) => {
    if (!scene) return;
    const hit = hitTest(scene, event.offsetX, event.offsetY);
    if (hit && !hit.isGate) {
      void store.select(hit.id).then(repaint);
    }
  });

  el<HTMLButtonElement>("undo-button").addEventListener("click", () => {
    void store.undo().then(repaint);
  });
  el<HTMLButtonElement>("redo-button").addEventListener("click", () => {
    void store.redo().then(repaint);
  });
  el<HTMLButtonElement>("clear-filters").addEventListener("click", () => {
    void store.setEntityFilter(undefined)
      .then(() => store.setConfidenceFilter(undefined, undefined))
      .then(repaint);
  });
  el<HTMLInputElement>("confidence-lo").addEventListener("change", applyConfidence);
  el<HTMLInputElement>("confidence-hi").addEventListener("change", applyConfidence);
  function applyConfidence(): void {
    const lo = Number(el<HTMLInputElement>("confidence-lo").value);
    const hi = Number(el<HTMLInputElement>("confidence-hi").value);
    void store.setConfidenceFilter(lo, hi).then(repaint);
  }

  el<HTMLFormElement>("session-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const read = (id: string) => (el<HTMLTextAreaElement>(id)).value;
    void store
      .createSession({ schema: read("schema-input"), instance: read("instance-input"), corpus: read("corpus-input") })
      .then(() => {
        store.openPanel("entities");
        store.openPanel("minimap");
        repaint();
      })
      .catch((failure) => {
        store.toast("error", String(failure));
        paintToasts();
      });
  });

  return store;
}

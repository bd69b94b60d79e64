/** Wire types mirroring the session service payloads. */

export type NodeShape = "circle" | "diamond" | "gate-and" | "gate-or" | "gate-xor";
export type EdgeKind = "hierarchy" | "temporal" | "gate";
export type EventStatus = "matched" | "source-only" | "predicted";

export interface ViewNode {
  id: string;
  x: number;
  y: number;
  shape: NodeShape;
  /** event status, or the gate verdict for glyph nodes */
  status: string;
  dimmed: boolean;
  name?: string;
  confidence?: number;
}

export interface ViewEdge {
  from: string;
  to: string;
  kind: EdgeKind;
}

export interface GraphView {
  revision: number;
  nodes: ViewNode[];
  edges: ViewEdge[];
  bounds: [number, number, number, number];
}

export interface ArgumentRow {
  role: string;
  order: number;
  entity: { id: string; name: string; wd_qnode: string | null };
}

export interface EventInfo {
  id: string;
  name: string;
  description: string;
  event_type: { qnode: string; name: string };
  status: EventStatus;
  confidence: number;
  schema_ref: string | null;
  decision: string;
  arguments: ArgumentRow[];
  provenance: string[];
  revision: number;
}

export interface EntityRank {
  id: string;
  name: string;
  wd_qnode: string | null;
  count: number;
}

export interface TextProvenancePayload {
  kind: "text";
  id: string;
  doc_id: string;
  title: string;
  start: number;
  end: number;
  text: string;
  revision: number;
}

export interface ImageProvenancePayload {
  kind: "image";
  id: string;
  image_id: string;
  media: string;
  bbox: [number, number, number, number];
  width: number;
  height: number;
  doc_id: string;
  title: string;
  revision: number;
}

export type ProvenancePayload = TextProvenancePayload | ImageProvenancePayload;

export interface ContextPayload {
  doc_id: string;
  start: number;
  end: number;
  text: string;
  revision: number;
}

export interface DocumentPayload {
  doc_id: string;
  title: string;
  text: string;
  images: { image_id: string; media: string; width: number; height: number }[];
  revision: number;
}

export interface SessionSummary {
  events: number;
  matched: number;
  source_only: number;
  predicted: number;
  entities: number;
  match_pairs: number;
}

export interface SessionInfo {
  session_id: string;
  revision: number;
  cursor: number;
  head: number;
  summary: SessionSummary;
}

export interface ApiError {
  code: string;
  subject: string;
  message: string;
}

export interface MutationResult {
  revision: number;
  cursor: number;
  head: number;
}

/** Tagged edit operations, exactly as the service accepts them. */
export type EditOp =
  | { op: "UpdateEventFields"; id: string; name?: string; description?: string; event_type?: { qnode: string; name: string } }
  | { op: "ReorderArguments"; id: string; new_order: number[] }
  | { op: "AddArgument"; id: string; role: string; entity: string; order?: number }
  | { op: "RemoveArgument"; id: string; role: string; entity: string }
  | { op: "AddTemporalEdge"; before: string; after: string }
  | { op: "RemoveTemporalEdge"; before: string; after: string }
  | { op: "ReverseTemporalEdge"; before: string; after: string }
  | { op: "SetGate"; gate: { id: string; source: string; kind: string; members: string[]; placement: string } }
  | { op: "RemoveGate"; gate: string }
  | { op: "ReparentEvent"; id: string; new_parent: string | null; index?: number }
  | { op: "DeleteEvent"; id: string }
  | { op: "MergeEntities"; keep: string; drop: string }
  | { op: "UpdateTextSpan"; id: string; start: number; end: number }
  | { op: "UpdateBoundingBox"; id: string; bbox: [number, number, number, number] };

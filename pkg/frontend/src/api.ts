/** Typed client for the session service. All network access goes through here. */

import type {
  ApiError,
  ContextPayload,
  DocumentPayload,
  EditOp,
  EntityRank,
  EventInfo,
  GraphView,
  MutationResult,
  ProvenancePayload,
  SessionInfo,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiFailure extends Error {
  readonly status: number;
  readonly errors: ApiError[];
  readonly failedIndex: number | null;

  constructor(status: number, errors: ApiError[], failedIndex: number | null = null) {
    super(errors.map((e) => `${e.code}: ${e.message}`).join("; ") || `HTTP ${status}`);
    this.status = status;
    this.errors = errors;
    this.failedIndex = failedIndex;
  }
}

export interface ViewQuery {
  expanded?: string[];
  entity?: string;
  lo?: number;
  hi?: number;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const text = await response.text();
    let body: unknown = null;
    try {
      body = text ? JSON.parse(text) : null;
    } catch {
      body = null;
    }
    if (!response.ok) {
      const payload = (body ?? {}) as { errors?: ApiError[]; failed_index?: number };
      throw new ApiFailure(response.status, payload.errors ?? [], payload.failed_index ?? null);
    }
    return body as T;
  }

  private post<T>(path: string, payload?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: payload === undefined ? "{}" : JSON.stringify(payload),
    });
  }

  createSession(documents: { schema: string; instance: string; corpus: string; tau?: number }) {
    return this.post<{ session_id: string; revision: number; summary: SessionInfo["summary"] }>(
      "/sessions", documents,
    );
  }

  sessionInfo(sid: string): Promise<SessionInfo> {
    return this.request(`/sessions/${sid}`);
  }

  graph(sid: string, query: ViewQuery = {}): Promise<GraphView> {
    const params = new URLSearchParams();
    if (query.expanded && query.expanded.length > 0) params.set("expanded", [...query.expanded].sort().join(","));
    if (query.entity !== undefined) params.set("entity", query.entity);
    if (query.lo !== undefined) params.set("lo", String(query.lo));
    if (query.hi !== undefined) params.set("hi", String(query.hi));
    const suffix = params.size > 0 ? `?${params.toString()}` : "";
    return this.request(`/sessions/${sid}/graph${suffix}`);
  }

  eventInfo(sid: string, eventId: string): Promise<EventInfo> {
    return this.request(`/sessions/${sid}/events/${encodeURIComponent(eventId)}`);
  }

  entities(sid: string): Promise<{ entities: EntityRank[]; revision: number }> {
    return this.request(`/sessions/${sid}/entities`);
  }

  provenance(sid: string, provId: string): Promise<ProvenancePayload> {
    return this.request(`/sessions/${sid}/provenance/${encodeURIComponent(provId)}`);
  }

  provenanceContext(sid: string, provId: string): Promise<ContextPayload> {
    return this.request(`/sessions/${sid}/provenance/${encodeURIComponent(provId)}/context`);
  }

  document(sid: string, docId: string): Promise<DocumentPayload> {
    return this.request(`/sessions/${sid}/documents/${encodeURIComponent(docId)}`);
  }

  filterByEntity(sid: string, entityId: string): Promise<{ events: string[]; revision: number }> {
    return this.request(`/sessions/${sid}/filter/entity/${encodeURIComponent(entityId)}`);
  }

  filterByConfidence(sid: string, lo: number, hi: number): Promise<{ events: string[]; revision: number }> {
    return this.request(`/sessions/${sid}/filter/confidence?lo=${lo}&hi=${hi}`);
  }

  postEdits(sid: string, ops: EditOp[]): Promise<MutationResult> {
    return this.post(`/sessions/${sid}/edits`, { ops });
  }

  undo(sid: string): Promise<MutationResult> {
    return this.post(`/sessions/${sid}/undo`);
  }

  redo(sid: string): Promise<MutationResult> {
    return this.post(`/sessions/${sid}/redo`);
  }

  export(sid: string): Promise<string> {
    return this.fetchImpl(`${this.baseUrl}/sessions/${sid}/export`).then((r) => r.text());
  }
}

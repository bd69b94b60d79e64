/** A scriptable fetch stub: route table of method+path prefix -> handler. */

import type { FetchLike } from "../src/api.js";

export interface Route {
  method: string;
  path: string | RegExp;
  handler: (url: URL, body: unknown) => { status?: number; body: unknown };
}

export function fakeFetch(routes: Route[], log: string[] = []): FetchLike {
  return async (rawUrl, init) => {
    const url = new URL(rawUrl, "http://fake");
    const method = (init?.method ?? "GET").toUpperCase();
    log.push(`${method} ${url.pathname}${url.search}`);
    for (const route of routes) {
      const matches =
        route.method === method &&
        (typeof route.path === "string" ? url.pathname === route.path : route.path.test(url.pathname));
      if (matches) {
        const body = init?.body ? JSON.parse(String(init.body)) : null;
        const result = route.handler(url, body);
        return new Response(JSON.stringify(result.body), {
          status: result.status ?? 200,
          headers: { "Content-Type": "application/json" },
        });
      }
    }
    return new Response(JSON.stringify({ errors: [{ code: "UNKNOWN_ROUTE", subject: url.pathname, message: "no route" }] }), {
      status: 404,
      headers: { "Content-Type": "application/json" },
    });
  };
}

export function graphViewFixture() {
  return {
    revision: 0,
    nodes: [
      { id: "root", x: 480, y: 0, shape: "diamond", status: "matched", dimmed: false, name: "Root", confidence: 1.0 },
      { id: "a", x: 0, y: 120, shape: "circle", status: "matched", dimmed: false, name: "Alpha", confidence: 1.0 },
      { id: "b", x: 160, y: 120, shape: "circle", status: "predicted", dimmed: true, name: "Beta", confidence: 0.2 },
      { id: "gate:root", x: 80, y: 60, shape: "gate-or", status: "satisfied", dimmed: false },
    ],
    edges: [
      { from: "root", to: "a", kind: "hierarchy" },
      { from: "a", to: "b", kind: "temporal" },
      { from: "root", to: "gate:root", kind: "gate" },
    ],
    bounds: [0, 0, 480, 120],
  };
}

import type { ApiResult, Card } from "../src/types.js";

export function card(caseId: number, overrides: Partial<Card> = {}): Card {
  return {
    case_id: caseId,
    title: `Case ${caseId}`,
    score: 0.1 + caseId / 100,
    snippet: `Snippet for case ${caseId}.`,
    best_aspect: "form",
    best_asset: null,
    aspect_tags: ["form", "style"],
    ...overrides,
  };
}

export function apiResult(
  order: number[],
  overrides: Partial<ApiResult> = {},
): ApiResult {
  return {
    session_id: "sess-1",
    cards: order.map((id) => card(id)),
    liked: [],
    weights: null,
    ...overrides,
  };
}

export function gridOrder(root: HTMLElement): number[] {
  return [...root.querySelectorAll<HTMLElement>(".results .card")].map((el) =>
    Number(el.dataset.caseId),
  );
}

export function railOrder(root: HTMLElement): number[] {
  return [...root.querySelectorAll<HTMLElement>(".liked-rail .liked-card")].map((el) =>
    Number(el.dataset.caseId),
  );
}

type Responder = (init?: RequestInit) => unknown | Promise<unknown>;

/**
 * Stub global fetch with a route table: "METHOD /path" -> payload or
 * responder. Records every call for assertions.
 */
export function stubFetch(routes: Record<string, unknown | Responder>) {
  const calls: { method: string; path: string; body: unknown }[] = [];
  const impl = async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = typeof input === "string" ? input : input.toString();
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const method = (init?.method ?? "GET").toUpperCase();
    let parsedBody: unknown = null;
    if (typeof init?.body === "string") {
      try {
        parsedBody = JSON.parse(init.body);
      } catch {
        parsedBody = init.body;
      }
    } else if (init?.body instanceof FormData) {
      parsedBody = init.body;
    }
    calls.push({ method, path, body: parsedBody });
    const key = `${method} ${path}`;
    const route = routes[key];
    if (route === undefined) {
      return new Response(JSON.stringify({ error: `no stub for ${key}` }), {
        status: 404,
        headers: { "Content-Type": "application/json" },
      });
    }
    const payload = typeof route === "function" ? await (route as Responder)(init) : route;
    if (payload instanceof Response) return payload;
    return new Response(JSON.stringify(payload), {
      status: 200,
      headers: { "Content-Type": "application/json" },
    });
  };
  globalThis.fetch = impl as typeof fetch;
  return calls;
}

export function mutationCalls(calls: { method: string; path: string }[]): string[] {
  return calls
    .filter(
      (c) =>
        c.method === "DELETE" ||
        (c.method === "POST" && /\/session\/[^/]+\/(weights|like)/.test(c.path)),
    )
    .map((c) => `${c.method} ${c.path}`);
}

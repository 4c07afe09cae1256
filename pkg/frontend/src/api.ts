import type { ApiResult, CaseDetail } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

/**
 * Typed client for /api/v1. Mutations (weights, like, unlike) are queued so
 * at most one is in flight per session; reads go out immediately.
 */
export class ApiClient {
  private mutationChain: Promise<unknown> = Promise.resolve();

  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.baseUrl + path, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const message =
        typeof body === "object" && body !== null && "error" in body
          ? String((body as { error: unknown }).error)
          : `request failed (${resp.status})`;
      throw new ApiError(resp.status, message);
    }
    return body as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  /** Serialize mutations: each waits for the previous one to settle. */
  private enqueue<T>(run: () => Promise<T>): Promise<T> {
    const next = this.mutationChain.then(run, run);
    this.mutationChain = next.catch(() => undefined);
    return next;
  }

  health(): Promise<{ version: string; cases: number }> {
    return this.request("/api/v1/health");
  }

  textQuery(query: string): Promise<ApiResult> {
    return this.post("/api/v1/query/text", { query });
  }

  imageQuery(file: File | Blob, weights?: Record<string, number>): Promise<ApiResult> {
    const form = new FormData();
    form.append("image", file);
    if (weights) form.append("weights", JSON.stringify(weights));
    return this.request("/api/v1/query/image", { method: "POST", body: form });
  }

  browse(seed?: number): Promise<ApiResult> {
    return this.post("/api/v1/session/browse", seed === undefined ? {} : { seed });
  }

  session(sessionId: string): Promise<ApiResult> {
    return this.request(`/api/v1/session/${encodeURIComponent(sessionId)}`);
  }

  caseDetail(caseId: number): Promise<CaseDetail> {
    return this.request(`/api/v1/cases/${caseId}`);
  }

  setWeights(sessionId: string, weights: Record<string, number>): Promise<ApiResult> {
    return this.enqueue(() =>
      this.post(`/api/v1/session/${encodeURIComponent(sessionId)}/weights`, { weights }),
    );
  }

  like(sessionId: string, caseId: number): Promise<ApiResult> {
    return this.enqueue(() =>
      this.post(`/api/v1/session/${encodeURIComponent(sessionId)}/like`, { case_id: caseId }),
    );
  }

  unlike(sessionId: string, caseId: number): Promise<ApiResult> {
    return this.enqueue(() =>
      this.request(`/api/v1/session/${encodeURIComponent(sessionId)}/like/${caseId}`, {
        method: "DELETE",
      }),
    );
  }
}

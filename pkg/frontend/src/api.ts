import type {
  GraphExport, PolicySummary, RunPayload, RunRequest, ServiceConfig,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** HTTP error with the validation field pulled out of FastAPI detail bodies. */
export class ApiError extends Error {
  status: number;
  field: string | null;

  constructor(status: number, message: string, field: string | null = null) {
    super(message);
    this.status = status;
    this.field = field;
  }
}

function extractDetail(status: number, body: unknown): ApiError {
  const detail = (body as any)?.detail ?? body;
  if (typeof detail === "string") {
    return new ApiError(status, detail);
  }
  if (Array.isArray(detail) && detail.length > 0) {
    // pydantic request validation: [{loc: ["body", "seed"], msg: ...}, ...]
    const first = detail[0];
    const loc = Array.isArray(first?.loc) ? first.loc : [];
    const field = loc.length > 0 ? String(loc[loc.length - 1]) : null;
    return new ApiError(status, String(first?.msg ?? "validation error"), field);
  }
  if (detail && typeof detail === "object") {
    const d = detail as { field?: string; message?: string };
    return new ApiError(status, d.message ?? JSON.stringify(detail), d.field ?? null);
  }
  return new ApiError(status, `HTTP ${status}`);
}

export class ApiClient {
  private base: string;
  private fetchFn: FetchLike;

  constructor(base: string, fetchFn?: FetchLike) {
    this.base = base.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let body: unknown = null;
      try {
        body = await resp.json();
      } catch {
        // non-JSON error body, fall through with the bare status
      }
      throw extractDetail(resp.status, body);
    }
    return resp.json() as Promise<T>;
  }

  getConfig(): Promise<ServiceConfig> {
    return this.request("/api/config");
  }

  listPolicies(): Promise<PolicySummary[]> {
    return this.request("/api/policies");
  }

  getGraph(policyId: string): Promise<GraphExport> {
    return this.request(`/api/policies/${encodeURIComponent(policyId)}/graph`);
  }

  async submitRun(policyId: string, req: RunRequest): Promise<string> {
    const out = await this.request<{ run_id: string }>(
      `/api/policies/${encodeURIComponent(policyId)}/run`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(req),
      });
    return out.run_id;
  }

  getRun(runId: string): Promise<RunPayload> {
    return this.request(`/api/runs/${encodeURIComponent(runId)}`);
  }

  svgUrl(runId: string): string {
    return `${this.base}/api/runs/${encodeURIComponent(runId)}/svg`;
  }
}

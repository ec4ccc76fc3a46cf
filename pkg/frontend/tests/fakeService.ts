/**
 * Network-level test double for the clustering service.
 *
 * Implements the same routes and error bodies over an injected fetch, with
 * canned deterministic "results" whose numbers could not plausibly be
 * recomputed client-side. Tests assert that every figure the UI displays
 * matches what this double served, which is how the no-client-math
 * invariant stays checkable.
 */

import type { FetchLike } from "../src/api.js";
import type { GraphExport, RunRequest } from "../src/types.js";

export const OFFERUP_SENTENCE =
  "OfferUp collects information that you provide directly to us when you "
  + "sign up and use the OfferUp service including Information when you "
  + "register or update the details of your account";

const DR_METHODS = ["pca", "tsne", "umap"];
const CLUSTER_METHODS = ["mbkmeans", "agglomerative", "dbscan", "hdbscan", "spectral", "lda"];
const N_BUCKETS = 8;

function withDegrees(nodes: Array<{ id: string; label: string; type: string }>,
                     edges: GraphExport["edges"]): GraphExport {
  const degree = new Map<string, number>(nodes.map((n) => [n.id, 0]));
  for (const e of edges) {
    degree.set(e.source, (degree.get(e.source) ?? 0) + 1);
    degree.set(e.target, (degree.get(e.target) ?? 0) + 1);
  }
  const maxDegree = Math.max(0, ...degree.values());
  return {
    nodes: nodes.map((n) => ({
      ...n,
      degree: degree.get(n.id) ?? 0,
      color_bucket: Math.floor((N_BUCKETS * (degree.get(n.id) ?? 0)) / (maxDegree + 1)),
    })),
    edges,
  };
}

/** The 3-node OfferUp fixture the service ships as its smallest example. */
export function offerupExport(): GraphExport {
  return withDegrees(
    [
      { id: "n0", label: "information you provide to we include", type: "DATA" },
      { id: "n1", label: "information you register", type: "DATA" },
      { id: "n2", label: "we", type: "ACTOR" },
    ],
    [
      { source: "n0", target: "n1", relationship: "SUBSUM", text: OFFERUP_SENTENCE, id: "e0" },
      { source: "n2", target: "n0", relationship: "COLLECT",
        text: "OfferUp collects information that you provide directly to us.", id: "e1" },
    ]);
}

/** A chain-of-rings graph with n nodes, relationship alternating. */
export function bigExport(n: number): GraphExport {
  const nodes = [];
  const edges: GraphExport["edges"] = [];
  for (let i = 0; i < n; i++) {
    nodes.push({ id: `n${i}`, label: `clause ${i}`, type: i % 3 === 0 ? "ACTOR" : "DATA" });
  }
  for (let i = 0; i < n - 1; i++) {
    edges.push({
      source: `n${i}`, target: `n${i + 1}`,
      relationship: i % 2 === 0 ? "COLLECT" : "SUBSUM",
      text: `sentence behind edge ${i}`, id: `e${i}`,
    });
  }
  return withDegrees(nodes, edges);
}

function fnv1a(s: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

interface StoredRun {
  payload: Record<string, unknown>;
  pendingLeft: number;
  failed: boolean;
  detail: string;
}

export class FakeService {
  policies: Map<string, GraphExport>;
  digest = "feedfacefeedface";
  /** GET polls answered "pending" before a run reports done. */
  pendingPolls: number;
  /** Delay inside every /api/runs GET, to surface overlapping polls. */
  pollDelayMs: number;
  failWhen: (req: RunRequest) => string | null;

  requests: Array<{ method: string; path: string; body?: unknown }> = [];
  computeCount: Map<string, number> = new Map();
  private activeGets: Map<string, number> = new Map();
  maxConcurrentGets: Map<string, number> = new Map();
  private runs: Map<string, StoredRun> = new Map();

  constructor(opts: {
    policies?: Record<string, GraphExport>;
    pendingPolls?: number;
    pollDelayMs?: number;
    failWhen?: (req: RunRequest) => string | null;
  } = {}) {
    this.policies = new Map(Object.entries(opts.policies ?? { offerup: offerupExport() }));
    this.pendingPolls = opts.pendingPolls ?? 1;
    this.pollDelayMs = opts.pollDelayMs ?? 0;
    this.failWhen = opts.failWhen ?? (() => null);
  }

  /** Bind as the ApiClient's fetch. */
  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.requests.push({ method, path, body });

    if (path === "/api/config") {
      return json(200, {
        config: { seed: 5 }, digest: this.digest,
        dr_methods: DR_METHODS, cluster_methods: CLUSTER_METHODS,
      });
    }
    if (path === "/api/policies") {
      return json(200, [...this.policies.entries()].map(([id, g]) => ({
        id, node_count: g.nodes.length, edge_count: g.edges.length,
      })).sort((a, b) => a.id.localeCompare(b.id)));
    }
    let m = path.match(/^\/api\/policies\/([^/]+)\/graph$/);
    if (m) {
      const g = this.policies.get(decodeURIComponent(m[1]));
      if (!g) return json(404, { detail: `unknown policy '${m[1]}'` });
      return json(200, g);
    }
    m = path.match(/^\/api\/policies\/([^/]+)\/run$/);
    if (m && method === "POST") {
      return this.handleRun(decodeURIComponent(m[1]), body as RunRequest);
    }
    m = path.match(/^\/api\/runs\/([^/]+)$/);
    if (m && method === "GET") {
      return this.handlePoll(decodeURIComponent(m[1]));
    }
    return json(404, { detail: `no route ${method} ${path}` });
  };

  private handleRun(policyId: string, req: RunRequest): Response {
    const g = this.policies.get(policyId);
    if (!g) return json(404, { detail: `unknown policy '${policyId}'` });
    if (req.config_digest !== undefined && req.config_digest !== this.digest) {
      return json(409, { detail: { field: "config_digest", message: "config mismatch" } });
    }
    if (!DR_METHODS.includes(req.dr)) {
      return json(422, { detail: { field: "dr", message: `unknown method '${req.dr}'` } });
    }
    if (!CLUSTER_METHODS.includes(req.clustering)) {
      return json(422, {
        detail: { field: "clustering", message: `unknown method '${req.clustering}'` },
      });
    }
    if (typeof req.seed !== "number" || req.seed < 0 || !Number.isInteger(req.seed)) {
      return json(422, { detail: { field: "seed", message: "must be a non-negative integer" } });
    }

    // normalize like the service: spell out defaulted params before hashing
    const params: Record<string, number> = { ...req.params };
    if (["mbkmeans", "agglomerative", "spectral"].includes(req.clustering)
        && params.k === undefined) {
      params.k = 5;
    }
    const canonical = JSON.stringify({
      policy: policyId, dr: req.dr, clustering: req.clustering, seed: req.seed,
      params: Object.fromEntries(Object.entries(params).sort()),
    });
    const runId = fnv1a(canonical).toString(16).padStart(8, "0");

    if (!this.runs.has(runId)) {
      this.computeCount.set(runId, (this.computeCount.get(runId) ?? 0) + 1);
      const failure = this.failWhen(req);
      this.runs.set(runId, {
        pendingLeft: this.pendingPolls,
        failed: failure !== null,
        detail: failure ?? "",
        payload: this.buildPayload(runId, policyId, g, req, params),
      });
    }
    return json(200, { run_id: runId });
  }

  private buildPayload(runId: string, policyId: string, g: GraphExport,
                       req: RunRequest, params: Record<string, number>) {
    const h = fnv1a(runId);
    const k = Math.max(1, Math.min(params.k ?? 3, g.nodes.length));
    const positions: Record<string, [number, number]> = {};
    const labels: Record<string, number> = {};
    g.nodes.forEach((n, i) => {
      // arbitrary but deterministic spread; values carry the run id's hash
      positions[n.id] = [
        Math.cos(i * 0.7 + h % 97) * (10 + (i % 5)),
        Math.sin(i * 1.3 + h % 89) * (10 + (i % 7)),
      ];
      labels[n.id] = i % k;
      if ((req.clustering === "dbscan" || req.clustering === "hdbscan") && i % 7 === 6) {
        labels[n.id] = -1;
      }
    });
    const annotations: Record<string, string[]> = {};
    for (let c = 0; c < k; c++) {
      annotations[String(c)] = [`term${c}a`, `term${c}b`, `term${c}c`];
    }
    return {
      status: "done",
      run_id: runId,
      policy: policyId,
      dr: req.dr,
      clustering: req.clustering,
      seed: req.seed,
      positions,
      labels,
      k_found: k,
      metrics: {
        // sentinel figures: recognizably from the wire, not recomputable
        silhouette: (h % 9000) / 10000 + 0.05,
        davies_bouldin: (h % 400) / 100 + 0.25,
        n_evaluated: g.nodes.length,
        noise_fraction: Object.values(labels).filter((v) => v === -1).length / g.nodes.length,
      },
      annotations,
    };
  }

  private async handlePoll(runId: string): Promise<Response> {
    const run = this.runs.get(runId);
    if (!run) return json(404, { detail: `unknown run '${runId}'` });

    this.activeGets.set(runId, (this.activeGets.get(runId) ?? 0) + 1);
    this.maxConcurrentGets.set(runId, Math.max(
      this.maxConcurrentGets.get(runId) ?? 0, this.activeGets.get(runId) as number));
    try {
      await new Promise<void>((r) => setTimeout(r, this.pollDelayMs));
      if (run.pendingLeft > 0) {
        run.pendingLeft -= 1;
        return json(200, { status: "pending", run_id: runId });
      }
      if (run.failed) {
        return json(200, { status: "error", run_id: runId, detail: run.detail });
      }
      return json(200, run.payload);
    } finally {
      this.activeGets.set(runId, (this.activeGets.get(runId) as number) - 1);
    }
  }
}

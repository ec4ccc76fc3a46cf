/** Wire types for the clustering service API, plus client-side view state. */

export interface GraphNode {
  id: string;
  label: string;
  type: string;
  degree: number;
  color_bucket: number;
}

export interface GraphEdge {
  source: string;
  target: string;
  relationship: string;
  text: string;
  id: string;
}

export interface GraphExport {
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface PolicySummary {
  id: string;
  node_count: number;
  edge_count: number;
}

export interface ServiceConfig {
  config: Record<string, unknown>;
  digest: string;
  dr_methods: string[];
  cluster_methods: string[];
}

export interface RunRequest {
  dr: string;
  clustering: string;
  seed: number;
  params: Record<string, number>;
  config_digest?: string;
}

export interface RunMetrics {
  silhouette: number | null;
  davies_bouldin: number | "inf" | null;
  n_evaluated: number;
  noise_fraction: number;
}

/** GET /api/runs/{id} while the job is queued or computing. */
export interface RunPending {
  status: "pending";
  run_id: string;
}

export interface RunError {
  status: "error";
  run_id: string;
  detail: string;
}

/** Completed run. Positions and labels are keyed by node id. */
export interface RunDone {
  status: "done";
  run_id: string;
  policy: string;
  dr: string;
  clustering: string;
  seed: number;
  positions: Record<string, [number, number]>;
  labels: Record<string, number>;
  k_found: number;
  metrics: RunMetrics;
  annotations: Record<string, string[]>;
}

export type RunPayload = RunPending | RunError | RunDone;

export type ViewMode = "graph" | "scatter" | "side-by-side";

/**
 * Everything the views need besides service payloads. Kept as plain data so
 * recoloring stays a pure function of (run payload, view state).
 */
export interface ViewState {
  policyId: string | null;
  activeRunId: string | null;
  /** Second run shown when comparing side by side. */
  compareRunId: string | null;
  selectedNode: string | null;
  hoverNode: string | null;
  /** null means no filter, show every relationship type. */
  relationshipFilter: Set<string> | null;
  /** Restrict both views to one cluster label; null shows all. */
  legendFilter: number | null;
  viewMode: ViewMode;
}

export function initialViewState(): ViewState {
  return {
    policyId: null,
    activeRunId: null,
    compareRunId: null,
    selectedNode: null,
    hoverNode: null,
    relationshipFilter: null,
    legendFilter: null,
    viewMode: "graph",
  };
}

export const NOISE_LABEL = -1;

/**
 * Scatter view model. Renders the server-computed projection exactly: the
 * data coordinates come straight from the run payload and are only affine
 * mapped into the plot box, with the same 5% margin the service SVG uses.
 */

import { clusterColor } from "./palette.js";
import { fitToBox, SCATTER_BOX } from "./geometry.js";
import { NOISE_LABEL, type RunDone, type ViewState } from "./types.js";

export const POINT_RADIUS = 4;
export const NOISE_RADIUS = 2.5;

export interface PointView {
  id: string;
  x: number;
  y: number;
  /** Raw projection coordinates as served, for tooltips. */
  dataX: number;
  dataY: number;
  cluster: number;
  fill: string;
  radius: number;
  dimmed: boolean;
  hovered: boolean;
}

export interface ScatterViewModel {
  runId: string;
  title: string;
  points: PointView[];
  metricsLine: string;
}

function formatMetric(v: number | "inf" | null): string {
  if (v === null) return "undef";
  if (v === "inf") return "inf";
  return String(v);
}

export function buildScatterView(run: RunDone, state: ViewState): ScatterViewModel {
  const ids = Object.keys(run.positions).sort();
  const fitted = fitToBox(ids.map((id) => run.positions[id]), SCATTER_BOX);
  const points: PointView[] = ids.map((id, i) => {
    const cluster = run.labels[id] ?? NOISE_LABEL;
    return {
      id,
      x: fitted[i].x,
      y: fitted[i].y,
      dataX: run.positions[id][0],
      dataY: run.positions[id][1],
      cluster,
      fill: clusterColor(cluster),
      radius: cluster === NOISE_LABEL ? NOISE_RADIUS : POINT_RADIUS,
      dimmed: state.legendFilter !== null && cluster !== state.legendFilter,
      hovered: state.hoverNode === id,
    };
  });
  return {
    runId: run.run_id,
    title: `${run.policy} ${run.dr} ${run.clustering} (seed ${run.seed})`,
    points,
    metricsLine:
      `silhouette ${formatMetric(run.metrics.silhouette)}  ` +
      `DBI ${formatMetric(run.metrics.davies_bouldin)}  ` +
      `k=${run.k_found}  n=${run.metrics.n_evaluated}`,
  };
}

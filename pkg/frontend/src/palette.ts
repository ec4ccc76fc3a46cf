/**
 * Color constants mirrored from the service renderer so client views match
 * the SVG artifacts byte for byte where they overlap.
 */

import { NOISE_LABEL } from "./types.js";

export const CLUSTER_PALETTE = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
  "#e377c2", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a",
];

export const NOISE_COLOR = "#999999";

// light-to-dark ramp for the 8 degree buckets of the graph view
export const DEGREE_RAMP = [
  "#deebf7", "#c6dbef", "#9ecae1", "#6baed6",
  "#4292c6", "#2171b5", "#08519c", "#08306b",
];

export function clusterColor(label: number): string {
  if (label === NOISE_LABEL) return NOISE_COLOR;
  return CLUSTER_PALETTE[((label % CLUSTER_PALETTE.length) + CLUSTER_PALETTE.length) % CLUSTER_PALETTE.length];
}

export function degreeColor(bucket: number): string {
  const i = Math.min(Math.max(bucket, 0), DEGREE_RAMP.length - 1);
  return DEGREE_RAMP[i];
}

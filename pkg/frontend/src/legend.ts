import { clusterColor, NOISE_COLOR } from "./palette.js";
import { NOISE_LABEL, type RunDone } from "./types.js";

export interface LegendRow {
  cluster: number;
  swatch: string;
  size: number;
  terms: string[];
  isNoise: boolean;
}

/**
 * Legend rows for a completed run: one per cluster in ascending label order,
 * then a gray noise row when any point was labeled noise. Sizes are counted
 * from the served label map; terms come from the served annotations.
 */
export function buildLegend(run: RunDone): LegendRow[] {
  const counts = new Map<number, number>();
  for (const label of Object.values(run.labels)) {
    counts.set(label, (counts.get(label) ?? 0) + 1);
  }
  const rows: LegendRow[] = [];
  const clusters = [...counts.keys()].filter((c) => c !== NOISE_LABEL).sort((a, b) => a - b);
  for (const c of clusters) {
    rows.push({
      cluster: c,
      swatch: clusterColor(c),
      size: counts.get(c) as number,
      terms: run.annotations[String(c)] ?? [],
      isNoise: false,
    });
  }
  if (counts.has(NOISE_LABEL)) {
    rows.push({
      cluster: NOISE_LABEL,
      swatch: NOISE_COLOR,
      size: counts.get(NOISE_LABEL) as number,
      terms: [],
      isNoise: true,
    });
  }
  return rows;
}

/** Shared coordinate fitting for the graph and scatter views. */

export interface Box {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

// same plot rectangle and margin the service uses for its SVG artifacts
export const SCATTER_BOX: Box = { x0: 50, y0: 30, x1: 550, y1: 480 };
export const GRAPH_BOX: Box = { x0: 10, y0: 10, x1: 590, y1: 510 };
export const MARGIN_FRACTION = 0.05;

export interface FittedPoint {
  x: number;
  y: number;
}

/**
 * Affine-map data coordinates into a pixel box with a 5% margin on the data
 * bounds, y flipped so larger data y draws higher. Mirrors the server's
 * scatter geometry so client positions are exactly the served ones rescaled.
 */
export function fitToBox(
  points: Array<[number, number]>, box: Box = SCATTER_BOX,
  margin: number = MARGIN_FRACTION,
): FittedPoint[] {
  if (points.length === 0) return [];
  let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
  for (const [x, y] of points) {
    if (x < xMin) xMin = x;
    if (x > xMax) xMax = x;
    if (y < yMin) yMin = y;
    if (y > yMax) yMax = y;
  }
  const xPad = (xMax - xMin) * margin || 1.0;
  const yPad = (yMax - yMin) * margin || 1.0;
  xMin -= xPad; xMax += xPad;
  yMin -= yPad; yMax += yPad;
  const sx = (box.x1 - box.x0) / (xMax - xMin);
  const sy = (box.y1 - box.y0) / (yMax - yMin);
  return points.map(([x, y]) => ({
    x: box.x0 + (x - xMin) * sx,
    y: box.y1 - (y - yMin) * sy,
  }));
}

/** Deterministic circle layout used before any server positions exist. */
export function circleLayout(n: number, box: Box = GRAPH_BOX): FittedPoint[] {
  const cx = (box.x0 + box.x1) / 2;
  const cy = (box.y0 + box.y1) / 2;
  const r = Math.min(box.x1 - box.x0, box.y1 - box.y0) / 2 - 14;
  const out: FittedPoint[] = [];
  for (let i = 0; i < n; i++) {
    const t = (2 * Math.PI * i) / Math.max(n, 1);
    out.push({ x: cx + r * Math.cos(t), y: cy + r * Math.sin(t) });
  }
  return out;
}

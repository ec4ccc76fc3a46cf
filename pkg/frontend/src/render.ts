/**
 * String renderers. Views are built as SVG/HTML markup from the pure view
 * models; the shell swaps them in with innerHTML and delegates events via
 * data attributes. Keeping these as string functions makes every visual
 * decision assertable in tests without a browser.
 */

import type { GraphViewModel } from "./graphModel.js";
import type { EdgeDetail } from "./graphModel.js";
import type { ScatterViewModel } from "./scatterModel.js";
import type { LegendRow } from "./legend.js";
import type { RunHistoryEntry } from "./runs.js";

export const DIM_OPACITY = 0.2;

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const fmt = (v: number) => (Math.round(v * 100) / 100).toString();

export function renderGraphSvg(model: GraphViewModel): string {
  if (model.error !== null) {
    return `<div class="error-banner" data-role="error">${escapeHtml(model.error)}</div>`;
  }
  const parts: string[] = [];
  parts.push('<svg viewBox="0 0 600 520" xmlns="http://www.w3.org/2000/svg" data-role="graph">');
  parts.push('<defs><marker id="arrow" viewBox="0 0 10 10" refX="14" refY="5" '
    + 'markerWidth="5" markerHeight="5" orient="auto-start-reverse">'
    + '<path d="M 0 0 L 10 5 L 0 10 z" fill="#666666"/></marker></defs>');
  for (const e of model.edges) {
    const w = e.highlighted ? 2.5 : 1;
    parts.push(
      `<line data-edge="${escapeHtml(e.key)}" x1="${fmt(e.x1)}" y1="${fmt(e.y1)}" `
      + `x2="${fmt(e.x2)}" y2="${fmt(e.y2)}" stroke="#888888" stroke-width="${w}" `
      + 'marker-end="url(#arrow)"/>');
  }
  for (const n of model.nodes) {
    const opacity = n.dimmed ? DIM_OPACITY : 1;
    const stroke = n.highlighted ? ' stroke="#111111" stroke-width="2.5"' : ' stroke="#444444" stroke-width="0.8"';
    parts.push(
      `<circle data-node="${escapeHtml(n.id)}" cx="${fmt(n.x)}" cy="${fmt(n.y)}" r="9" `
      + `fill="${n.fill}" opacity="${opacity}"${stroke}>`
      + `<title>${escapeHtml(n.label)} [deg ${n.degree}]</title></circle>`);
  }
  parts.push("</svg>");
  return parts.join("");
}

/** Counter badge shown above the graph canvas, present even when empty. */
export function renderBadge(model: GraphViewModel): string {
  const b = model.badge;
  const shown = b.shown === b.edges ? "" : ` (${b.shown} shown)`;
  return `<span data-role="badge">${b.nodes} nodes, ${b.edges} edges${shown}</span>`;
}

export function renderScatterSvg(model: ScatterViewModel): string {
  const parts: string[] = [];
  parts.push(`<svg viewBox="0 0 600 520" xmlns="http://www.w3.org/2000/svg" data-role="scatter" data-run="${escapeHtml(model.runId)}">`);
  parts.push('<rect x="50" y="30" width="500" height="450" fill="none" stroke="#333333"/>');
  parts.push(`<text x="50" y="20" font-size="13">${escapeHtml(model.title)}</text>`);
  parts.push(`<text x="50" y="505" font-size="11" data-role="metrics">${escapeHtml(model.metricsLine)}</text>`);
  for (const p of model.points) {
    const opacity = p.dimmed ? DIM_OPACITY : 1;
    const ring = p.hovered ? ' stroke="#111111" stroke-width="2.5"' : "";
    parts.push(
      `<circle data-node="${escapeHtml(p.id)}" cx="${fmt(p.x)}" cy="${fmt(p.y)}" `
      + `r="${p.radius}" fill="${p.fill}" opacity="${opacity}"${ring}>`
      + `<title>${escapeHtml(p.id)} (${p.dataX}, ${p.dataY})</title></circle>`);
  }
  parts.push("</svg>");
  return parts.join("");
}

export function renderLegend(rows: LegendRow[], active: number | null): string {
  if (rows.length === 0) return '<div data-role="legend"></div>';
  const items = rows.map((r) => {
    const name = r.isNoise ? `noise (${r.size})` : `cluster ${r.cluster} (${r.size})`;
    const terms = r.terms.length > 0 ? `: ${r.terms.join(", ")}` : "";
    const cls = active === r.cluster ? "legend-row active" : "legend-row";
    return `<li class="${cls}" data-cluster="${r.cluster}">`
      + `<span class="swatch" style="background:${r.swatch}"></span>`
      + `${escapeHtml(name)}${escapeHtml(terms)}</li>`;
  });
  return `<ul data-role="legend">${items.join("")}</ul>`;
}

export function renderEdgePanel(detail: EdgeDetail | null): string {
  if (detail === null) return '<div data-role="edge-detail"></div>';
  return '<div data-role="edge-detail">'
    + `<span class="tag">${escapeHtml(detail.relationship)}</span> `
    + `<span class="endpoints">${escapeHtml(detail.source)} → ${escapeHtml(detail.target)}</span>`
    + `<p class="sentence">${escapeHtml(detail.text)}</p></div>`;
}

export function renderHistory(
  entries: RunHistoryEntry[], statusOf: (runId: string) => string,
  activeId: string | null, compareId: string | null,
): string {
  const items = entries.map((h) => {
    const marks = [
      h.runId === activeId ? "active" : "",
      h.runId === compareId ? "compare" : "",
    ].filter(Boolean).join(" ");
    const r = h.request;
    const label = `${r.dr}/${r.clustering} seed=${r.seed} ${JSON.stringify(r.params)}`;
    return `<li class="run ${marks}" data-run="${escapeHtml(h.runId)}">`
      + `${escapeHtml(label)} [${escapeHtml(statusOf(h.runId))}]</li>`;
  });
  return `<ol data-role="history">${items.join("")}</ol>`;
}

export function renderFormError(err: { field: string | null; message: string } | null): string {
  if (err === null) return '<div data-role="form-error"></div>';
  const field = err.field !== null ? `${escapeHtml(err.field)}: ` : "";
  return `<div data-role="form-error" class="error-banner">${field}${escapeHtml(err.message)}</div>`;
}

/**
 * Pure view model for the node-link graph view.
 *
 * Everything here is a function of (graph export, run payload, view state,
 * drag overrides). No clustering or metric math happens on the client; the
 * only numbers produced locally are pixel coordinates.
 */

import { clusterColor, degreeColor } from "./palette.js";
import { circleLayout, fitToBox, GRAPH_BOX } from "./geometry.js";
import type { GraphExport, RunDone, ViewState } from "./types.js";

export interface NodeView {
  id: string;
  label: string;
  type: string;
  degree: number;
  fill: string;
  /** Cluster label when a run is active, else null. */
  cluster: number | null;
  dimmed: boolean;
  highlighted: boolean;
  x: number;
  y: number;
}

export interface EdgeView {
  key: string;
  source: string;
  target: string;
  relationship: string;
  text: string;
  highlighted: boolean;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface GraphViewModel {
  nodes: NodeView[];
  edges: EdgeView[];
  badge: { nodes: number; edges: number; shown: number };
  error: string | null;
}

/** Returns a message when the payload does not look like a graph export. */
export function validateExport(doc: unknown): string | null {
  if (doc === null || typeof doc !== "object") {
    return "malformed graph payload: not an object";
  }
  const d = doc as Partial<GraphExport>;
  if (!Array.isArray(d.nodes) || !Array.isArray(d.edges)) {
    return "malformed graph payload: missing nodes or edges array";
  }
  const ids = new Set<string>();
  for (const n of d.nodes) {
    if (typeof (n as any)?.id !== "string") {
      return "malformed graph payload: node without string id";
    }
    ids.add((n as any).id);
  }
  for (const e of d.edges) {
    const src = (e as any)?.source;
    const dst = (e as any)?.target;
    if (typeof src !== "string" || typeof dst !== "string") {
      return "malformed graph payload: edge without endpoints";
    }
    if (!ids.has(src) || !ids.has(dst)) {
      return `malformed graph payload: edge endpoint ${!ids.has(src) ? src : dst} is not a node`;
    }
  }
  return null;
}

function errorModel(message: string): GraphViewModel {
  return { nodes: [], edges: [], badge: { nodes: 0, edges: 0, shown: 0 }, error: message };
}

/**
 * Base positions for the graph view. When a completed run covers the graph,
 * its server-computed projection seeds the layout; otherwise nodes start on
 * a deterministic circle. Drag offsets are applied on top by the caller.
 */
export function seedPositions(
  doc: GraphExport, run: RunDone | null,
): Map<string, { x: number; y: number }> {
  const out = new Map<string, { x: number; y: number }>();
  if (run && doc.nodes.length > 0 && doc.nodes.every((n) => run.positions[n.id] !== undefined)) {
    const fitted = fitToBox(doc.nodes.map((n) => run.positions[n.id]), GRAPH_BOX);
    doc.nodes.forEach((n, i) => out.set(n.id, fitted[i]));
    return out;
  }
  const circle = circleLayout(doc.nodes.length);
  doc.nodes.forEach((n, i) => out.set(n.id, circle[i]));
  return out;
}

export function buildGraphView(
  raw: unknown,
  state: ViewState,
  run: RunDone | null = null,
  overrides: Map<string, { x: number; y: number }> | null = null,
): GraphViewModel {
  const problem = validateExport(raw);
  if (problem !== null) return errorModel(problem);
  const doc = raw as GraphExport;

  const positions = seedPositions(doc, run);
  if (overrides) {
    for (const [id, p] of overrides) {
      if (positions.has(id)) positions.set(id, p);
    }
  }

  const filter = state.relationshipFilter;
  const visible = doc.edges.filter(
    (e) => filter === null || filter.has(e.relationship));

  // nodes touched by at least one visible edge; under a filter the rest dim
  const touched = new Set<string>();
  for (const e of visible) {
    touched.add(e.source);
    touched.add(e.target);
  }

  const neighborhood = new Set<string>();
  if (state.selectedNode !== null) {
    neighborhood.add(state.selectedNode);
    for (const e of visible) {
      if (e.source === state.selectedNode) neighborhood.add(e.target);
      if (e.target === state.selectedNode) neighborhood.add(e.source);
    }
  }

  const nodes: NodeView[] = doc.nodes.map((n) => {
    const cluster = run ? (run.labels[n.id] ?? null) : null;
    const isolatedOut = filter !== null && !touched.has(n.id);
    const legendOut = state.legendFilter !== null && cluster !== state.legendFilter;
    const p = positions.get(n.id) as { x: number; y: number };
    return {
      id: n.id,
      label: n.label,
      type: n.type,
      degree: n.degree,
      fill: cluster !== null ? clusterColor(cluster) : degreeColor(n.color_bucket),
      cluster,
      dimmed: isolatedOut || legendOut,
      highlighted: neighborhood.has(n.id),
      x: p.x,
      y: p.y,
    };
  });

  const edges: EdgeView[] = visible.map((e, i) => {
    const a = positions.get(e.source) as { x: number; y: number };
    const b = positions.get(e.target) as { x: number; y: number };
    return {
      key: e.id !== "" ? e.id : `#${i}`,
      source: e.source,
      target: e.target,
      relationship: e.relationship,
      text: e.text,
      highlighted: state.selectedNode !== null
        && (e.source === state.selectedNode || e.target === state.selectedNode),
      x1: a.x,
      y1: a.y,
      x2: b.x,
      y2: b.y,
    };
  });

  return {
    nodes,
    edges,
    badge: { nodes: doc.nodes.length, edges: doc.edges.length, shown: edges.length },
    error: null,
  };
}

/** Detail shown when an edge is hovered or clicked: tag plus full sentence. */
export interface EdgeDetail {
  relationship: string;
  text: string;
  source: string;
  target: string;
}

export function edgeDetail(model: GraphViewModel, key: string): EdgeDetail | null {
  const e = model.edges.find((x) => x.key === key);
  if (!e) return null;
  return { relationship: e.relationship, text: e.text, source: e.source, target: e.target };
}

/**
 * Browser shell. Everything stateful lives in ViewState plus the RunPanel;
 * this file only wires DOM events into the queue and swaps rendered markup.
 */

import { ApiClient } from "./api.js";
import { EventQueue } from "./queue.js";
import { RunPanel } from "./runs.js";
import { buildGraphView, edgeDetail, type EdgeDetail } from "./graphModel.js";
import { buildScatterView } from "./scatterModel.js";
import { buildLegend } from "./legend.js";
import {
  renderBadge, renderEdgePanel, renderFormError, renderGraphSvg,
  renderHistory, renderLegend, renderScatterSvg,
} from "./render.js";
import { initialViewState, type GraphExport, type ViewMode } from "./types.js";

function apiBase(): string {
  const q = new URLSearchParams(window.location.search).get("api");
  return q ?? window.location.origin;
}

const $ = (id: string) => document.getElementById(id) as HTMLElement;

function boot() {
  const api = new ApiClient(apiBase());
  const queue = new EventQueue();
  const state = initialViewState();
  let graph: GraphExport | null = null;
  let graphRaw: unknown = null;
  let detail: EdgeDetail | null = null;
  const dragged = new Map<string, { x: number; y: number }>();

  const panel = new RunPanel(api, {
    onChange: () => queue.enqueue(render),
  });

  function render() {
    const run = panel.result(state.activeRunId);
    const model = buildGraphView(graphRaw, state, run, dragged);
    $("badge").innerHTML = renderBadge(model);
    $("graph").innerHTML = renderGraphSvg(model);
    $("edge-detail").innerHTML = renderEdgePanel(detail);
    $("form-error").innerHTML = renderFormError(panel.formError);
    $("history").innerHTML = renderHistory(
      panel.history, (id) => panel.status(id), state.activeRunId, state.compareRunId);
    $("legend").innerHTML = run !== null
      ? renderLegend(buildLegend(run), state.legendFilter) : renderLegend([], null);

    const compare = panel.result(state.compareRunId);
    const panes: string[] = [];
    if (run !== null) panes.push(renderScatterSvg(buildScatterView(run, state)));
    if (state.viewMode === "side-by-side" && compare !== null) {
      panes.push(renderScatterSvg(buildScatterView(compare, state)));
    }
    $("scatter").innerHTML = panes.join("");

    $("app").dataset.mode = state.viewMode;
  }

  async function loadPolicy(policyId: string) {
    state.policyId = policyId;
    state.selectedNode = null;
    state.relationshipFilter = null;
    state.legendFilter = null;
    dragged.clear();
    detail = null;
    try {
      graph = await api.getGraph(policyId);
      graphRaw = graph;
    } catch (err) {
      graph = null;
      graphRaw = { error: true };
    }
    const filterBox = $("rel-filter");
    const rels = [...new Set((graph?.edges ?? []).map((e) => e.relationship))].sort();
    filterBox.innerHTML = rels.map((r) =>
      `<label><input type="checkbox" data-rel="${r}" checked> ${r}</label>`).join(" ");
    render();
  }

  async function init() {
    const policies = await api.listPolicies();
    const select = $("policy") as HTMLSelectElement;
    select.innerHTML = policies.map((p) =>
      `<option value="${p.id}">${p.id} (${p.node_count}n/${p.edge_count}e)</option>`).join("");
    if (policies.length > 0) await loadPolicy(policies[0].id);

    select.addEventListener("change", () =>
      queue.enqueue(() => loadPolicy(select.value)));

    $("rel-filter").addEventListener("change", () => queue.enqueue(() => {
      const boxes = $("rel-filter").querySelectorAll<HTMLInputElement>("input[data-rel]");
      const chosen = new Set<string>();
      let all = true;
      boxes.forEach((b) => {
        if (b.checked) chosen.add(b.dataset.rel as string);
        else all = false;
      });
      state.relationshipFilter = all ? null : chosen;
      render();
    }));

    // delegated clicks: nodes, edges, legend rows, history rows
    document.addEventListener("click", (ev) => {
      const t = ev.target as HTMLElement;
      const nodeId = t.closest?.("[data-node]")?.getAttribute("data-node");
      const edgeKey = t.closest?.("[data-edge]")?.getAttribute("data-edge");
      const clusterAttr = t.closest?.("[data-cluster]")?.getAttribute("data-cluster");
      const runAttr = t.closest?.("[data-run]")?.getAttribute("data-run");
      queue.enqueue(() => {
        if (nodeId) {
          state.selectedNode = state.selectedNode === nodeId ? null : nodeId;
        } else if (edgeKey) {
          const run = panel.result(state.activeRunId);
          detail = edgeDetail(buildGraphView(graphRaw, state, run, dragged), edgeKey);
        } else if (clusterAttr !== null && clusterAttr !== undefined) {
          const c = Number(clusterAttr);
          state.legendFilter = state.legendFilter === c ? null : c;
        } else if (runAttr && t.closest("[data-role=history]")) {
          if (ev.shiftKey) {
            state.compareRunId = state.compareRunId === runAttr ? null : runAttr;
            if (state.compareRunId !== null) state.viewMode = "side-by-side";
          } else {
            state.activeRunId = runAttr;
          }
        }
        render();
      });
    });

    document.addEventListener("mouseover", (ev) => {
      const t = ev.target as HTMLElement;
      const nodeId = t.closest?.("[data-node]")?.getAttribute("data-node") ?? null;
      if (nodeId !== state.hoverNode) {
        queue.enqueue(() => {
          state.hoverNode = nodeId;
          render();
        });
      }
    });

    // node dragging on the graph svg
    let dragId: string | null = null;
    $("graph").addEventListener("pointerdown", (ev) => {
      const t = ev.target as HTMLElement;
      dragId = t.closest?.("[data-node]")?.getAttribute("data-node") ?? null;
    });
    window.addEventListener("pointermove", (ev) => {
      if (dragId === null) return;
      const svg = $("graph").querySelector("svg");
      if (!svg) return;
      const rect = svg.getBoundingClientRect();
      const x = ((ev.clientX - rect.left) / rect.width) * 600;
      const y = ((ev.clientY - rect.top) / rect.height) * 520;
      const id = dragId;
      queue.enqueue(() => {
        dragged.set(id, { x, y });
        render();
      });
    });
    window.addEventListener("pointerup", () => {
      dragId = null;
    });

    document.querySelectorAll<HTMLElement>("[data-view]").forEach((b) =>
      b.addEventListener("click", () => queue.enqueue(() => {
        state.viewMode = b.dataset.view as ViewMode;
        render();
      })));

    ($("run-form") as HTMLFormElement).addEventListener("submit", (ev) => {
      ev.preventDefault();
      const form = ev.target as HTMLFormElement;
      const data = new FormData(form);
      const params: Record<string, number> = {};
      for (const name of ["k", "eps", "min_pts", "n_topics", "perplexity", "n_neighbors"]) {
        const v = data.get(name);
        if (v !== null && String(v).trim() !== "") params[name] = Number(v);
      }
      const req = {
        dr: String(data.get("dr")),
        clustering: String(data.get("clustering")),
        seed: Number(data.get("seed")),
        params,
      };
      queue.enqueue(async () => {
        if (state.policyId === null) return;
        try {
          const runId = await panel.submit(state.policyId, req);
          state.activeRunId = runId;
        } catch {
          // validation problems land in panel.formError and render below
        }
        render();
      });
    });

    render();
  }

  void queue.enqueue(init);
}

boot();

import { describe, expect, it } from "vitest";

import { buildGraphView } from "../src/graphModel.js";
import { buildScatterView } from "../src/scatterModel.js";
import { buildLegend } from "../src/legend.js";
import {
  DIM_OPACITY, renderBadge, renderEdgePanel, renderFormError,
  renderGraphSvg, renderHistory, renderLegend, renderScatterSvg,
} from "../src/render.js";
import { initialViewState, type RunDone } from "../src/types.js";
import { offerupExport } from "./fakeService.js";

const count = (hay: string, needle: string) => hay.split(needle).length - 1;

function demoRun(): RunDone {
  return {
    status: "done", run_id: "runx", policy: "demo", dr: "pca",
    clustering: "dbscan", seed: 1,
    positions: { a: [0, 0], b: [1, 1], c: [2, 0] },
    labels: { a: 0, b: 0, c: -1 },
    k_found: 1,
    metrics: { silhouette: 0.31, davies_bouldin: 2.5, n_evaluated: 2, noise_fraction: 1 / 3 },
    annotations: { "0": ["cookie", "tracking"] },
  };
}

describe("renderGraphSvg", () => {
  it("emits one circle per node and one line per visible edge", () => {
    const svg = renderGraphSvg(buildGraphView(offerupExport(), initialViewState()));
    expect(count(svg, "<circle")).toBe(3);
    expect(count(svg, "<line")).toBe(2);
    expect(svg).toContain('data-node="n0"');
    expect(svg).toContain('data-edge="e1"');
    expect(svg).toContain("marker-end");
  });

  it("dims via opacity and escapes labels in titles", () => {
    const doc = offerupExport();
    doc.nodes[1].label = 'a < b & "c"';
    const state = { ...initialViewState(), relationshipFilter: new Set(["COLLECT"]) };
    const svg = renderGraphSvg(buildGraphView(doc, state));
    expect(svg).toContain(`opacity="${DIM_OPACITY}"`);
    expect(svg).toContain("a &lt; b &amp; &quot;c&quot;");
  });

  it("renders the error banner instead of an svg on bad payloads", () => {
    const html = renderGraphSvg(buildGraphView(17, initialViewState()));
    expect(html).toContain('data-role="error"');
    expect(html).toContain("malformed graph payload");
    expect(html).not.toContain("<svg");
  });
});

describe("renderBadge", () => {
  it("shows zero counts for an empty graph", () => {
    const badge = renderBadge(buildGraphView({ nodes: [], edges: [] }, initialViewState()));
    expect(badge).toContain("0 nodes, 0 edges");
  });

  it("appends the shown count only when filtered", () => {
    const all = renderBadge(buildGraphView(offerupExport(), initialViewState()));
    expect(all).toContain("3 nodes, 2 edges");
    expect(all).not.toContain("shown");
    const filtered = renderBadge(buildGraphView(
      offerupExport(),
      { ...initialViewState(), relationshipFilter: new Set(["SUBSUM"]) }));
    expect(filtered).toContain("(1 shown)");
  });
});

describe("renderScatterSvg", () => {
  it("one circle per projected point, tagged with the run id", () => {
    const svg = renderScatterSvg(buildScatterView(demoRun(), initialViewState()));
    expect(count(svg, "<circle")).toBe(3);
    expect(svg).toContain('data-run="runx"');
    expect(svg).toContain('data-role="metrics"');
    expect(svg).toContain("silhouette 0.31");
  });

  it("hover ring appears only on the hovered node", () => {
    const svg = renderScatterSvg(buildScatterView(
      demoRun(), { ...initialViewState(), hoverNode: "b" }));
    expect(count(svg, 'stroke-width="2.5"')).toBe(1);
  });
});

describe("renderLegend", () => {
  it("rows carry swatches, counts, terms, and the noise row", () => {
    const html = renderLegend(buildLegend(demoRun()), null);
    expect(html).toContain("cluster 0 (2): cookie, tracking");
    expect(html).toContain("noise (1)");
    expect(html).toContain('data-cluster="-1"');
    expect(count(html, "<li")).toBe(2);
  });

  it("marks the active filter row", () => {
    const html = renderLegend(buildLegend(demoRun()), 0);
    expect(html).toContain('class="legend-row active" data-cluster="0"');
  });

  it("renders an empty shell with no run", () => {
    expect(renderLegend([], null)).toBe('<div data-role="legend"></div>');
  });
});

describe("renderEdgePanel", () => {
  it("shows tag, endpoints, and the full sentence", () => {
    const html = renderEdgePanel({
      relationship: "COLLECT", source: "we", target: "email",
      text: "We collect your <email> & more.",
    });
    expect(html).toContain("COLLECT");
    expect(html).toContain("We collect your &lt;email&gt; &amp; more.");
  });

  it("collapses to an empty container when nothing is selected", () => {
    expect(renderEdgePanel(null)).toBe('<div data-role="edge-detail"></div>');
  });
});

describe("renderHistory and renderFormError", () => {
  it("marks active and compare runs and shows status", () => {
    const entries = [
      { runId: "r1", policyId: "p", request: { dr: "pca", clustering: "mbkmeans", seed: 1, params: { k: 5 } } },
      { runId: "r2", policyId: "p", request: { dr: "pca", clustering: "mbkmeans", seed: 1, params: { k: 3 } } },
    ];
    const html = renderHistory(entries, (id) => (id === "r1" ? "done" : "pending"), "r1", "r2");
    expect(html).toContain('class="run active" data-run="r1"');
    expect(html).toContain('class="run compare" data-run="r2"');
    expect(html).toContain("[done]");
    expect(html).toContain("[pending]");
    expect(html).toContain("{&quot;k&quot;:3}");
  });

  it("form errors name the field inline", () => {
    expect(renderFormError({ field: "eps", message: "must be positive" }))
      .toContain("eps: must be positive");
    expect(renderFormError(null)).toBe('<div data-role="form-error"></div>');
  });
});

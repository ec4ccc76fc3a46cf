import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { RunPanel } from "../src/runs.js";
import { FakeService } from "./fakeService.js";

const BASE = "http://svc.test";

function setup(svcOpts: ConstructorParameters<typeof FakeService>[0] = {}) {
  const svc = new FakeService(svcOpts);
  const panel = new RunPanel(new ApiClient(BASE, svc.fetch), { pollInterval: 1 });
  return { svc, panel };
}

async function waitFor(cond: () => boolean, ms = 2000): Promise<void> {
  const t0 = Date.now();
  while (!cond()) {
    if (Date.now() - t0 > ms) throw new Error("timed out waiting");
    await new Promise((r) => setTimeout(r, 2));
  }
}

const REQ = { dr: "pca", clustering: "mbkmeans", seed: 7, params: { k: 5 } };

describe("RunPanel", () => {
  it("submits, polls through pending, and caches the done payload", async () => {
    const { panel } = setup({ pendingPolls: 2 });
    const runId = await panel.submit("offerup", REQ);
    expect(panel.status(runId)).toBe("unknown");
    await waitFor(() => panel.result(runId) !== null);
    const done = panel.result(runId);
    expect(done?.status).toBe("done");
    expect(done?.k_found).toBe(3);
    expect(panel.history).toHaveLength(1);
  });

  it("different k produces a second distinct history entry", async () => {
    const { panel } = setup();
    const r5 = await panel.submit("offerup", { ...REQ, params: { k: 5 } });
    const r3 = await panel.submit("offerup", { ...REQ, params: { k: 3 } });
    expect(r3).not.toBe(r5);
    expect(panel.history.map((h) => h.runId)).toEqual([r5, r3]);
  });

  it("identical params and seed reuse the cached run", async () => {
    const { svc, panel } = setup();
    const first = await panel.submit("offerup", REQ);
    await waitFor(() => panel.result(first) !== null);
    const pollsAfterFirst = svc.requests.filter(
      (r) => r.path === `/api/runs/${first}`).length;

    const second = await panel.submit("offerup", { ...REQ });
    expect(second).toBe(first);
    expect(panel.history).toHaveLength(1);
    expect(svc.computeCount.get(first)).toBe(1);
    // cached done payload means no fresh poll loop was started
    const pollsAfterSecond = svc.requests.filter(
      (r) => r.path === `/api/runs/${first}`).length;
    expect(pollsAfterSecond).toBe(pollsAfterFirst);
  });

  it("keeps at most one poll in flight per run id", async () => {
    const { svc, panel } = setup({ pendingPolls: 4, pollDelayMs: 4 });
    const [a, b] = await Promise.all([
      panel.submit("offerup", REQ),
      panel.submit("offerup", { ...REQ }),
    ]);
    expect(b).toBe(a);
    await waitFor(() => panel.result(a) !== null);
    expect(svc.maxConcurrentGets.get(a)).toBe(1);
  });

  it("polls two different runs independently", async () => {
    const { svc, panel } = setup({ pendingPolls: 2, pollDelayMs: 2 });
    const r1 = await panel.submit("offerup", { ...REQ, seed: 1 });
    const r2 = await panel.submit("offerup", { ...REQ, seed: 2 });
    await waitFor(() => panel.result(r1) !== null && panel.result(r2) !== null);
    expect(svc.maxConcurrentGets.get(r1)).toBe(1);
    expect(svc.maxConcurrentGets.get(r2)).toBe(1);
  });

  it("surfaces 422 validation inline and leaves history alone", async () => {
    const { panel } = setup();
    await expect(panel.submit("offerup", { ...REQ, dr: "sammon" }))
      .rejects.toMatchObject({ status: 422 });
    expect(panel.formError).toEqual({
      field: "dr", message: "unknown method 'sammon'",
    });
    expect(panel.history).toHaveLength(0);

    // a good submission clears the inline error
    await panel.submit("offerup", REQ);
    expect(panel.formError).toBeNull();
  });

  it("failed runs land as error payloads with the service detail", async () => {
    const { panel } = setup({
      failWhen: (req) => (req.dr === "tsne" ? "TooFewPoints: need at least 5" : null),
    });
    const runId = await panel.submit("offerup", { ...REQ, dr: "tsne" });
    await waitFor(() => panel.status(runId) === "error");
    const payload = panel.payloads.get(runId);
    expect(payload?.status).toBe("error");
    expect((payload as { detail: string }).detail).toContain("TooFewPoints");
    expect(panel.result(runId)).toBeNull();
  });

  it("notifies on every state change", async () => {
    const svc = new FakeService();
    let ticks = 0;
    const panel = new RunPanel(new ApiClient(BASE, svc.fetch), {
      pollInterval: 1,
      onChange: () => { ticks += 1; },
    });
    const runId = await panel.submit("offerup", REQ);
    await waitFor(() => panel.result(runId) !== null);
    expect(ticks).toBeGreaterThanOrEqual(2);
  });
});

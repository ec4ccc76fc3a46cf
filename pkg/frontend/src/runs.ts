/**
 * Run panel controller: submits clustering runs, polls them, and keeps the
 * per-session history. All results are cached by run id, so resubmitting
 * identical parameters reuses the service's cached run without re-polling.
 */

import { ApiError, type ApiClient } from "./api.js";
import type { RunDone, RunPayload, RunRequest } from "./types.js";

export interface RunHistoryEntry {
  runId: string;
  policyId: string;
  request: RunRequest;
}

export interface FormError {
  field: string | null;
  message: string;
}

const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class RunPanel {
  private api: ApiClient;
  private pollInterval: number;
  private onChange: () => void;

  history: RunHistoryEntry[] = [];
  payloads: Map<string, RunPayload> = new Map();
  /** Inline validation error from the last submission, if any. */
  formError: FormError | null = null;

  private inflight: Set<string> = new Set();

  constructor(api: ApiClient, opts: { pollInterval?: number; onChange?: () => void } = {}) {
    this.api = api;
    this.pollInterval = opts.pollInterval ?? 400;
    this.onChange = opts.onChange ?? (() => undefined);
  }

  /**
   * Submit a run. Resolves with the run id once the service acknowledges;
   * polling continues in the background until the run completes or errors.
   */
  async submit(policyId: string, req: RunRequest): Promise<string> {
    this.formError = null;
    let runId: string;
    try {
      runId = await this.api.submitRun(policyId, req);
    } catch (err) {
      if (err instanceof ApiError && (err.status === 422 || err.status === 409)) {
        this.formError = { field: err.field, message: err.message };
        this.onChange();
      }
      throw err;
    }
    if (!this.history.some((h) => h.runId === runId)) {
      this.history.push({ runId, policyId, request: req });
    }
    const cached = this.payloads.get(runId);
    if (!cached || cached.status === "pending") {
      void this.poll(runId);
    }
    this.onChange();
    return runId;
  }

  /** Completed payload for a run id, or null if absent or not done yet. */
  result(runId: string | null): RunDone | null {
    if (runId === null) return null;
    const p = this.payloads.get(runId);
    return p !== undefined && p.status === "done" ? p : null;
  }

  status(runId: string): string {
    return this.payloads.get(runId)?.status ?? "unknown";
  }

  /** At most one poll loop per run id is ever in flight. */
  private async poll(runId: string): Promise<void> {
    if (this.inflight.has(runId)) return;
    this.inflight.add(runId);
    try {
      for (;;) {
        const payload = await this.api.getRun(runId);
        this.payloads.set(runId, payload);
        this.onChange();
        if (payload.status !== "pending") return;
        await sleep(this.pollInterval);
      }
    } catch (err) {
      this.payloads.set(runId, {
        status: "error",
        run_id: runId,
        detail: err instanceof Error ? err.message : String(err),
      });
      this.onChange();
    } finally {
      this.inflight.delete(runId);
    }
  }
}

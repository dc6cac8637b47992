// Thin fetch wrapper over the sentinel REST API plus a job poller.

import type { HistoryPayload, Job, ResultPayload } from "./types.js";

export const POLL_INTERVAL_MS = 2000;

export class ApiError extends Error {
  constructor(message: string, readonly status: number, readonly detail?: unknown) {
    super(message);
  }
}

async function parseOrThrow(resp: Response): Promise<any> {
  const body = await resp.json().catch(() => null);
  if (!resp.ok) {
    const detail = body && typeof body === "object" ? (body as any).detail : null;
    throw new ApiError(
      `HTTP ${resp.status}${detail ? `: ${JSON.stringify(detail)}` : ""}`,
      resp.status,
      detail,
    );
  }
  return body;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  async submitImage(
    payload: Blob | ArrayBuffer,
    params: { image_id?: string; region?: string; acquired_at?: string; source?: string } = {},
  ): Promise<{ job_id: string }> {
    const query = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value) query.set(key, value);
    }
    const suffix = query.toString() ? `?${query.toString()}` : "";
    const resp = await this.fetchFn(`${this.baseUrl}/api/images${suffix}`, {
      method: "POST",
      body: payload,
      headers: { "Content-Type": "image/png" },
    });
    return parseOrThrow(resp);
  }

  async getJob(jobId: string): Promise<Job> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/jobs/${jobId}`);
    return parseOrThrow(resp);
  }

  async getResult(jobId: string): Promise<ResultPayload> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/results/${jobId}`);
    return parseOrThrow(resp);
  }

  async getArtifact(jobId: string): Promise<any> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/results/${jobId}`);
    return parseOrThrow(resp);
  }

  async getHistory(region: string, from: string, to: string): Promise<HistoryPayload> {
    const query = new URLSearchParams({ from, to });
    if (region) query.set("region", region);
    const resp = await this.fetchFn(`${this.baseUrl}/api/history?${query.toString()}`);
    return parseOrThrow(resp);
  }
}

export interface PollCallbacks {
  onUpdate?: (job: Job) => void;
  onDone: (job: Job) => void;
  onFailed: (job: Job) => void;
  onError?: (err: unknown) => void;
}

/**
 * Polls one job at a time. Switching to a new job id makes any in-flight
 * response for the previous id stale; stale responses are discarded.
 */
export class JobPoller {
  private currentJobId: string | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly intervalMs: number = POLL_INTERVAL_MS,
  ) {}

  watch(jobId: string, callbacks: PollCallbacks): void {
    this.currentJobId = jobId;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    void this.tick(jobId, callbacks);
  }

  stop(): void {
    this.currentJobId = null;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private async tick(jobId: string, callbacks: PollCallbacks): Promise<void> {
    let job: Job;
    try {
      job = await this.api.getJob(jobId);
    } catch (err) {
      if (this.currentJobId === jobId) callbacks.onError?.(err);
      return;
    }
    if (this.currentJobId !== jobId) return; // stale response, discard
    callbacks.onUpdate?.(job);
    if (job.state === "done") {
      callbacks.onDone(job);
      return;
    }
    if (job.state === "failed") {
      callbacks.onFailed(job);
      return;
    }
    this.timer = setTimeout(() => void this.tick(jobId, callbacks), this.intervalMs);
  }
}

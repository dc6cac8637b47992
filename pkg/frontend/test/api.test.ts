import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, JobPoller, POLL_INTERVAL_MS } from "../src/api.js";
import { jsonResponse } from "./helpers.js";

const flush = () => new Promise((resolve) => setTimeout(resolve, 5));

function jobJson(jobId: string, state: string) {
  return {
    job_id: jobId,
    kind: "detect",
    state,
    submitted_at: "2024-07-01T09:00:00+00:00",
    finished_at: null,
    result_ref: null,
    error: null,
  };
}

describe("ApiClient", () => {
  it("submits image bytes with metadata query params", async () => {
    const fetchFn = vi.fn(() => Promise.resolve(jsonResponse({ job_id: "j1" }, 202)));
    const api = new ApiClient("", fetchFn as unknown as typeof fetch);
    const out = await api.submitImage(new Blob([new Uint8Array(4)]), {
      image_id: "img-1",
      region: "west",
    });
    expect(out.job_id).toBe("j1");
    const [url, init] = fetchFn.mock.calls[0] as [string, RequestInit];
    expect(url).toContain("/api/images?");
    expect(url).toContain("image_id=img-1");
    expect(url).toContain("region=west");
    expect(init.method).toBe("POST");
  });

  it("wraps HTTP failures in ApiError with the detail", async () => {
    const fetchFn = vi.fn(() =>
      Promise.resolve(jsonResponse({ detail: "no job 'x'" }, 404)),
    );
    const api = new ApiClient("", fetchFn as unknown as typeof fetch);
    await expect(api.getJob("x")).rejects.toMatchObject({ status: 404 });
    await api.getJob("x").catch((err) => {
      expect(err).toBeInstanceOf(ApiError);
      expect(String(err)).toContain("no job");
    });
  });

  it("builds history queries with from/to/region", async () => {
    const fetchFn = vi.fn(() =>
      Promise.resolve(jsonResponse({ points: [], growth_rates: [] })),
    );
    const api = new ApiClient("", fetchFn as unknown as typeof fetch);
    await api.getHistory("west", "2024-07-01T00:00", "2024-07-02T00:00");
    const url = String(fetchFn.mock.calls[0][0]);
    expect(url).toContain("/api/history?");
    expect(url).toContain("region=west");
    expect(url).toContain("from=2024-07-01");
    expect(url).toContain("to=2024-07-02");
  });
});

describe("JobPoller", () => {
  it("default polling interval is two seconds", () => {
    expect(POLL_INTERVAL_MS).toBe(2000);
  });

  it("discards stale responses after switching jobs", async () => {
    let releaseA: (value: Response) => void = () => {};
    const pendingA = new Promise<Response>((resolve) => {
      releaseA = resolve;
    });
    const fetchFn = vi.fn((url: string) => {
      if (url.endsWith("/api/jobs/job-a")) return pendingA;
      return Promise.resolve(jsonResponse(jobJson("job-b", "done")));
    });
    const api = new ApiClient("", fetchFn as unknown as typeof fetch);
    const poller = new JobPoller(api, 1);

    const events: string[] = [];
    poller.watch("job-a", {
      onUpdate: (job) => events.push(`update:${job.job_id}`),
      onDone: (job) => events.push(`done:${job.job_id}`),
      onFailed: (job) => events.push(`failed:${job.job_id}`),
    });
    poller.watch("job-b", {
      onUpdate: (job) => events.push(`update:${job.job_id}`),
      onDone: (job) => events.push(`done:${job.job_id}`),
      onFailed: (job) => events.push(`failed:${job.job_id}`),
    });
    await flush();
    releaseA(jsonResponse(jobJson("job-a", "done")));
    await flush();
    expect(events).toEqual(["update:job-b", "done:job-b"]);
  });

  it("stop() prevents further callbacks", async () => {
    const fetchFn = vi.fn(() => Promise.resolve(jsonResponse(jobJson("j", "running"))));
    const api = new ApiClient("", fetchFn as unknown as typeof fetch);
    const poller = new JobPoller(api, 1);
    const events: string[] = [];
    poller.watch("j", {
      onUpdate: () => events.push("update"),
      onDone: () => events.push("done"),
      onFailed: () => events.push("failed"),
    });
    await flush();
    poller.stop();
    const seen = events.length;
    await flush();
    await flush();
    expect(events.length).toBe(seen);
  });
});

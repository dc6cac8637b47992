// Upload view: pick a raster, submit, watch the job, hand off to the
// result view. Oversized files are rejected before any network call.

import { ApiClient, JobPoller } from "./api.js";
import type { Job } from "./types.js";

export const MAX_UPLOAD_BYTES = 25 * 1024 * 1024;

export interface SubmitCallbacks {
  onDone: (job: Job) => void;
}

export function renderSubmitView(
  container: HTMLElement,
  api: ApiClient,
  poller: JobPoller,
  callbacks: SubmitCallbacks,
): void {
  container.innerHTML = "";
  container.classList.add("submit-view");

  const form = document.createElement("form");
  const file = document.createElement("input");
  file.type = "file";
  file.accept = "image/*";
  file.name = "raster";
  const imageId = document.createElement("input");
  imageId.placeholder = "image id (optional)";
  imageId.name = "image_id";
  const region = document.createElement("input");
  region.placeholder = "region tag (optional)";
  region.name = "region";
  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = "Submit for analysis";
  form.append(file, imageId, region, button);

  const status = document.createElement("p");
  status.className = "submit-status";
  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.hidden = true;

  const retry = document.createElement("button");
  retry.type = "button";
  retry.textContent = "Retry";
  retry.addEventListener("click", () => {
    banner.hidden = true;
    void doSubmit();
  });

  function showError(message: string): void {
    banner.hidden = false;
    banner.textContent = "";
    const text = document.createElement("span");
    text.textContent = message;
    banner.append(text, " ", retry);
  }

  async function doSubmit(): Promise<void> {
    const chosen = file.files?.[0];
    if (!chosen) {
      showError("choose an image first");
      return;
    }
    if (chosen.size > MAX_UPLOAD_BYTES) {
      showError(
        `file is ${chosen.size} bytes; limit is ${MAX_UPLOAD_BYTES} (rejected client-side)`,
      );
      return;
    }
    status.textContent = "uploading...";
    let jobId: string;
    try {
      const resp = await api.submitImage(chosen, {
        image_id: imageId.value || undefined,
        region: region.value || undefined,
      });
      jobId = resp.job_id;
    } catch (err) {
      status.textContent = "";
      showError(`upload failed: ${String(err)}`);
      return;
    }
    status.textContent = `job ${jobId}: queued`;
    poller.watch(jobId, {
      onUpdate: (job) => {
        status.textContent = `job ${job.job_id}: ${job.state}`;
      },
      onDone: (job) => {
        status.textContent = `job ${job.job_id}: done`;
        callbacks.onDone(job);
      },
      onFailed: (job) => {
        status.textContent = "";
        showError(`job failed: ${job.error ?? "unknown error"}`);
      },
      onError: (err) => {
        status.textContent = "";
        showError(`poll failed: ${String(err)}`);
      },
    });
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    banner.hidden = true;
    void doSubmit();
  });

  container.append(form, status, banner);
}

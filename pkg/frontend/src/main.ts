// Single-page wiring: hash routes -> views, all data via the REST API.

import { ApiClient, JobPoller } from "./api.js";
import { renderJudgeComparison, renderMetricsGrid } from "./comparison.js";
import { renderHistoryChart, renderRangePicker } from "./historyChart.js";
import { renderOverlay } from "./overlay.js";
import { renderRiskPanel } from "./riskPanel.js";
import { renderSubmitView } from "./submit.js";
import type { ComparisonPayload, MetricsReportPayload } from "./types.js";

const api = new ApiClient("");
const poller = new JobPoller(api);

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function route(): void {
  const hash = window.location.hash || "#/submit";
  const main = el("view");
  poller.stop();

  if (hash.startsWith("#/result/")) {
    const jobId = hash.slice("#/result/".length);
    void showResult(main, jobId);
  } else if (hash === "#/history") {
    showHistory(main);
  } else if (hash === "#/compare") {
    showComparison(main);
  } else {
    renderSubmitView(main, api, poller, {
      onDone: (job) => {
        window.location.hash = `#/result/${job.job_id}`;
      },
    });
  }
}

async function showResult(main: HTMLElement, jobId: string): Promise<void> {
  main.innerHTML = "<p>loading result...</p>";
  let result;
  try {
    result = await api.getResult(jobId);
  } catch (err) {
    main.innerHTML = "";
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.textContent = `could not load result: ${String(err)}`;
    main.appendChild(banner);
    return;
  }
  main.innerHTML = "";
  const title = document.createElement("h2");
  title.textContent = `Result for ${result.image_id}`;
  main.appendChild(title);

  const coverage = document.createElement("p");
  coverage.className = "coverage-line";
  coverage.textContent =
    `wildfire ${result.detection.coverage.wildfire_coverage_pct.toFixed(2)}% | ` +
    `smoke ${result.detection.coverage.smoke_coverage_pct.toFixed(2)}%`;
  main.appendChild(coverage);

  const overlayHost = document.createElement("div");
  renderOverlay(overlayHost, result.detection.detections, {
    imageWidth: 416,
    imageHeight: 416,
    scale: 1,
  });
  main.appendChild(overlayHost);

  const riskHost = document.createElement("div");
  renderRiskPanel(riskHost, result.risk_report);
  main.appendChild(riskHost);
}

function showHistory(main: HTMLElement): void {
  main.innerHTML = "";
  const pickerHost = document.createElement("div");
  const chartHost = document.createElement("div");
  main.append(pickerHost, chartHost);

  const now = new Date();
  const dayAgo = new Date(now.getTime() - 24 * 3600 * 1000);
  renderRangePicker(
    pickerHost,
    {
      region: "",
      from: dayAgo.toISOString().slice(0, 16),
      to: now.toISOString().slice(0, 16),
    },
    (values) => {
      void api
        .getHistory(values.region, values.from, values.to)
        .then((history) => renderHistoryChart(chartHost, history))
        .catch((err) => {
          chartHost.innerHTML = "";
          const banner = document.createElement("div");
          banner.className = "error-banner";
          banner.textContent = String(err);
          chartHost.appendChild(banner);
        });
    },
  );
  renderHistoryChart(chartHost, { points: [], growth_rates: [] });
}

function showComparison(main: HTMLElement): void {
  main.innerHTML = "";
  const intro = document.createElement("p");
  intro.textContent =
    "paste evaluation/judge artifact JSON (from /api/results/{job_id}) to compare models";
  const gridHost = document.createElement("div");
  const judgeHost = document.createElement("div");
  const input = document.createElement("textarea");
  input.rows = 6;
  input.placeholder = '{"metrics": [...], "judge": {...}}';
  const load = document.createElement("button");
  load.textContent = "Render";
  load.addEventListener("click", () => {
    try {
      const doc = JSON.parse(input.value) as {
        metrics?: MetricsReportPayload[];
        judge?: ComparisonPayload;
      };
      renderMetricsGrid(gridHost, doc.metrics ?? []);
      if (doc.judge) renderJudgeComparison(judgeHost, doc.judge);
    } catch (err) {
      gridHost.textContent = `bad JSON: ${String(err)}`;
    }
  });
  main.append(intro, input, load, gridHost, judgeHost);
  renderMetricsGrid(gridHost, []);
}

export function start(): void {
  window.addEventListener("hashchange", route);
  route();
}

if (typeof document !== "undefined" && document.getElementById("view")) {
  start();
}

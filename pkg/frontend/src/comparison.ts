// Model comparison: detection-metrics grid plus judge mean scores.
// Cells echo the API's JSON values; only number formatting happens here.

import type { ComparisonPayload, MetricsReportPayload } from "./types.js";

export function renderMetricsGrid(
  container: HTMLElement,
  reports: MetricsReportPayload[],
): void {
  container.innerHTML = "";
  container.classList.add("metrics-grid");

  if (reports.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "no evaluation reports loaded";
    container.appendChild(empty);
    return;
  }

  const table = document.createElement("table");
  const head = document.createElement("tr");
  for (const col of ["Model", "mAP@0.5", "Prec(%)", "Rec(%)", "F1(%)"]) {
    const th = document.createElement("th");
    th.textContent = col;
    head.appendChild(th);
  }
  table.appendChild(head);

  for (const report of reports) {
    const row = document.createElement("tr");
    row.dataset.model = report.model_id;
    const cells = [
      report.model_id,
      String(report.map_50),
      String(report.precision_pct),
      String(report.recall_pct),
      String(report.f1_pct),
    ];
    for (const text of cells) {
      const td = document.createElement("td");
      td.textContent = text;
      row.appendChild(td);
    }
    table.appendChild(row);
  }
  container.appendChild(table);
}

export function renderJudgeComparison(
  container: HTMLElement,
  comparison: ComparisonPayload,
): void {
  container.innerHTML = "";
  container.classList.add("judge-comparison");

  const list = document.createElement("div");
  list.className = "judge-means";
  for (const [model, stats] of Object.entries(comparison.model_stats)) {
    const entry = document.createElement("div");
    entry.className = "judge-mean";
    entry.dataset.model = model;
    if (comparison.winner === model) entry.classList.add("winner");
    const name = document.createElement("span");
    name.className = "model-name";
    name.textContent = model;
    const mean = document.createElement("span");
    mean.className = "mean-score";
    mean.textContent = stats.mean.toFixed(2);
    const n = document.createElement("span");
    n.className = "sample-count";
    n.textContent = `n=${stats.n}`;
    entry.append(name, mean, n);
    list.appendChild(entry);
  }
  container.appendChild(list);

  const verdict = document.createElement("p");
  verdict.className = "judge-verdict";
  verdict.textContent =
    comparison.winner === null ? "tie" : `winner: ${comparison.winner}`;
  container.appendChild(verdict);
}

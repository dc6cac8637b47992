// Structured risk report panel: the five report sections plus a severity
// badge, with a marker when severity was derived from coverage.

import type { RiskReportPayload, Severity } from "./types.js";

export const SEVERITY_COLORS: Record<Severity, string> = {
  low: "#2e7d32",
  moderate: "#f9a825",
  high: "#ef6c00",
  extreme: "#c62828",
};

export function renderRiskPanel(
  container: HTMLElement,
  report: RiskReportPayload | null,
): void {
  container.innerHTML = "";
  container.classList.add("risk-panel");

  if (!report) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "no risk report for this result";
    container.appendChild(empty);
    return;
  }

  const badge = document.createElement("span");
  badge.className = `severity-badge severity-${report.severity}`;
  badge.style.background = SEVERITY_COLORS[report.severity];
  badge.textContent = report.severity.toUpperCase();
  const heading = document.createElement("h3");
  heading.append("Severity: ", badge);
  if (report.severity_from_fallback) {
    const note = document.createElement("small");
    note.className = "fallback-note";
    note.textContent = " derived from coverage";
    heading.appendChild(note);
  }
  container.appendChild(heading);

  const sections: Array<[string, string]> = [
    ["General observations", report.general_observations],
    ["Fire behavior", report.fire_behavior],
    ["Spread potential", report.spread_potential],
  ];
  for (const [title, text] of sections) {
    const section = document.createElement("section");
    const h = document.createElement("h4");
    h.textContent = title;
    const p = document.createElement("p");
    p.textContent = text || "(not provided)";
    section.append(h, p);
    container.appendChild(section);
  }

  const risks = document.createElement("section");
  const rh = document.createElement("h4");
  rh.textContent = "Critical risks";
  risks.appendChild(rh);
  const rl = document.createElement("ul");
  rl.className = "risk-list";
  for (const item of report.critical_risks) {
    const li = document.createElement("li");
    li.textContent = item;
    rl.appendChild(li);
  }
  risks.appendChild(rl);
  container.appendChild(risks);

  const recs = document.createElement("section");
  const ah = document.createElement("h4");
  ah.textContent = "Recommendations";
  recs.appendChild(ah);
  const checklist = document.createElement("ul");
  checklist.className = "checklist";
  for (const item of report.recommendations) {
    const li = document.createElement("li");
    const box = document.createElement("input");
    box.type = "checkbox";
    li.append(box, ` ${item}`);
    checklist.appendChild(li);
  }
  recs.appendChild(checklist);
  container.appendChild(recs);

  const source = document.createElement("p");
  source.className = "report-source";
  source.textContent = `generated by ${report.source_model}`;
  container.appendChild(source);
}

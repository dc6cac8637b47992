import { beforeEach, describe, expect, it } from "vitest";

import { SEVERITY_COLORS, renderRiskPanel } from "../src/riskPanel.js";
import { RISK_REPORT } from "./helpers.js";

let host: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "<div id='host'></div>";
  host = document.getElementById("host")!;
});

describe("renderRiskPanel", () => {
  it("renders all five report sections", () => {
    renderRiskPanel(host, RISK_REPORT);
    const headings = Array.from(host.querySelectorAll("h4")).map((h) => h.textContent);
    expect(headings).toEqual([
      "General observations",
      "Fire behavior",
      "Spread potential",
      "Critical risks",
      "Recommendations",
    ]);
    expect(host.textContent).toContain("Dense smoke to the northeast.");
    expect(host.textContent).toContain("Active front along the ridge.");
    expect(host.textContent).toContain("Wind-driven eastward growth.");
  });

  it("shows a red badge for extreme severity", () => {
    renderRiskPanel(host, RISK_REPORT);
    const badge = host.querySelector<HTMLElement>(".severity-badge")!;
    expect(badge.textContent).toBe("EXTREME");
    expect(badge.classList.contains("severity-extreme")).toBe(true);
    expect(badge.style.background).toBe("rgb(198, 40, 40)");
    expect(SEVERITY_COLORS.extreme).toBe("#c62828");
    expect(SEVERITY_COLORS.low).toBe("#2e7d32");
  });

  it("flags coverage-derived severity", () => {
    renderRiskPanel(host, { ...RISK_REPORT, severity_from_fallback: true });
    expect(host.querySelector(".fallback-note")?.textContent).toContain(
      "derived from coverage",
    );
    renderRiskPanel(host, RISK_REPORT);
    expect(host.querySelector(".fallback-note")).toBeNull();
  });

  it("renders recommendations as a checklist", () => {
    renderRiskPanel(host, RISK_REPORT);
    const items = host.querySelectorAll(".checklist li");
    expect(items.length).toBe(2);
    expect(items[0].querySelector("input[type='checkbox']")).not.toBeNull();
    expect(items[0].textContent).toContain("dispatch aircraft");
  });

  it("handles a missing report", () => {
    renderRiskPanel(host, null);
    expect(host.querySelector(".empty-state")?.textContent).toContain(
      "no risk report",
    );
  });
});

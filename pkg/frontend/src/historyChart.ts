// Coverage-over-time line chart (hand-rolled SVG). Growth-rate tooltips
// show the API's pp/h values verbatim; nothing is recomputed here.

import type { HistoryPayload } from "./types.js";

const WIDTH = 640;
const HEIGHT = 240;
const PAD = 32;

const SVG_NS = "http://www.w3.org/2000/svg";

export function renderHistoryChart(
  container: HTMLElement,
  history: HistoryPayload,
): void {
  container.innerHTML = "";
  container.classList.add("history-chart");

  if (history.points.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "no coverage records in this range";
    container.appendChild(empty);
    return;
  }

  const times = history.points.map((p) => Date.parse(p.timestamp));
  const t0 = Math.min(...times);
  const t1 = Math.max(...times);
  const span = Math.max(t1 - t0, 1);
  const maxPct = Math.max(
    ...history.points.map((p) => Math.max(p.wildfire_pct, p.smoke_pct)),
    1,
  );

  const x = (t: number) => PAD + ((t - t0) / span) * (WIDTH - 2 * PAD);
  const y = (pct: number) => HEIGHT - PAD - (pct / maxPct) * (HEIGHT - 2 * PAD);

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("width", String(WIDTH));
  svg.setAttribute("height", String(HEIGHT));

  for (const [series, color] of [
    ["wildfire_pct", "#d32f2f"],
    ["smoke_pct", "#808080"],
  ] as const) {
    const line = document.createElementNS(SVG_NS, "polyline");
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", color);
    line.setAttribute("stroke-width", "2");
    line.setAttribute(
      "points",
      history.points
        .map((p, i) => `${x(times[i])},${y(p[series])}`)
        .join(" "),
    );
    line.dataset.series = series;
    svg.appendChild(line);
  }

  history.points.forEach((p, i) => {
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(x(times[i])));
    dot.setAttribute("cy", String(y(p.wildfire_pct)));
    dot.setAttribute("r", "4");
    dot.setAttribute("fill", "#d32f2f");
    dot.classList.add("history-point");
    dot.dataset.timestamp = p.timestamp;
    dot.dataset.wildfirePct = String(p.wildfire_pct);
    dot.dataset.smokePct = String(p.smoke_pct);

    // Tooltip carries the API growth rate for the segment ending here.
    const rate = i > 0 ? history.growth_rates[i - 1] : undefined;
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = rate
      ? `${p.timestamp}: wildfire ${p.wildfire_pct}% (${rate.wildfire_pp_per_hour} pp/h)`
      : `${p.timestamp}: wildfire ${p.wildfire_pct}%`;
    if (rate) dot.dataset.ppPerHour = String(rate.wildfire_pp_per_hour);
    dot.appendChild(title);
    svg.appendChild(dot);
  });

  container.appendChild(svg);

  const legend = document.createElement("p");
  legend.className = "chart-legend";
  legend.textContent = "red: wildfire coverage %  gray: smoke coverage %";
  container.appendChild(legend);
}

export interface RangePickerValues {
  region: string;
  from: string;
  to: string;
}

export function renderRangePicker(
  container: HTMLElement,
  initial: RangePickerValues,
  onApply: (values: RangePickerValues) => void,
): void {
  container.innerHTML = "";
  container.classList.add("range-picker");

  const region = document.createElement("input");
  region.placeholder = "region";
  region.value = initial.region;
  region.name = "region";
  const from = document.createElement("input");
  from.type = "datetime-local";
  from.value = initial.from;
  from.name = "from";
  const to = document.createElement("input");
  to.type = "datetime-local";
  to.value = initial.to;
  to.name = "to";
  const apply = document.createElement("button");
  apply.textContent = "Load";
  apply.addEventListener("click", () =>
    onApply({ region: region.value, from: from.value, to: to.value }),
  );
  container.append(region, from, to, apply);
}

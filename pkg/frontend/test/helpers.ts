import type {
  ComparisonPayload,
  HistoryPayload,
  MetricsReportPayload,
  ResultPayload,
  RiskReportPayload,
} from "../src/types.js";

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export const RISK_REPORT: RiskReportPayload = {
  general_observations: "Dense smoke to the northeast.",
  fire_behavior: "Active front along the ridge.",
  spread_potential: "Wind-driven eastward growth.",
  severity: "extreme",
  critical_risks: ["highway corridor", "structures nearby"],
  recommendations: ["dispatch aircraft", "stage crews east"],
  raw_response: "…",
  source_model: "alpha",
  severity_from_fallback: false,
};

export const RESULT: ResultPayload = {
  record_id: "rec-1",
  image_id: "img-1",
  acquired_at: "2024-07-01T09:00:00+00:00",
  region_tag: "west",
  detection: {
    image_id: "img-1",
    model_id: "mock-yolo",
    detections: [
      { box: [0, 0, 208, 208], class: "wildfire", confidence: 0.9 },
      { box: [300, 310, 380, 400], class: "smoke", confidence: 0.55 },
    ],
    coverage: { wildfire_coverage_pct: 25.0, smoke_coverage_pct: 4.16 },
  },
  risk_report: RISK_REPORT,
};

export const HISTORY: HistoryPayload = {
  points: [
    { timestamp: "2024-07-01T09:00:00+00:00", wildfire_pct: 5.0, smoke_pct: 1.0 },
    { timestamp: "2024-07-01T10:00:00+00:00", wildfire_pct: 7.0, smoke_pct: 1.5 },
    { timestamp: "2024-07-01T11:00:00+00:00", wildfire_pct: 8.0, smoke_pct: 2.0 },
  ],
  growth_rates: [
    {
      from: "2024-07-01T09:00:00+00:00",
      to: "2024-07-01T10:00:00+00:00",
      wildfire_pp_per_hour: 2.0,
    },
    {
      from: "2024-07-01T10:00:00+00:00",
      to: "2024-07-01T11:00:00+00:00",
      wildfire_pp_per_hour: 1.0,
    },
  ],
};

export const METRICS: MetricsReportPayload[] = [
  {
    model_id: "yolo-a",
    per_class_ap: { wildfire: 0.81, smoke: 0.62 },
    map_50: 0.715,
    precision_pct: 81.1,
    recall_pct: 74.8,
    f1_pct: 77.8,
    counts: { images: 10, ground_truths: 25, detections: 24 },
  },
  {
    model_id: "yolo-b",
    per_class_ap: { wildfire: 0.7, smoke: 0.5 },
    map_50: 0.6,
    precision_pct: 51.7,
    recall_pct: 89.8,
    f1_pct: 65.6,
    counts: { images: 10, ground_truths: 25, detections: 40 },
  },
];

export const COMPARISON: ComparisonPayload = {
  model_stats: {
    alpha: { mean: 7.0, n: 3 },
    bravo: { mean: 6.33, n: 3 },
  },
  winner: "alpha",
  per_item_deltas: { i0: 1, i1: 2, i2: -1 },
};

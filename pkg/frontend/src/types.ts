// API payload shapes, mirrored verbatim from the backend's JSON.

export type JobState = "queued" | "running" | "done" | "failed";

export interface Job {
  job_id: string;
  kind: string;
  state: JobState;
  submitted_at: string;
  finished_at: string | null;
  result_ref: string | null;
  error: string | null;
}

export type ClassName = "wildfire" | "smoke";

export interface BoxDetection {
  box: [number, number, number, number]; // x_min, y_min, x_max, y_max (image px)
  class: ClassName;
  confidence: number;
}

export interface Coverage {
  wildfire_coverage_pct: number;
  smoke_coverage_pct: number;
}

export interface DetectionPayload {
  image_id: string;
  model_id: string;
  detections: BoxDetection[];
  coverage: Coverage;
  inference_ms?: number;
}

export type Severity = "low" | "moderate" | "high" | "extreme";

export interface RiskReportPayload {
  general_observations: string;
  fire_behavior: string;
  spread_potential: string;
  severity: Severity;
  critical_risks: string[];
  recommendations: string[];
  raw_response: string;
  source_model: string;
  severity_from_fallback: boolean;
}

export interface ResultPayload {
  record_id: string;
  image_id: string;
  acquired_at: string;
  region_tag: string | null;
  detection: DetectionPayload;
  risk_report: RiskReportPayload | null;
}

export interface TimeSeriesPoint {
  timestamp: string;
  wildfire_pct: number;
  smoke_pct: number;
}

export interface GrowthRateEntry {
  from: string;
  to: string;
  wildfire_pp_per_hour: number;
}

export interface HistoryPayload {
  points: TimeSeriesPoint[];
  growth_rates: GrowthRateEntry[];
}

export interface MetricsReportPayload {
  model_id: string;
  per_class_ap: Record<string, number>;
  map_50: number;
  precision_pct: number;
  recall_pct: number;
  f1_pct: number;
  counts: Record<string, number>;
}

export interface ModelStats {
  mean: number;
  n: number;
}

export interface ComparisonPayload {
  model_stats: Record<string, ModelStats>;
  winner: string | null;
  per_item_deltas: Record<string, number>;
}

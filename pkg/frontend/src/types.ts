// Payload shapes mirrored from the audit service API. The UI never derives
// metric values from these; it displays them verbatim.

export interface LeaderboardEntry {
  model_id: string;
  faas: number | null;
  faas_sentinel: string | null;
  wer: number;
  overall_score: number;
  tier: string;
  created_at: string;
  version: number;
}

export interface LrtPayload {
  stat: number;
  df: number;
  p_value: number;
}

export interface GroupPayload {
  predicted_wer: number;
  raw_score: number;
  proportion: number;
}

export interface CategoryPayload {
  attribute: string;
  category_score: number;
  adjusted_score: number;
  tier: string;
  reference_level: string;
  lrt: LrtPayload;
  groups: Record<string, GroupPayload>;
}

export interface AuditPayload {
  model_id: string;
  wer: number;
  faas: number | null;
  faas_sentinel: string | null;
  overall_score: number;
  tier: string;
  created_at: string;
  coverage: number;
  categories: CategoryPayload[];
}

export interface BoxPayload {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
}

export interface HistogramPayload {
  bin_width: number;
  range: [number, number];
  counts: number[];
  overflow: number;
}

export interface LevelPlotPayload {
  count: number;
  box: BoxPayload;
  histogram: HistogramPayload;
}

export interface PlotsPayload {
  model_id: string;
  histogram: HistogramPayload;
  attributes: Record<string, { levels: Record<string, LevelPlotPayload> }>;
}

export interface JobPayload {
  job_id: string;
  model_id: string;
  state: "queued" | "running" | "done" | "failed";
  error: string | null;
  error_kind: string | null;
  result_ref: string | null;
}

export type SortColumn = "model_id" | "faas" | "wer" | "overall_score" | "tier";

export interface SortState {
  column: SortColumn;
  descending: boolean;
}

export interface LeaderboardViewModel {
  rows: LeaderboardEntry[];
  etag: string | null;
  sort: SortState | null; // null keeps the API's FAAS-descending order
  refreshedAt: string;
}

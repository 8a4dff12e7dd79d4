// Shapes of the JSON payloads served by the session service. The client
// renders these verbatim; it computes no recommendations of its own.

export type ColumnKind = "numeric" | "categorical" | "other";

export interface DatasetInfo {
  dataset_id: string;
  name: string;
  schema: [string, ColumnKind][];
  row_count: number;
}

export interface Recommendation {
  block_id: string;
  name: string;
  description: string;
  tags: string[];
  probability: number;
}

export interface PanelView {
  panel_index: number;
  advisors: Record<string, Recommendation[]>;
  selected: string | null;
  selected_advisor: string | null;
}

export interface OutputFrameTab {
  schema: [string, ColumnKind][];
  rows: unknown[][];
  full_row_count: number;
  truncated: boolean;
}

export interface CellTabs {
  output_data_frame: OutputFrameTab;
  analysis_results: { stdout: string; images: string[] };
  script: string;
  whats_this_analysis: string;
  analysis_progress: string[];
}

export interface CellView {
  cell_index: number;
  block_id: string;
  name: string;
  execution_status: "ok" | "error";
  error_message: string | null;
  tabs: CellTabs;
}

export interface SessionView {
  session_id: string;
  created_at: string;
  updated_at: string;
  live: boolean;
  dataset: DatasetInfo;
  cells: CellView[];
  panels: PanelView[];
  cursors: [string, string][];
}

export interface CatalogBlock {
  id: string;
  name: string;
  description: string;
  tags: string[];
  origin: string;
  requirements: Record<string, number>;
  code: string;
}

export interface ApiErrorBody {
  error: { code: string; message: string; http_status: number };
}

export type TabName = keyof CellTabs;

export const TAB_ORDER: [TabName, string][] = [
  ["output_data_frame", "Output Data Frame"],
  ["analysis_results", "Analysis Results"],
  ["script", "Script"],
  ["whats_this_analysis", "What's this Analysis?"],
  ["analysis_progress", "Analysis Progress"],
];

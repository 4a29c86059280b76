/**
 * Shapes of the v1 adjudication API responses. The UI renders only what the
 * API returns; nothing here is UI-only truth.
 */

export interface SessionSummary {
  session_id: string;
  schema_id: string;
  total: number;
  resolved: number;
}

export interface ClassInfo {
  name: string;
  code: string;
  definition: string;
}

export interface QueueItem {
  context_id: string;
  target_label: string;
  text: string;
  /** annotator key -> class code; keys look like "Human:alice" or "LLM:...". */
  labels: Record<string, string>;
  rationales: Record<string, string>;
}

export interface Resolution {
  context_id: string;
  label: string;
  resolver: string;
  note: string;
  timestamp: string;
}

export interface SessionDetail extends SessionSummary {
  classes: ClassInfo[];
  queue: QueueItem[];
  resolutions: Resolution[];
}

export interface NextResponse {
  done: boolean;
  item: QueueItem | null;
}

export interface ExportEntry {
  context_id: string;
  label: string;
}

export interface ExportResponse {
  schema_id: string;
  entries: ExportEntry[];
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}

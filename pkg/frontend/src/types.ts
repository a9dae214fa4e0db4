export interface TaskSummary {
  task_id: string;
  title: string;
  programming_language: string;
}

export interface TaskDetail extends TaskSummary {
  description_md: string;
  starter_code: string | null;
}

export interface PhaseOutcome {
  success: boolean;
  output: string;
  duration_ms: number;
}

export interface TestsOutcome {
  passed: number;
  total: number;
  output: string;
  duration_ms: number;
}

export interface SubmissionResult {
  submission_id: string;
  task_id: string;
  received_at: string;
  compile: PhaseOutcome;
  tests: TestsOutcome | null;
}

/** One entry of the SSE `citations` event; the source list renders exactly this payload. */
export interface Citation {
  footnote_id: number;
  video_file: string;
  start_ms: number;
  url: string;
}

export interface DoneMetrics {
  mode: "with_lecture" | "without_lecture";
  degraded: boolean;
  time_to_first_token_ms: number;
  total_ms: number;
  run1_ms: number;
  chunks_used: number;
  citations_count: number;
}

export type FeedbackPhase = "idle" | "waiting" | "streaming" | "done" | "error";

export interface FeedbackStreamHandlers {
  onToken(text: string): void;
  onCitations(citations: Citation[]): void;
  onDone(metrics: DoneMetrics): void;
  onError(message: string): void;
}

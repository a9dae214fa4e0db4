import { readSseStream } from "./sse.js";
import type {
  Citation,
  DoneMetrics,
  FeedbackStreamHandlers,
  SubmissionResult,
  TaskDetail,
  TaskSummary,
} from "./types.js";

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let message = `${response.status}`;
    try {
      const body = (await response.json()) as { message?: string };
      if (body.message) {
        message = body.message;
      }
    } catch {
      /* non-JSON error body */
    }
    throw new Error(message);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  async listTasks(): Promise<TaskSummary[]> {
    return asJson(await fetch(`${this.base}/api/tasks`));
  }

  async getTask(taskId: string): Promise<TaskDetail> {
    return asJson(await fetch(`${this.base}/api/tasks/${encodeURIComponent(taskId)}`));
  }

  async submit(taskId: string, code: string): Promise<SubmissionResult> {
    return asJson(
      await fetch(`${this.base}/api/tasks/${encodeURIComponent(taskId)}/submissions`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ code }),
      }),
    );
  }

  /**
   * Request a feedback stream and dispatch its SSE events. Resolves once the
   * stream has ended (after `done`, an `error` event, or a dropped body).
   */
  async streamFeedback(
    submissionId: string,
    withLecture: boolean,
    handlers: FeedbackStreamHandlers,
  ): Promise<void> {
    let response: Response;
    try {
      response = await fetch(
        `${this.base}/api/submissions/${encodeURIComponent(submissionId)}/feedback?lecture=${withLecture}`,
        { method: "POST" },
      );
    } catch (error) {
      handlers.onError(error instanceof Error ? error.message : "network error");
      return;
    }
    if (!response.ok || response.body === null) {
      handlers.onError(`feedback request failed (${response.status})`);
      return;
    }
    try {
      await readSseStream(response.body, (event) => {
        switch (event.event) {
          case "token":
            handlers.onToken((JSON.parse(event.data) as { text: string }).text);
            break;
          case "citations":
            handlers.onCitations(JSON.parse(event.data) as Citation[]);
            break;
          case "done":
            handlers.onDone(JSON.parse(event.data) as DoneMetrics);
            break;
          case "error":
            handlers.onError((JSON.parse(event.data) as { message: string }).message);
            break;
          default:
            break;
        }
      });
    } catch (error) {
      handlers.onError(error instanceof Error ? error.message : "stream dropped");
    }
  }
}

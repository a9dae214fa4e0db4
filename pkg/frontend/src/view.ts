import type { ApiClient } from "./api.js";
import { formatTimestamp, renderMarkdown } from "./markdown.js";
import { VideoModal } from "./modal.js";
import { STRINGS } from "./strings.js";
import type { Citation, FeedbackPhase, SubmissionResult, TaskDetail, TaskSummary } from "./types.js";

interface ViewState {
  selectedTask: TaskDetail | null;
  submission: SubmissionResult | null;
  feedbackPhase: FeedbackPhase;
  feedbackText: string;
  citations: Citation[];
  activeCitation: { videoUrl: string; startSeconds: number } | null;
  lastRequestWithLecture: boolean;
  errorMessage: string;
}

export class AppView {
  readonly state: ViewState = {
    selectedTask: null,
    submission: null,
    feedbackPhase: "idle",
    feedbackText: "",
    citations: [],
    activeCitation: null,
    lastRequestWithLecture: false,
    errorMessage: "",
  };

  readonly modal: VideoModal;

  private readonly doc: Document;
  private readonly api: ApiClient;
  private taskList!: HTMLUListElement;
  private taskTitle!: HTMLHeadingElement;
  private taskDescription!: HTMLDivElement;
  private editor!: HTMLTextAreaElement;
  private submitButton!: HTMLButtonElement;
  private compilePanel!: HTMLPreElement;
  private testsPanel!: HTMLPreElement;
  private fastButton!: HTMLButtonElement;
  private lectureButton!: HTMLButtonElement;
  private waitingIndicator!: HTMLDivElement;
  private feedbackBody!: HTMLDivElement;
  private sourcesSection!: HTMLDivElement;
  private errorNotice!: HTMLDivElement;
  private retryButton!: HTMLButtonElement;
  private waitingTimer: ReturnType<typeof setInterval> | null = null;

  constructor(doc: Document, api: ApiClient) {
    this.doc = doc;
    this.api = api;
    this.modal = new VideoModal(doc);
  }

  mount(root: HTMLElement): void {
    const d = this.doc;
    root.innerHTML = "";

    const heading = d.createElement("h1");
    heading.textContent = STRINGS.appTitle;

    // region A: task list + description
    const tasksHeading = d.createElement("h2");
    tasksHeading.textContent = STRINGS.taskListHeading;
    this.taskList = d.createElement("ul");
    this.taskList.className = "task-list";
    this.taskTitle = d.createElement("h3");
    this.taskTitle.className = "task-title";
    this.taskDescription = d.createElement("div");
    this.taskDescription.className = "task-description";

    // region B: editor + submit
    const editorHeading = d.createElement("h2");
    editorHeading.textContent = STRINGS.editorHeading;
    this.editor = d.createElement("textarea");
    this.editor.className = "code-editor";
    this.editor.rows = 16;
    this.editor.spellcheck = false;
    this.submitButton = d.createElement("button");
    this.submitButton.type = "button";
    this.submitButton.className = "submit-code";
    this.submitButton.textContent = STRINGS.submitButton;
    this.submitButton.addEventListener("click", () => void this.submitCode());

    // region D: compiler / test panels
    const compileHeading = d.createElement("h2");
    compileHeading.textContent = STRINGS.compileHeading;
    this.compilePanel = d.createElement("pre");
    this.compilePanel.className = "compile-panel";
    const testsHeading = d.createElement("h2");
    testsHeading.textContent = STRINGS.testsHeading;
    this.testsPanel = d.createElement("pre");
    this.testsPanel.className = "tests-panel";

    // region C: feedback controls, stream, sources
    const feedbackHeading = d.createElement("h2");
    feedbackHeading.textContent = STRINGS.feedbackHeading;
    this.fastButton = d.createElement("button");
    this.fastButton.type = "button";
    this.fastButton.className = "feedback-fast";
    this.fastButton.textContent = STRINGS.fastFeedbackButton;
    this.fastButton.addEventListener("click", () => void this.requestFeedback(false));
    this.lectureButton = d.createElement("button");
    this.lectureButton.type = "button";
    this.lectureButton.className = "feedback-lecture";
    this.lectureButton.textContent = STRINGS.lectureFeedbackButton;
    this.lectureButton.addEventListener("click", () => void this.requestFeedback(true));

    const warning = d.createElement("div");
    warning.className = "ai-warning";
    warning.textContent = STRINGS.aiWarning;

    this.waitingIndicator = d.createElement("div");
    this.waitingIndicator.className = "waiting-indicator";
    this.waitingIndicator.hidden = true;

    this.feedbackBody = d.createElement("div");
    this.feedbackBody.className = "feedback-body";
    this.feedbackBody.addEventListener("click", (event) => {
      const target = event.target as HTMLElement | null;
      const link = target?.closest?.(".footnote-link") as HTMLElement | null;
      if (link?.dataset.footnoteId) {
        event.preventDefault();
        this.openCitation(Number(link.dataset.footnoteId));
      }
    });

    this.errorNotice = d.createElement("div");
    this.errorNotice.className = "stream-error";
    this.errorNotice.hidden = true;
    this.retryButton = d.createElement("button");
    this.retryButton.type = "button";
    this.retryButton.className = "feedback-retry";
    this.retryButton.textContent = STRINGS.retryButton;
    this.retryButton.addEventListener("click", () =>
      void this.requestFeedback(this.state.lastRequestWithLecture),
    );

    this.sourcesSection = d.createElement("div");
    this.sourcesSection.className = "sources-section";

    root.append(
      heading,
      tasksHeading,
      this.taskList,
      this.taskTitle,
      this.taskDescription,
      editorHeading,
      this.editor,
      this.submitButton,
      compileHeading,
      this.compilePanel,
      testsHeading,
      this.testsPanel,
      feedbackHeading,
      warning,
      this.fastButton,
      this.lectureButton,
      this.waitingIndicator,
      this.feedbackBody,
      this.errorNotice,
      this.retryButton,
      this.sourcesSection,
      this.modal.root,
    );
    this.syncControls();
  }

  async init(): Promise<void> {
    const tasks = await this.api.listTasks();
    this.renderTaskList(tasks);
    if (tasks.length > 0) {
      await this.selectTask(tasks[0].task_id);
    }
  }

  private renderTaskList(tasks: TaskSummary[]): void {
    this.taskList.innerHTML = "";
    for (const task of tasks) {
      const item = this.doc.createElement("li");
      const button = this.doc.createElement("button");
      button.type = "button";
      button.className = "task-item";
      button.dataset.taskId = task.task_id;
      button.textContent = `${task.title} (${task.programming_language})`;
      button.addEventListener("click", () => void this.selectTask(task.task_id));
      item.append(button);
      this.taskList.append(item);
    }
  }

  async selectTask(taskId: string): Promise<void> {
    const task = await this.api.getTask(taskId);
    this.state.selectedTask = task;
    this.state.submission = null;
    this.resetFeedback();
    this.taskTitle.textContent = task.title;
    this.taskDescription.innerHTML = renderMarkdown(task.description_md, []);
    this.editor.value = task.starter_code ?? "";
    this.compilePanel.textContent = "";
    this.testsPanel.textContent = "";
    this.syncControls();
  }

  async submitCode(): Promise<void> {
    const task = this.state.selectedTask;
    if (!task) {
      return;
    }
    this.submitButton.disabled = true;
    this.submitButton.textContent = STRINGS.submitting;
    try {
      const submission = await this.api.submit(task.task_id, this.editor.value);
      this.state.submission = submission;
      this.resetFeedback();
      this.renderSubmission(submission);
    } catch (error) {
      this.compilePanel.textContent = error instanceof Error ? error.message : String(error);
    } finally {
      this.submitButton.disabled = false;
      this.submitButton.textContent = STRINGS.submitButton;
      this.syncControls();
    }
  }

  private renderSubmission(submission: SubmissionResult): void {
    this.compilePanel.textContent = submission.compile.success
      ? submission.compile.output || "OK"
      : submission.compile.output;
    if (submission.tests) {
      this.testsPanel.textContent =
        `${submission.tests.passed}/${submission.tests.total} passed\n` + submission.tests.output;
    } else {
      this.testsPanel.textContent = STRINGS.testsSkipped;
    }
  }

  /** Streams one feedback; buttons stay disabled until the stream settles. */
  async requestFeedback(withLecture: boolean): Promise<void> {
    const submission = this.state.submission;
    if (!submission || this.isStreamActive()) {
      return;
    }
    this.state.lastRequestWithLecture = withLecture;
    this.state.feedbackPhase = "waiting";
    this.state.feedbackText = "";
    this.state.citations = [];
    this.state.errorMessage = "";
    this.renderFeedback();
    this.syncControls();
    this.startWaitingTimer();

    await this.api.streamFeedback(submission.submission_id, withLecture, {
      onToken: (text) => {
        if (this.state.feedbackPhase === "waiting") {
          this.state.feedbackPhase = "streaming";
          this.stopWaitingTimer();
        }
        this.state.feedbackText += text;
        this.renderFeedback();
      },
      onCitations: (citations) => {
        this.state.citations = citations;
      },
      onDone: () => {
        this.state.feedbackPhase = "done";
        this.stopWaitingTimer();
        this.renderFeedback();
        this.renderSources();
        this.syncControls();
      },
      onError: (message) => {
        this.state.feedbackPhase = "error";
        this.state.errorMessage = message;
        this.stopWaitingTimer();
        this.renderFeedback();
        this.syncControls();
      },
    });
    // belt and braces: a body that ends without done/error settles as error
    if (this.isStreamActive()) {
      this.state.feedbackPhase = "error";
      this.state.errorMessage = "stream ended unexpectedly";
      this.stopWaitingTimer();
      this.renderFeedback();
      this.syncControls();
    }
  }

  isStreamActive(): boolean {
    return this.state.feedbackPhase === "waiting" || this.state.feedbackPhase === "streaming";
  }

  private startWaitingTimer(): void {
    this.stopWaitingTimer();
    const startedAt = Date.now();
    this.waitingIndicator.hidden = false;
    this.waitingIndicator.textContent = STRINGS.waitingForFeedback(0);
    this.waitingTimer = setInterval(() => {
      const seconds = Math.floor((Date.now() - startedAt) / 1000);
      this.waitingIndicator.textContent = STRINGS.waitingForFeedback(seconds);
    }, 250);
  }

  private stopWaitingTimer(): void {
    if (this.waitingTimer !== null) {
      clearInterval(this.waitingTimer);
      this.waitingTimer = null;
    }
    this.waitingIndicator.hidden = true;
  }

  private resetFeedback(): void {
    this.state.feedbackPhase = "idle";
    this.state.feedbackText = "";
    this.state.citations = [];
    this.state.errorMessage = "";
    this.stopWaitingTimer();
    if (this.feedbackBody) {
      this.feedbackBody.innerHTML = "";
      this.errorNotice.hidden = true;
      this.sourcesSection.innerHTML = "";
    }
  }

  private renderFeedback(): void {
    this.feedbackBody.innerHTML = renderMarkdown(this.state.feedbackText, this.state.citations);
    if (this.state.feedbackPhase === "error") {
      const marker = this.doc.createElement("p");
      marker.className = "incomplete-marker";
      marker.textContent = STRINGS.incompleteMarker;
      this.feedbackBody.append(marker);
      this.errorNotice.hidden = false;
      this.errorNotice.textContent = `${STRINGS.streamErrorNotice} (${this.state.errorMessage})`;
    } else {
      this.errorNotice.hidden = true;
    }
  }

  /** The source list renders exactly the citations payload, nothing else. */
  private renderSources(): void {
    this.sourcesSection.innerHTML = "";
    if (this.state.citations.length === 0) {
      return;
    }
    const heading = this.doc.createElement("h3");
    heading.textContent = STRINGS.sourcesHeading;
    const list = this.doc.createElement("ol");
    list.className = "source-list";
    for (const citation of this.state.citations) {
      const item = this.doc.createElement("li");
      const link = this.doc.createElement("a");
      link.href = "#";
      link.className = "source-link";
      link.dataset.footnoteId = String(citation.footnote_id);
      link.textContent = `${citation.video_file} @ ${formatTimestamp(citation.start_ms)}`;
      link.addEventListener("click", (event) => {
        event.preventDefault();
        this.openCitation(citation.footnote_id);
      });
      item.append(link);
      list.append(item);
    }
    this.sourcesSection.append(heading, list);
  }

  openCitation(footnoteId: number): void {
    const citation = this.state.citations.find((c) => c.footnote_id === footnoteId);
    if (!citation) {
      return;
    }
    const startSeconds = Math.floor(citation.start_ms / 1000);
    // invariant: the modal only opens with an active citation set
    this.state.activeCitation = { videoUrl: citation.url, startSeconds };
    this.modal.open(
      citation.url,
      startSeconds,
      `${citation.video_file} @ ${formatTimestamp(citation.start_ms)}`,
    );
  }

  closeModal(): void {
    this.modal.close();
    this.state.activeCitation = null;
  }

  private syncControls(): void {
    const canRequest = this.state.submission !== null && !this.isStreamActive();
    this.fastButton.disabled = !canRequest;
    this.lectureButton.disabled = !canRequest;
    this.retryButton.hidden = this.state.feedbackPhase !== "error";
    if (!this.state.submission) {
      this.fastButton.title = STRINGS.submitFirst;
      this.lectureButton.title = STRINGS.submitFirst;
    } else {
      this.fastButton.removeAttribute("title");
      this.lectureButton.removeAttribute("title");
    }
  }
}

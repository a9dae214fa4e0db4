/** All user-facing strings in one place so the UI can be localized. */
export const STRINGS = {
  appTitle: "Programming exercises",
  taskListHeading: "Tasks",
  editorHeading: "Your solution",
  submitButton: "Submit code",
  submitting: "Evaluating…",
  compileHeading: "Compiler output",
  testsHeading: "Unit tests",
  testsSkipped: "Tests were skipped because compilation failed.",
  feedbackHeading: "Feedback",
  fastFeedbackButton: "Fast feedback",
  lectureFeedbackButton: "Feedback with lecture references",
  waitingForFeedback: (seconds: number) => `Preparing feedback… ${seconds}s`,
  aiWarning:
    "This feedback is generated by an AI model. It can be wrong or incomplete - always check it against the lecture material.",
  sourcesHeading: "Sources from the lecture",
  retryButton: "Try again",
  streamErrorNotice: "The feedback stream was interrupted. The text above may be incomplete.",
  incompleteMarker: "[incomplete]",
  closeModal: "Close",
  submitFirst: "Submit your code to request feedback.",
} as const;

/**
 * Student page: question display, response textbox, feedback rendered
 * beneath the box, and resubmission on the same page.
 *
 * Highlights always render over the exact text that was submitted, not the
 * live draft, and prior feedback stays visible until new feedback arrives.
 */

import { ApiClient, ApiError, Feedback, StudentQuestionView } from "./api.js";
import { renderAnnotated } from "./highlight.js";

export type SubmissionStatus = "idle" | "pending" | "done" | "error";

export interface UiState {
  view: StudentQuestionView | null;
  draft: string;
  submittedText: string | null;
  lastFeedback: Feedback | null;
  status: SubmissionStatus;
  errorMessage: string | null;
}

export class StudentPage {
  readonly state: UiState = {
    view: null,
    draft: "",
    submittedText: null,
    lastFeedback: null,
    status: "idle",
    errorMessage: null,
  };

  private questionEl: HTMLElement;
  private textarea: HTMLTextAreaElement;
  private submitButton: HTMLButtonElement;
  private statusEl: HTMLElement;
  private feedbackEl: HTMLElement;

  constructor(
    private root: HTMLElement,
    private client: ApiClient,
    private questionId: string,
  ) {
    const doc = root.ownerDocument;
    this.questionEl = doc.createElement("div");
    this.questionEl.className = "ft-question";
    this.textarea = doc.createElement("textarea");
    this.textarea.className = "ft-response";
    this.textarea.rows = 6;
    this.textarea.placeholder = "Type your answer here";
    this.textarea.addEventListener("input", () => {
      this.state.draft = this.textarea.value;
    });
    this.submitButton = doc.createElement("button");
    this.submitButton.className = "ft-submit";
    this.submitButton.textContent = "Submit answer";
    this.submitButton.addEventListener("click", () => void this.submit());
    this.statusEl = doc.createElement("div");
    this.statusEl.className = "ft-status";
    this.feedbackEl = doc.createElement("section");
    this.feedbackEl.className = "ft-feedback";

    root.replaceChildren(
      this.questionEl,
      this.textarea,
      this.submitButton,
      this.statusEl,
      this.feedbackEl,
    );
  }

  async load(): Promise<void> {
    try {
      this.state.view = await this.client.getQuestion(this.questionId);
      this.questionEl.textContent = this.state.view.text;
    } catch (err) {
      this.state.view = null;
      this.questionEl.textContent =
        err instanceof ApiError && err.status === 404
          ? "Question not found. Check the link you were given."
          : "Could not load the question. Try again later.";
      this.questionEl.classList.add("ft-not-found");
      this.submitButton.disabled = true;
    }
  }

  async submit(): Promise<void> {
    if (this.state.status === "pending" || !this.state.view) return;
    const submitted = this.textarea.value;
    if (!submitted.trim()) {
      this.statusEl.textContent = "Write an answer before submitting.";
      return;
    }
    this.state.status = "pending";
    this.submitButton.disabled = true;
    this.statusEl.textContent = "Waiting for feedback…";
    // prior feedback stays on screen while the new request is in flight
    try {
      const feedback = await this.client.submitResponse(this.questionId, submitted);
      this.state.lastFeedback = feedback;
      this.state.submittedText = submitted;
      this.state.status = "done";
      this.statusEl.textContent = "";
      this.renderFeedback();
    } catch (err) {
      this.state.status = "error";
      this.state.errorMessage =
        err instanceof ApiError ? err.detail : "Submission failed.";
      this.statusEl.textContent = this.state.errorMessage;
    } finally {
      this.submitButton.disabled = false;
    }
  }

  private renderFeedback(): void {
    const doc = this.root.ownerDocument;
    const { lastFeedback, submittedText } = this.state;
    if (!lastFeedback || submittedText === null) return;
    this.feedbackEl.replaceChildren();

    if (lastFeedback.holistic) {
      const holistic = doc.createElement("p");
      holistic.className = "ft-holistic";
      holistic.textContent = lastFeedback.holistic;
      this.feedbackEl.appendChild(holistic);
    }
    if (lastFeedback.spans.length > 0) {
      const annotated = doc.createElement("blockquote");
      annotated.className = "ft-annotated";
      annotated.appendChild(
        renderAnnotated(submittedText, lastFeedback.spans, doc),
      );
      this.feedbackEl.appendChild(annotated);
    }
    if (lastFeedback.unlocated_notes.length > 0) {
      const list = doc.createElement("ul");
      list.className = "ft-unlocated";
      for (const note of lastFeedback.unlocated_notes) {
        const item = doc.createElement("li");
        item.textContent = `“${note.quote}” — ${note.comment}`;
        list.appendChild(item);
      }
      this.feedbackEl.appendChild(list);
    }
  }
}

export async function mountStudentPage(
  root: HTMLElement,
  client: ApiClient,
  questionId: string,
): Promise<StudentPage> {
  const page = new StudentPage(root, client, questionId);
  await page.load();
  return page;
}

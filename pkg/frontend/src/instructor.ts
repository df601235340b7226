/**
 * Instructor page: author a question with criteria, generate criteria for
 * review, run refinement, and adopt an improved rewrite.
 *
 * The token lives in a plain form field for the session only; it is never
 * written to browser storage.
 */

import { ApiClient, ApiError, FeedbackMode, RefinementReport } from "./api.js";

export class InstructorPage {
  currentQuestionId: string | null = null;
  currentVersion = 0;
  currentText = "";
  lastReport: RefinementReport | null = null;

  tokenInput: HTMLInputElement;
  textInput: HTMLTextAreaElement;
  criteriaList: HTMLElement;
  modeSelect: HTMLSelectElement;
  createButton: HTMLButtonElement;
  generateButton: HTMLButtonElement;
  refineButton: HTMLButtonElement;
  adoptButton: HTMLButtonElement;
  linkEl: HTMLElement;
  reportEl: HTMLElement;
  errorEl: HTMLElement;

  constructor(
    private root: HTMLElement,
    private client: ApiClient,
  ) {
    const doc = root.ownerDocument;
    const el = <K extends keyof HTMLElementTagNameMap>(
      tag: K,
      className: string,
    ): HTMLElementTagNameMap[K] => {
      const node = doc.createElement(tag);
      node.className = className;
      return node;
    };

    this.tokenInput = el("input", "ft-token");
    this.tokenInput.type = "password";
    this.tokenInput.placeholder = "Instructor token";
    this.tokenInput.autocomplete = "off";

    this.textInput = el("textarea", "ft-question-text");
    this.textInput.placeholder = "Question text";

    this.criteriaList = el("div", "ft-criteria");
    const addCriterion = el("button", "ft-add-criterion");
    addCriterion.textContent = "Add criterion";
    addCriterion.addEventListener("click", () => this.addCriterionRow(""));

    this.modeSelect = el("select", "ft-mode");
    for (const mode of ["holistic", "span_only", "both"] as FeedbackMode[]) {
      const option = doc.createElement("option");
      option.value = mode;
      option.textContent = mode;
      this.modeSelect.appendChild(option);
    }

    this.createButton = el("button", "ft-create");
    this.createButton.textContent = "Create question";
    this.createButton.addEventListener("click", () => void this.create());

    this.generateButton = el("button", "ft-generate");
    this.generateButton.textContent = "Generate criteria";
    this.generateButton.disabled = true;
    this.generateButton.addEventListener("click", () => void this.generate());

    this.refineButton = el("button", "ft-refine");
    this.refineButton.textContent = "Refine question";
    this.refineButton.disabled = true;
    this.refineButton.addEventListener("click", () => void this.refine());

    this.adoptButton = el("button", "ft-adopt");
    this.adoptButton.textContent = "Adopt rewrite";
    this.adoptButton.disabled = true;
    this.adoptButton.addEventListener("click", () => void this.adopt());

    this.linkEl = el("div", "ft-share-link");
    this.reportEl = el("section", "ft-report");
    this.errorEl = el("div", "ft-error");
    this.errorEl.setAttribute("role", "alert");

    root.replaceChildren(
      this.tokenInput,
      this.textInput,
      this.criteriaList,
      addCriterion,
      this.modeSelect,
      this.createButton,
      this.generateButton,
      this.refineButton,
      this.adoptButton,
      this.linkEl,
      this.reportEl,
      this.errorEl,
    );
    this.addCriterionRow("");
  }

  addCriterionRow(value: string): void {
    const doc = this.root.ownerDocument;
    const row = doc.createElement("div");
    row.className = "ft-criterion-row";
    const input = doc.createElement("input");
    input.className = "ft-criterion";
    input.value = value;
    input.placeholder = "Grading criterion (hidden from students)";
    const remove = doc.createElement("button");
    remove.textContent = "Remove";
    remove.addEventListener("click", () => row.remove());
    row.append(input, remove);
    this.criteriaList.appendChild(row);
  }

  criteria(): string[] {
    return Array.from(
      this.criteriaList.querySelectorAll<HTMLInputElement>("input.ft-criterion"),
      (input) => input.value.trim(),
    ).filter((text) => text.length > 0);
  }

  setCriteria(values: string[]): void {
    this.criteriaList.replaceChildren();
    for (const value of values) this.addCriterionRow(value);
  }

  private showError(err: unknown): void {
    this.errorEl.textContent =
      err instanceof ApiError
        ? err.status === 401
          ? "Not authorized: check the instructor token."
          : `${err.errorName}: ${err.detail}`
        : "Request failed.";
  }

  async create(): Promise<void> {
    this.errorEl.textContent = "";
    try {
      const { question_id } = await this.client.createQuestion(
        this.tokenInput.value,
        {
          text: this.textInput.value,
          criteria: this.criteria(),
          feedback_mode: this.modeSelect.value as FeedbackMode,
        },
      );
      this.currentQuestionId = question_id;
      this.currentVersion = 1;
      this.currentText = this.textInput.value.trim();
      const link = `/app/?question=${question_id}`;
      this.linkEl.replaceChildren();
      const anchor = this.root.ownerDocument.createElement("a");
      anchor.href = link;
      anchor.textContent = link;
      anchor.className = "ft-student-link";
      this.linkEl.append("Share with students: ", anchor);
      this.generateButton.disabled = false;
      this.refineButton.disabled = this.criteria().length === 0;
    } catch (err) {
      this.showError(err);
    }
  }

  async generate(): Promise<void> {
    if (!this.currentQuestionId) return;
    this.errorEl.textContent = "";
    try {
      const { criteria } = await this.client.generateCriteria(
        this.tokenInput.value,
        this.currentQuestionId,
      );
      // proposed only; the instructor reviews, edits, then saves
      this.setCriteria(criteria);
      this.refineButton.disabled = criteria.length === 0;
    } catch (err) {
      this.showError(err);
    }
  }

  async saveCriteria(): Promise<void> {
    if (!this.currentQuestionId) return;
    const { version } = await this.client.updateQuestion(
      this.tokenInput.value,
      this.currentQuestionId,
      { criteria: this.criteria(), expected_version: this.currentVersion },
    );
    this.currentVersion = version;
  }

  async refine(): Promise<void> {
    if (!this.currentQuestionId) return;
    this.errorEl.textContent = "";
    try {
      const report = await this.client.refineQuestion(
        this.tokenInput.value,
        this.currentQuestionId,
      );
      this.lastReport = report;
      this.renderReport(report);
    } catch (err) {
      this.showError(err);
    }
  }

  private renderReport(report: RefinementReport): void {
    const doc = this.root.ownerDocument;
    this.reportEl.replaceChildren();
    const heading = doc.createElement("h3");
    heading.textContent = `Refinement: ${report.outcome}`;
    this.reportEl.appendChild(heading);
    for (const round of report.rounds) {
      const div = doc.createElement("article");
      div.className = "ft-round";
      const answer = doc.createElement("p");
      answer.textContent = `Simulated answer: ${round.simulated_answer}`;
      const verdict = doc.createElement("p");
      verdict.textContent = `Verdict: ${round.verdict.fair ? "fair" : "unfair"} — ${round.verdict.rationale}`;
      div.append(answer, verdict);
      if (round.rewritten_text) {
        const diff = doc.createElement("p");
        diff.className = "ft-diff";
        diff.textContent = `Rewrite: ${round.rewritten_text}`;
        div.appendChild(diff);
      }
      this.reportEl.appendChild(div);
    }
    // adoption only makes sense when refinement actually improved the text
    this.adoptButton.disabled =
      report.outcome !== "Improved" || report.final_text === report.initial_text;
  }

  async adopt(): Promise<void> {
    if (!this.currentQuestionId || !this.lastReport) return;
    this.errorEl.textContent = "";
    try {
      const { version } = await this.client.updateQuestion(
        this.tokenInput.value,
        this.currentQuestionId,
        {
          text: this.lastReport.final_text,
          expected_version: this.currentVersion,
        },
      );
      this.currentVersion = version;
      this.currentText = this.lastReport.final_text;
      this.textInput.value = this.lastReport.final_text;
      this.adoptButton.disabled = true;
    } catch (err) {
      this.showError(err);
    }
  }
}

export function mountInstructorPage(
  root: HTMLElement,
  client: ApiClient,
): InstructorPage {
  return new InstructorPage(root, client);
}

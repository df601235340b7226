/**
 * Typed client for the feedback service JSON API.
 *
 * Student calls never attach a token; instructor calls take the token per
 * call so it stays session-local and is never persisted anywhere.
 */

export type FeedbackMode = "holistic" | "span_only" | "both";

export interface StudentQuestionView {
  id: string;
  text: string;
  feedback_mode: FeedbackMode;
}

export interface SpanAnnotation {
  start: number;
  end: number;
  comment: string;
}

export interface UnlocatedNote {
  quote: string;
  comment: string;
}

export interface Feedback {
  holistic: string | null;
  spans: SpanAnnotation[];
  unlocated_notes: UnlocatedNote[];
  provider_id: string;
  latency_ms: number;
}

export interface RefinementRound {
  round_index: number;
  simulated_answer: string;
  verdict: { fair: boolean; rationale: string };
  rewritten_text: string | null;
}

export interface RefinementReport {
  question_id: string;
  initial_text: string;
  final_text: string;
  rounds: RefinementRound[];
  outcome: "FairAtStart" | "Improved" | "Unresolved";
}

export interface QuestionDraft {
  text: string;
  criteria: string[];
  feedback_mode: FeedbackMode;
  assignment_id?: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorName: string,
    public detail: string,
  ) {
    super(`${errorName}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    token?: string,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (token) headers["Authorization"] = `Bearer ${token}`;
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ApiError(
        resp.status,
        payload.error ?? `HTTP${resp.status}`,
        payload.detail ?? resp.statusText,
      );
    }
    return payload as T;
  }

  getQuestion(id: string): Promise<StudentQuestionView> {
    return this.request("GET", `/questions/${id}`);
  }

  submitResponse(id: string, responseText: string): Promise<Feedback> {
    return this.request("POST", `/questions/${id}/responses`, {
      response_text: responseText,
    });
  }

  createQuestion(
    token: string,
    draft: QuestionDraft,
  ): Promise<{ question_id: string }> {
    return this.request("POST", "/questions", draft, token);
  }

  updateQuestion(
    token: string,
    id: string,
    body: { text?: string; criteria?: string[]; expected_version: number },
  ): Promise<{ question_id: string; version: number }> {
    return this.request("PUT", `/questions/${id}`, body, token);
  }

  generateCriteria(token: string, id: string): Promise<{ criteria: string[] }> {
    return this.request("POST", `/questions/${id}/criteria:generate`, {}, token);
  }

  refineQuestion(
    token: string,
    id: string,
    maxRounds?: number,
  ): Promise<RefinementReport> {
    return this.request(
      "POST",
      `/questions/${id}/refine`,
      maxRounds ? { max_rounds: maxRounds } : {},
      token,
    );
  }
}

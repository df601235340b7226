/**
 * In-memory stand-in for the feedback service, recording every request so
 * tests can assert on the traffic a page generated.
 */

import type { Feedback, RefinementReport, StudentQuestionView } from "../src/api";

export interface RecordedRequest {
  method: string;
  path: string;
  headers: Record<string, string>;
  body: unknown;
}

export interface MockRoute {
  method: string;
  path: string;
  status: number;
  payload: unknown;
  /** resolve manually to hold a request in flight */
  gate?: Promise<void>;
}

export class MockServer {
  traffic: RecordedRequest[] = [];
  private routes: MockRoute[] = [];

  route(method: string, path: string, status: number, payload: unknown): MockRoute {
    const r: MockRoute = { method, path, status, payload };
    this.routes.push(r);
    return r;
  }

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = typeof input === "string" ? input : input.toString();
    const method = init?.method ?? "GET";
    const headers: Record<string, string> = {};
    for (const [k, v] of Object.entries(init?.headers ?? {})) {
      headers[k.toLowerCase()] = v as string;
    }
    this.traffic.push({
      method,
      path: url,
      headers,
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    });
    const route = this.routes.find((r) => r.method === method && r.path === url);
    if (!route) {
      return jsonResponse(404, { error: "NotFound", detail: `no route ${method} ${url}` });
    }
    if (route.gate) await route.gate;
    return jsonResponse(route.status, route.payload);
  };
}

export function jsonResponse(status: number, payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function questionView(overrides: Partial<StudentQuestionView> = {}): StudentQuestionView {
  return {
    id: "07b2c3ef-0f97-46bc-a11e-000000000001",
    text: "What is the Rosetta Stone?",
    feedback_mode: "both",
    ...overrides,
  };
}

export function feedbackPayload(overrides: Partial<Feedback> = {}): Feedback {
  return {
    holistic: "Good start; say more about why it was made.",
    spans: [],
    unlocated_notes: [],
    provider_id: "scripted",
    latency_ms: 3,
    ...overrides,
  };
}

export function unresolvedReport(): RefinementReport {
  return {
    question_id: questionView().id,
    initial_text: questionView().text,
    final_text: questionView().text,
    outcome: "Unresolved",
    rounds: [0, 1, 2].map((i) => ({
      round_index: i,
      simulated_answer: `answer ${i}`,
      verdict: { fair: false, rationale: "requirements stay hidden" },
      rewritten_text: i < 2 ? "Describe it in detail." : null,
    })),
  };
}

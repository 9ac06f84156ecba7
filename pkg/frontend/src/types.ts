export type ResponseMode = "answered" | "accepted" | "supplemented" | "rejected";

export interface Anchor {
  element_id: string;
  bbox: [number, number, number, number]; // x, y, w, h in canvas units
}

export interface InferredRationale {
  text: string;
  reasoning: string;
}

export interface ExchangeResponse {
  mode: ResponseMode;
  answer_text: string | null;
  at: number | null;
}

/** One clarification exchange as served by GET /sessions/{id}/questions. */
export interface QuestionCard {
  question_id: string;
  question_text: string;
  step_id: string;
  anchor: Anchor | null;
  inferred_rationale: InferredRationale | null;
  response?: ExchangeResponse;
  opened_revision: number;
  status: "open" | "resolved";
}

export interface QuestionView {
  revision: number;
  exchanges: QuestionCard[];
}

export interface Assessment {
  categories: string[];
  overall: "Strong" | "Weak" | "Empty";
  reason: string;
}

export interface DocEntry {
  step_id: string;
  status: string;
  decision_and_actions: string | null;
  rationale: string | null;
  progression: string | null;
  snapshot_refs: string[];
  assessment: Assessment | null;
  qa: {
    question_id: string;
    question_text: string;
    anchor: Anchor | null;
    inferred_rationale: InferredRationale | null;
    response?: ExchangeResponse;
  } | null;
}

export interface Documentation {
  session_id: string;
  steps: DocEntry[];
}

export type SessionEventRecord = Record<string, unknown> & { type: string };

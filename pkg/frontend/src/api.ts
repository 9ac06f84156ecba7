import type { Documentation, QuestionView, ResponseMode, SessionEventRecord } from "./types.js";

export class ServiceError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ServiceError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

/** Thin client over the session-service HTTP endpoints; no other backends. */
export class ServiceClient {
  constructor(readonly baseUrl: string) {}

  async createSession(): Promise<string> {
    const body = await asJson<{ session_id: string }>(
      await fetch(`${this.baseUrl}/sessions`, { method: "POST" }),
    );
    return body.session_id;
  }

  async appendEvents(sessionId: string, records: SessionEventRecord[]): Promise<number> {
    const body = await asJson<{ accepted: number }>(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/events`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(records),
      }),
    );
    return body.accepted;
  }

  /** Long-poll: the server holds the request until a newer exchange exists. */
  async pollQuestions(sessionId: string, since: number, signal?: AbortSignal): Promise<QuestionView> {
    return asJson<QuestionView>(
      await fetch(`${this.baseUrl}/sessions/${sessionId}/questions?since=${since}`, { signal }),
    );
  }

  async respond(questionId: string, mode: ResponseMode, answerText?: string): Promise<{ step_id: string; status: string }> {
    return asJson(
      await fetch(`${this.baseUrl}/questions/${questionId}/response`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(answerText === undefined ? { mode } : { mode, answer_text: answerText }),
      }),
    );
  }

  async documentation(sessionId: string): Promise<Documentation> {
    return asJson(await fetch(`${this.baseUrl}/sessions/${sessionId}/documentation`));
  }

  snapshotUrl(sessionId: string, ref: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/snapshots/${ref}`;
  }
}

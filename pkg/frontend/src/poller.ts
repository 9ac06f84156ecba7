import type { ServiceClient } from "./api.js";
import type { CardStore } from "./store.js";

const BACKOFF_START_MS = 500;
const BACKOFF_CAP_MS = 10_000;

/**
 * Long-poll loop feeding the card store. The revision cursor advances only
 * on successful polls, so a dropped connection resumes without losing or
 * duplicating exchanges (the store dedupes by question_id as a second
 * guard). Network failures surface as the store's stale flag.
 */
export class QuestionPoller {
  private sinceRevision = 0;
  private running = false;
  private backoffMs = BACKOFF_START_MS;
  private abort: AbortController | null = null;

  constructor(
    private readonly client: ServiceClient,
    private readonly sessionId: string,
    private readonly store: CardStore,
  ) {}

  get revision(): number {
    return this.sinceRevision;
  }

  /** One poll round; exposed for tests and used by the loop. */
  async pollOnce(): Promise<void> {
    this.abort = new AbortController();
    const view = await this.client.pollQuestions(this.sessionId, this.sinceRevision, this.abort.signal);
    this.sinceRevision = view.revision;
    this.store.upsert(view.exchanges);
    this.store.setStale(false);
    this.backoffMs = BACKOFF_START_MS;
  }

  start(): void {
    if (this.running) return;
    this.running = true;
    void this.loop();
  }

  stop(): void {
    this.running = false;
    this.abort?.abort();
  }

  private async loop(): Promise<void> {
    while (this.running) {
      try {
        await this.pollOnce();
      } catch {
        if (!this.running) return;
        this.store.setStale(true);
        await sleep(this.backoffMs);
        this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_CAP_MS);
      }
    }
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

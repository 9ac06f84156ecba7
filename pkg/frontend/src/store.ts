import type { QuestionCard } from "./types.js";

export interface StoreListener {
  (cards: QuestionCard[], stale: boolean): void;
}

/**
 * Client-side card state with a single writer (the poll loop plus user
 * actions routed through it). Cards are monotone: once resolved they never
 * reopen, and a question_id is never duplicated, so reconnects after a
 * network drop cannot double-render.
 */
export class CardStore {
  private cards = new Map<string, QuestionCard>();
  private order: string[] = [];
  private stale = false;
  private listeners: StoreListener[] = [];

  subscribe(listener: StoreListener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    const snapshot = this.list();
    for (const listener of this.listeners) listener(snapshot, this.stale);
  }

  list(): QuestionCard[] {
    return this.order.map((id) => this.cards.get(id)!);
  }

  openCount(): number {
    return this.list().filter((c) => c.status === "open").length;
  }

  isStale(): boolean {
    return this.stale;
  }

  upsert(incoming: QuestionCard[]): void {
    let changed = false;
    for (const card of incoming) {
      const existing = this.cards.get(card.question_id);
      if (existing === undefined) {
        this.cards.set(card.question_id, card);
        this.order.push(card.question_id);
        changed = true;
      } else if (existing.status === "open") {
        // resolved cards are immutable; open ones may resolve or gain data
        this.cards.set(card.question_id, { ...existing, ...card });
        changed = true;
      }
    }
    if (changed) this.emit();
  }

  markResolved(questionId: string): void {
    const card = this.cards.get(questionId);
    if (card && card.status === "open") {
      this.cards.set(questionId, { ...card, status: "resolved" });
      this.emit();
    }
  }

  markOpenAgain(questionId: string): void {
    // only used to roll back an optimistic resolve that the server rejected
    const card = this.cards.get(questionId);
    if (card) {
      this.cards.set(questionId, { ...card, status: "open" });
      this.emit();
    }
  }

  setStale(stale: boolean): void {
    if (this.stale !== stale) {
      this.stale = stale;
      this.emit();
    }
  }
}

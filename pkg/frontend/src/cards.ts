import type { QuestionCard, ResponseMode } from "./types.js";
import type { CardStore } from "./store.js";

export interface CardCallbacks {
  respond(card: QuestionCard, mode: ResponseMode, answerText?: string): Promise<void>;
  hover?(card: QuestionCard | null): void;
}

/**
 * Render the question inbox. Cards appear in server emission order; the
 * badge counts open cards. The mode sent on submit follows the interaction:
 * the Correct button accepts the inferred rationale, a typed answer is
 * "answered", and a typed answer on a card that shows an inference is
 * "supplemented".
 */
export function renderCards(
  container: HTMLElement,
  badge: HTMLElement,
  store: CardStore,
  callbacks: CardCallbacks,
): void {
  const render = (cards: QuestionCard[], stale: boolean) => {
    badge.textContent = String(store.openCount());
    badge.classList.toggle("stale", stale);
    container.innerHTML = "";
    for (const card of cards) {
      container.appendChild(renderCard(card, callbacks));
    }
  };
  store.subscribe(render);
  render(store.list(), store.isStale());
}

function renderCard(card: QuestionCard, callbacks: CardCallbacks): HTMLElement {
  const root = document.createElement("article");
  root.className = `question-card ${card.status}`;
  root.dataset.questionId = card.question_id;
  root.dataset.stepId = card.step_id;

  const question = document.createElement("p");
  question.className = "question-text";
  question.textContent = card.question_text;
  root.appendChild(question);

  root.addEventListener("mouseenter", () => callbacks.hover?.(card));
  root.addEventListener("mouseleave", () => callbacks.hover?.(null));

  if (card.inferred_rationale) {
    const inferred = document.createElement("blockquote");
    inferred.className = "inferred-rationale";
    inferred.textContent = card.inferred_rationale.text;
    root.appendChild(inferred);
  }

  if (card.status === "resolved") {
    const done = document.createElement("p");
    done.className = "resolved-note";
    done.textContent = "Resolved";
    root.appendChild(done);
    return root;
  }

  const controls = document.createElement("div");
  controls.className = "controls";

  if (card.inferred_rationale) {
    const correct = document.createElement("button");
    correct.className = "correct";
    correct.textContent = "Correct";
    correct.addEventListener("click", () => void callbacks.respond(card, "accepted"));
    controls.appendChild(correct);

    const wrong = document.createElement("button");
    wrong.className = "wrong";
    wrong.textContent = "Wrong";
    wrong.addEventListener("click", () => void callbacks.respond(card, "rejected"));
    controls.appendChild(wrong);
  }

  const input = document.createElement("textarea");
  input.className = "answer-input";
  input.placeholder = "Explain your reasoning...";
  controls.appendChild(input);

  const submit = document.createElement("button");
  submit.className = "submit-answer";
  submit.textContent = "Answer";
  submit.addEventListener("click", () => {
    const text = input.value.trim();
    if (!text) return;
    const mode: ResponseMode = card.inferred_rationale ? "supplemented" : "answered";
    void callbacks.respond(card, mode, text);
  });
  controls.appendChild(submit);

  root.appendChild(controls);
  return root;
}

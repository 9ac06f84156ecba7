import { ServiceClient } from "./api.js";
import { CardStore } from "./store.js";
import { QuestionPoller } from "./poller.js";
import { renderCards } from "./cards.js";
import { highlightMarker, showAnchor } from "./anchor.js";
import { renderDocumentation } from "./docview.js";
import type { QuestionCard, ResponseMode } from "./types.js";

const VIEWPORT = { width: 720, height: 600, canvasWidth: 1440, canvasHeight: 1200 };

/** Wire the standalone page: inbox on the left, snapshot viewer and the
 * documentation page on the right. */
export function mountApp(root: HTMLElement, baseUrl: string, sessionId: string): () => void {
  const client = new ServiceClient(baseUrl);
  const store = new CardStore();
  const poller = new QuestionPoller(client, sessionId, store);

  root.innerHTML = `
    <header><span id="badge" class="badge">0</span> open questions</header>
    <main>
      <section id="cards"></section>
      <section id="viewer"></section>
      <section id="documentation"></section>
    </main>`;
  const cardsEl = root.querySelector<HTMLElement>("#cards")!;
  const badgeEl = root.querySelector<HTMLElement>("#badge")!;
  const viewerEl = root.querySelector<HTMLElement>("#viewer")!;
  const docEl = root.querySelector<HTMLElement>("#documentation")!;

  const refreshDocumentation = async () => {
    const doc = await client.documentation(sessionId);
    renderDocumentation(docEl, doc, (ref) => client.snapshotUrl(sessionId, ref));
  };

  const respond = async (card: QuestionCard, mode: ResponseMode, answerText?: string) => {
    if (mode !== "rejected") store.markResolved(card.question_id); // optimistic
    try {
      await client.respond(card.question_id, mode, answerText);
    } catch (err) {
      if (mode !== "rejected") store.markOpenAgain(card.question_id);
      throw err;
    }
    await refreshDocumentation();
  };

  store.subscribe((cards) => {
    const latest = cards.filter((c) => c.status === "open").at(-1);
    const snapshot = null; // served snapshots attach per-step; backdrop suffices here
    showAnchor(viewerEl, latest?.anchor ?? null, snapshot, VIEWPORT);
  });

  renderCards(cardsEl, badgeEl, store, {
    respond,
    hover: (card) => highlightMarker(viewerEl, card?.anchor?.element_id ?? null),
  });

  poller.start();
  void refreshDocumentation();
  return () => poller.stop();
}

declare global {
  interface Window {
    mountDeclinkApp?: typeof mountApp;
  }
}

if (typeof window !== "undefined") {
  window.mountDeclinkApp = mountApp;
}

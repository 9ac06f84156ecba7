import type { Documentation } from "./types.js";

/**
 * Documentation page: a straight rendering of GET /documentation. The view
 * invents nothing client-side; every field shown comes from the server
 * payload.
 */
export function renderDocumentation(
  container: HTMLElement,
  doc: Documentation,
  snapshotUrl: (ref: string) => string,
): void {
  container.innerHTML = "";
  container.dataset.sessionId = doc.session_id;
  for (const entry of doc.steps) {
    const card = document.createElement("section");
    card.className = `doc-step ${entry.status}`;
    card.dataset.stepId = entry.step_id;

    if (entry.snapshot_refs.length > 0) {
      const strip = document.createElement("div");
      strip.className = "snapshots";
      for (const ref of entry.snapshot_refs) {
        const img = document.createElement("img");
        img.className = "doc-snapshot";
        img.src = snapshotUrl(ref);
        strip.appendChild(img);
      }
      card.appendChild(strip);
    }

    const summary = document.createElement("dl");
    summary.className = "summary";
    appendField(summary, "Decision and actions", entry.decision_and_actions);
    appendField(summary, "Rationale", entry.rationale);
    appendField(summary, "Progression", entry.progression);
    card.appendChild(summary);

    if (entry.assessment) {
      const grade = document.createElement("span");
      grade.className = `assessment ${entry.assessment.overall.toLowerCase()}`;
      grade.textContent = entry.assessment.overall;
      card.appendChild(grade);
    }

    if (entry.qa) {
      const qa = document.createElement("div");
      qa.className = "qa";
      const q = document.createElement("p");
      q.className = "qa-question";
      q.textContent = entry.qa.question_text;
      qa.appendChild(q);
      if (entry.qa.response?.answer_text) {
        const a = document.createElement("p");
        a.className = "qa-answer";
        a.textContent = entry.qa.response.answer_text;
        qa.appendChild(a);
      } else if (entry.qa.response?.mode === "accepted" && entry.qa.inferred_rationale) {
        const a = document.createElement("p");
        a.className = "qa-answer accepted";
        a.textContent = entry.qa.inferred_rationale.text;
        qa.appendChild(a);
      }
      card.appendChild(qa);
    }

    container.appendChild(card);
  }
}

function appendField(list: HTMLElement, label: string, value: string | null): void {
  if (value === null) return;
  const dt = document.createElement("dt");
  dt.textContent = label;
  const dd = document.createElement("dd");
  dd.textContent = value;
  list.appendChild(dt);
  list.appendChild(dd);
}

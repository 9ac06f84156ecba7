import type { Anchor } from "./types.js";

export interface CanvasViewport {
  /** size of the DOM viewer element, px */
  width: number;
  height: number;
  /** extent of the source canvas in canvas units */
  canvasWidth: number;
  canvasHeight: number;
}

export interface MarkerPlacement {
  left: number;
  top: number;
  /** the anchor bbox mapped into viewer px, for hit tests and highlight */
  rect: { left: number; top: number; width: number; height: number };
}

function scaleOf(viewport: CanvasViewport): number {
  return Math.min(viewport.width / viewport.canvasWidth, viewport.height / viewport.canvasHeight);
}

/** Marker sits at the center of the anchored element's bounding box. */
export function markerPlacement(anchor: Anchor, viewport: CanvasViewport): MarkerPlacement {
  const scale = scaleOf(viewport);
  const [x, y, w, h] = anchor.bbox;
  return {
    left: (x + w / 2) * scale,
    top: (y + h / 2) * scale,
    rect: { left: x * scale, top: y * scale, width: w * scale, height: h * scale },
  };
}

/**
 * Render the snapshot layer for a card: the latest snapshot (or a neutral
 * backdrop when none resolves) with a question marker over the anchor.
 * Anchor-less cards render the snapshot with no marker.
 */
export function showAnchor(
  layer: HTMLElement,
  anchor: Anchor | null,
  snapshotUrl: string | null,
  viewport: CanvasViewport,
): HTMLElement | null {
  layer.innerHTML = "";
  layer.classList.add("snapshot-layer");
  layer.style.position = "relative";
  layer.style.width = `${viewport.width}px`;
  layer.style.height = `${viewport.height}px`;

  if (snapshotUrl) {
    const img = document.createElement("img");
    img.className = "snapshot";
    img.src = snapshotUrl;
    img.style.width = "100%";
    img.style.height = "100%";
    layer.appendChild(img);
  }
  if (!anchor) return null;

  const placement = markerPlacement(anchor, viewport);
  const marker = document.createElement("div");
  marker.className = "anchor-marker";
  marker.dataset.elementId = anchor.element_id;
  marker.textContent = "?";
  marker.style.position = "absolute";
  marker.style.left = `${placement.left}px`;
  marker.style.top = `${placement.top}px`;
  marker.style.transform = "translate(-50%, -50%)";
  marker.addEventListener("click", () => {
    marker.scrollIntoView({ block: "center", inline: "center" });
    marker.classList.add("focused");
  });
  layer.appendChild(marker);
  return marker;
}

export function highlightMarker(layer: HTMLElement, elementId: string | null): void {
  for (const el of Array.from(layer.querySelectorAll<HTMLElement>(".anchor-marker"))) {
    el.classList.toggle("highlight", el.dataset.elementId === elementId);
  }
}

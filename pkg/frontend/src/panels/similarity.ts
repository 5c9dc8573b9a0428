/** Panel F: t-SNE similarity scatter with hop rings and collision toggle.
 *
 * Points come straight from the embedding endpoint; the collision toggle
 * swaps between the raw and the service's collision-resolved coordinates
 * (both are in the payload), never recomputing anything client-side.
 */

import { applyEmphasis, bindPmuEvents } from "../emphasis.js";
import type { AppState } from "../state.js";
import { linearScale, svgEl } from "../svg.js";
import type { EmbeddingPoint } from "../types.js";

const W = 420;
const H = 300;
const PAD = 28;

export function mountSimilarityPanel(container: HTMLElement, state: AppState): void {
  container.classList.add("panel-similarity");
  const title = document.createElement("h3");
  title.textContent = "Similarity";
  const toggle = document.createElement("button");
  toggle.setAttribute("data-role", "collision-toggle");
  toggle.textContent = "resolve collisions";
  toggle.addEventListener("click", () => {
    state.setToggles({ collision: !state.toggles.collision });
  });
  container.append(title, toggle);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${W} ${H}`,
    width: String(W),
    height: String(H),
  });
  const ringLayer = svgEl("g", { "data-role": "ring-layer" });
  const pointLayer = svgEl("g", { "data-role": "point-layer" });
  svg.append(ringLayer, pointLayer);
  container.append(svg);

  function activePoints(): EmbeddingPoint[] {
    const emb = state.embedding;
    if (!emb) return [];
    if (state.toggles.collision && emb.resolved) return emb.resolved.points;
    return emb.points;
  }

  function render(): void {
    while (ringLayer.firstChild) ringLayer.removeChild(ringLayer.firstChild);
    while (pointLayer.firstChild) pointLayer.removeChild(pointLayer.firstChild);
    const emb = state.embedding;
    const points = activePoints();
    if (!emb || points.length === 0) return;

    const xs = points.map((p) => p.x);
    const ys = points.map((p) => p.y);
    const span = Math.max(
      Math.max(...xs) - Math.min(...xs),
      Math.max(...ys) - Math.min(...ys),
      1e-9,
    );
    const cx = (Math.max(...xs) + Math.min(...xs)) / 2;
    const cy = (Math.max(...ys) + Math.min(...ys)) / 2;
    const sx = linearScale([cx - span / 2, cx + span / 2], [PAD, W - PAD]);
    const sy = linearScale([cy - span / 2, cy + span / 2], [H - PAD, PAD]);
    const pxPerUnit = (W - 2 * PAD) / span;

    const epicenters = state.epicenters.filter((e) =>
      points.some((p) => p.pmu === e),
    );
    if (epicenters.length > 0) {
      const ex =
        epicenters.reduce((acc, e) => acc + points.find((p) => p.pmu === e)!.x, 0) /
        epicenters.length;
      const ey =
        epicenters.reduce((acc, e) => acc + points.find((p) => p.pmu === e)!.y, 0) /
        epicenters.length;
      for (const ring of emb.rings) {
        ringLayer.append(
          svgEl("circle", {
            cx: String(sx(ex)),
            cy: String(sy(ey)),
            r: String(ring.radius * pxPerUnit),
            fill: "none",
            stroke: "#999",
            "stroke-dasharray": "4,3",
            class: "hop-ring",
            "data-hop": String(ring.hop),
          }),
        );
        const label = svgEl("text", {
          x: String(sx(ex) + ring.radius * pxPerUnit),
          y: String(sy(ey) - 4),
          class: "ring-label",
          "font-size": "9",
        });
        label.textContent = `hop ${ring.hop}`;
        ringLayer.append(label);
      }
    }

    const flagged = new Set(state.frame?.flags.map((f) => f.pmu) ?? []);
    for (const point of points) {
      const circle = svgEl("circle", {
        cx: String(sx(point.x)),
        cy: String(sy(point.y)),
        r: "6",
        class: "pmu-dot",
        fill: flagged.has(point.pmu) ? "#c0392b" : "#5b7f9f",
      });
      if (state.epicenters.includes(point.pmu)) circle.classList.add("epicenter");
      bindPmuEvents(circle, point.pmu, state);
      pointLayer.append(circle);
    }
    applyEmphasis(container, state);
  }

  state.on("embedding", render);
  state.on("toggles", render);
  state.on("frame", () => {
    // Embedding is cleared on scrub; the app layer fetches the new frame's
    // embedding (cache-first) and emits "embedding" when it lands.
    if (!state.embedding) {
      while (pointLayer.firstChild) pointLayer.removeChild(pointLayer.firstChild);
      while (ringLayer.firstChild) ringLayer.removeChild(ringLayer.firstChild);
    }
  });
  state.on("hover", () => applyEmphasis(container, state));
  state.on("selection", () => applyEmphasis(container, state));
}

/** Panel G: the epicentric cluster dendrogram.
 *
 * Layers of cluster cards hang below the epicenter root, one row per hop.
 * Each card shows the correlation swatch (darker tracks the root more
 * closely), a five-number box-plot glyph of the magnitudes at f*, a spectrum
 * sparkline, and link counts. Flows between adjacent hops scale their
 * thickness with the service-computed weight and inherit the upstream
 * cluster's swatch color. Self and intra-hop links live on their own layers
 * so the toggles flip visibility without touching any card geometry.
 *
 * Scrubbing elsewhere never rebuilds this panel: only the Update button
 * (explicit submit) lands a new model; Sync stages the selection made in
 * the other panels.
 */

import { applyEmphasis } from "../emphasis.js";
import type { AppState } from "../state.js";
import { correlationShade, el, svgEl } from "../svg.js";
import type { ClusterNode, DendrogramModel } from "../types.js";

const CARD_W = 104;
const CARD_H = 64;
const ROW_GAP = 46;
const COL_GAP = 18;
const W = 640;

export interface DendrogramHooks {
  onUpdate(staged: { epicenterIds: string[]; selectedIds: string[]; k: number | null }): void;
}

export function mountDendrogramPanel(
  container: HTMLElement,
  state: AppState,
  hooks: DendrogramHooks,
): void {
  container.classList.add("panel-dendrogram");
  const title = document.createElement("h3");
  title.textContent = "Epicentric Dendrogram";
  const staleBadge = el("span", { "data-role": "stale-badge", hidden: "" }, "stale");
  container.append(title, staleBadge);

  const controls = el("div", { class: "dendrogram-controls" });
  const epicenterInput = el("input", { "data-role": "epicenter-input", size: "12" });
  const kInput = el("input", {
    "data-role": "k-input",
    type: "number",
    min: "1",
    placeholder: "auto",
  });
  const syncBtn = el("button", { "data-role": "sync" }, "Sync");
  const updateBtn = el("button", { "data-role": "update" }, "Update");
  const selfToggle = el("button", { "data-role": "toggle-self" }, "self links");
  const intraToggle = el("button", { "data-role": "toggle-intra" }, "intra-hop links");
  controls.append(epicenterInput, kInput, syncBtn, updateBtn, selfToggle, intraToggle);
  container.append(controls);

  let stagedSelection: string[] = [];
  syncBtn.addEventListener("click", () => {
    stagedSelection = [...state.selected].sort();
    syncBtn.textContent = `Sync (${stagedSelection.length})`;
  });
  updateBtn.addEventListener("click", () => {
    const epicenterIds = epicenterInput.value
      .split(",")
      .map((s) => s.trim())
      .filter(Boolean);
    const k = kInput.value === "" ? null : Number(kInput.value);
    hooks.onUpdate({ epicenterIds, selectedIds: stagedSelection, k });
  });
  selfToggle.addEventListener("click", () =>
    state.setToggles({ self: !state.toggles.self }),
  );
  intraToggle.addEventListener("click", () =>
    state.setToggles({ intraHop: !state.toggles.intraHop }),
  );

  const svg = svgEl("svg", { width: String(W), height: "420", viewBox: `0 0 ${W} 420` });
  const flowLayer = svgEl("g", { "data-role": "flow-layer" });
  const intraLayer = svgEl("g", { "data-role": "intra-layer" });
  const cardLayer = svgEl("g", { "data-role": "card-layer" });
  svg.append(flowLayer, intraLayer, cardLayer);
  container.append(svg);
  const footer = el("div", { "data-role": "layer-footers" });
  container.append(footer);

  function cardOrigin(model: DendrogramModel, hop: number, index: number): [number, number] {
    const rowIndex = hop === 0 ? 0 : model.layers.findIndex((l) => l.hop === hop) + 1;
    const rowSize = hop === 0 ? 1 : model.layers[rowIndex - 1].clusters.length;
    const rowWidth = rowSize * CARD_W + (rowSize - 1) * COL_GAP;
    const x = (W - rowWidth) / 2 + index * (CARD_W + COL_GAP);
    const y = 16 + rowIndex * (CARD_H + ROW_GAP);
    return [x, y];
  }

  function drawCard(model: DendrogramModel, node: ClusterNode): SVGGElement {
    const [x, y] = cardOrigin(model, node.hop, node.index);
    const g = svgEl("g", {
      transform: `translate(${x},${y})`,
      class: "cluster-card",
      "data-cluster": `${node.hop}:${node.index}`,
      "data-cluster-pmus": node.pmu_ids.join(","),
    });
    g.append(
      svgEl("rect", {
        width: String(CARD_W),
        height: String(CARD_H),
        rx: "4",
        fill: "#fff",
        stroke: "#667",
      }),
    );
    // Correlation swatch strip, darker = closer to the root.
    g.append(
      svgEl("rect", {
        width: String(CARD_W),
        height: "8",
        fill: correlationShade(node.swatch_r, "red"),
        class: "swatch-strip",
      }),
    );

    // Box-plot glyph over magnitudes at f*.
    const [lo, q1, med, q3, hi] = node.box_stats;
    const span = hi - lo || 1;
    const bx = (v: number) => 6 + ((v - lo) / span) * (CARD_W - 12);
    const by = 22;
    g.append(
      svgEl("line", { x1: String(bx(lo)), x2: String(bx(hi)), y1: String(by), y2: String(by), stroke: "#555" }),
      svgEl("rect", {
        x: String(bx(q1)),
        y: String(by - 5),
        width: String(Math.max(bx(q3) - bx(q1), 0.5)),
        height: "10",
        fill: "#d8e2ef",
        stroke: "#555",
        class: "box-glyph",
      }),
      svgEl("line", { x1: String(bx(med)), x2: String(bx(med)), y1: String(by - 5), y2: String(by + 5), stroke: "#222" }),
    );

    // Spectrum sparkline from the cluster-wise average.
    const spec = node.avg_spectrum;
    const specPeak = Math.max(...spec, 1e-12);
    const points = spec
      .map((v, i) => {
        const sxp = 6 + (i / Math.max(spec.length - 1, 1)) * (CARD_W - 12);
        const syp = CARD_H - 8 - (v / specPeak) * 18;
        return `${sxp.toFixed(1)},${syp.toFixed(1)}`;
      })
      .join(" ");
    g.append(
      svgEl("polyline", { points, fill: "none", stroke: "#47632f", class: "spark" }),
    );

    const label = svgEl("text", { x: "6", y: "40", "font-size": "9", class: "card-label" });
    label.textContent = `${node.pmu_ids.length} PMUs / ${node.self_link_count} self`;
    g.append(label);

    // Self links render as a corner arc with the instance count.
    if (node.self_link_count > 0) {
      const arc = svgEl("path", {
        d: `M 2 ${CARD_H - 14} A 12 12 0 0 0 14 ${CARD_H - 2}`,
        fill: "none",
        stroke: "#8a5a2a",
        "stroke-width": "2",
        class: "self-link",
      });
      g.append(arc);
    }
    return g;
  }

  function render(): void {
    while (flowLayer.firstChild) flowLayer.removeChild(flowLayer.firstChild);
    while (intraLayer.firstChild) intraLayer.removeChild(intraLayer.firstChild);
    while (cardLayer.firstChild) cardLayer.removeChild(cardLayer.firstChild);
    while (footer.firstChild) footer.removeChild(footer.firstChild);
    const model = state.dendrogram?.model;
    if (!model) return;

    cardLayer.append(drawCard(model, model.root));
    for (const layer of model.layers) {
      for (const cluster of layer.clusters) cardLayer.append(drawCard(model, cluster));
      const sil = layer.silhouette === null ? "n/a" : layer.silhouette.toFixed(3);
      footer.append(
        el(
          "div",
          { "data-role": "layer-footer", "data-hop": String(layer.hop) },
          `Hop ${layer.hop} - ${layer.total_pmus} PMUs - silhouette ${sil} (k=${layer.k})`,
        ),
      );
    }

    const nodeOf = (hop: number, index: number): ClusterNode =>
      hop === 0
        ? model.root
        : model.layers.find((l) => l.hop === hop)!.clusters[index];

    for (const link of model.links) {
      const [fh, fi] = link.from;
      const [th, ti] = link.to;
      const [fx, fy] = cardOrigin(model, fh, fi);
      const [tx, ty] = cardOrigin(model, th, ti);
      if (link.kind === "inter_hop") {
        const weight = link.flow_weight ?? 0;
        const flow = svgEl("line", {
          x1: String(fx + CARD_W / 2),
          y1: String(fy + CARD_H),
          x2: String(tx + CARD_W / 2),
          y2: String(ty),
          stroke: correlationShade(nodeOf(fh, fi).swatch_r, "red"),
          "stroke-width": String(Math.max(1, weight * 14)),
          class: "flow",
          "data-flow": `${fh}:${fi}->${th}:${ti}`,
          "data-weight": String(weight),
        });
        flowLayer.append(flow);
      } else if (link.kind === "intra_hop") {
        const midY = fy - 10;
        const arc = svgEl("path", {
          d: `M ${fx + CARD_W / 2} ${fy} Q ${(fx + tx) / 2 + CARD_W / 2} ${midY} ${
            tx + CARD_W / 2
          } ${ty}`,
          fill: "none",
          stroke: "#777",
          "stroke-dasharray": "4,3",
          class: "intra-link",
        });
        intraLayer.append(arc);
      }
    }
    renderToggles();
    applyEmphasis(container, state);
  }

  function renderToggles(): void {
    intraLayer.classList.toggle("hidden-links", !state.toggles.intraHop);
    container.querySelectorAll(".self-link").forEach((node) => {
      node.classList.toggle("hidden-links", !state.toggles.self);
    });
    staleBadge.toggleAttribute("hidden", !state.dendrogramStale);
  }

  state.on("dendrogram", render);
  state.on("toggles", renderToggles);
  state.on("frame", renderToggles); // stale badge only; cards never move
  state.on("hover", () => applyEmphasis(container, state));
  state.on("selection", () => applyEmphasis(container, state));
}

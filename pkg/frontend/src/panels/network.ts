/** Panel B: grid network with the KDE contour underlay.
 *
 * Substations are rectangles, PMUs circles, edges lines (transformers
 * dashed). The white-to-purple field under the graph is the service-provided
 * kernel density estimate of peak magnitudes for the current frame; flagged
 * PMUs pick up a `flagged` class on every re-bind.
 */

import { applyEmphasis, bindPmuEvents } from "../emphasis.js";
import { geographicLayout, forceLayout, type NodePositions } from "../layout.js";
import type { AppState } from "../state.js";
import { linearScale, purpleRamp, svgEl } from "../svg.js";

const W = 420;
const H = 320;

export function mountNetworkPanel(container: HTMLElement, state: AppState): void {
  container.classList.add("panel-network");
  const title = document.createElement("h3");
  title.textContent = "Grid Network";
  const layoutToggle = document.createElement("button");
  layoutToggle.setAttribute("data-role", "layout-toggle");
  layoutToggle.textContent = "force layout";
  container.append(title, layoutToggle);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${W} ${H}`,
    width: String(W),
    height: String(H),
  });
  const kdeLayer = svgEl("g", { "data-role": "kde-layer" });
  const edgeLayer = svgEl("g", { "data-role": "edge-layer" });
  const nodeLayer = svgEl("g", { "data-role": "node-layer" });
  svg.append(kdeLayer, edgeLayer, nodeLayer);
  container.append(svg);

  let useForce = false;
  layoutToggle.addEventListener("click", () => {
    useForce = !useForce;
    layoutToggle.textContent = useForce ? "geographic layout" : "force layout";
    renderGraph();
    renderKde();
  });

  let positions: NodePositions | null = null;

  function computeScales(pos: NodePositions) {
    const xs = [...pos.substations.values()].map((p) => p[0]);
    const ys = [...pos.substations.values()].map((p) => p[1]);
    const pad = 24;
    return {
      sx: linearScale([Math.min(...xs), Math.max(...xs)], [pad, W - pad]),
      sy: linearScale([Math.min(...ys), Math.max(...ys)], [H - pad, pad]),
    };
  }

  function renderGraph(): void {
    const topo = state.topology;
    if (!topo) return;
    positions = useForce ? forceLayout(topo, 7) : geographicLayout(topo);
    const { sx, sy } = computeScales(positions);

    while (edgeLayer.firstChild) edgeLayer.removeChild(edgeLayer.firstChild);
    for (const edge of topo.edges) {
      const [ax, ay] = positions.buses.get(edge.bus_a)!;
      const [bx, by] = positions.buses.get(edge.bus_b)!;
      edgeLayer.append(
        svgEl("line", {
          x1: String(sx(ax)),
          y1: String(sy(ay)),
          x2: String(sx(bx)),
          y2: String(sy(by)),
          class: `edge ${edge.kind}`,
          "stroke-dasharray": edge.kind === "transformer" ? "3,2" : "",
          stroke: "#888",
        }),
      );
    }

    while (nodeLayer.firstChild) nodeLayer.removeChild(nodeLayer.firstChild);
    for (const sub of topo.substations) {
      const [x, y] = positions.substations.get(sub.id)!;
      const rect = svgEl("rect", {
        x: String(sx(x) - 5),
        y: String(sy(y) - 5),
        width: "10",
        height: "10",
        class: "substation",
        fill: "#cbd5d0",
      });
      const name = svgEl("title");
      name.textContent = sub.name;
      rect.append(name);
      nodeLayer.append(rect);
    }
    for (const pmu of topo.pmus) {
      const [x, y] = positions.pmus.get(pmu.id)!;
      const circle = svgEl("circle", {
        cx: String(sx(x)),
        cy: String(sy(y)),
        r: "5",
        class: "pmu",
        fill: "#4c7fa8",
      });
      bindPmuEvents(circle, pmu.id, state);
      nodeLayer.append(circle);
    }
    renderFlags();
  }

  function renderKde(): void {
    while (kdeLayer.firstChild) kdeLayer.removeChild(kdeLayer.firstChild);
    const frame = state.frame;
    if (!frame || !positions) return;
    const kde = frame.kde;
    const res = kde.resolution;
    const [x0, y0, x1, y1] = kde.bbox;
    const { sx, sy } = computeScales(positions);
    const peak = Math.max(...kde.values, 1e-12);
    const cellW = (x1 - x0) / (res - 1 || 1);
    const cellH = (y1 - y0) / (res - 1 || 1);
    // Geographic layout only: the field is defined over sensor coordinates.
    if (useForce) return;
    for (let row = 0; row < res; row += 1) {
      for (let col = 0; col < res; col += 1) {
        const v = kde.values[row * res + col];
        if (v <= peak * 0.02) continue;
        const gx = x0 + col * cellW;
        const gy = y0 + row * cellH;
        kdeLayer.append(
          svgEl("rect", {
            x: String(sx(gx - cellW / 2)),
            y: String(sy(gy + cellH / 2)),
            width: String(Math.abs(sx(gx + cellW / 2) - sx(gx - cellW / 2))),
            height: String(Math.abs(sy(gy - cellH / 2) - sy(gy + cellH / 2))),
            fill: purpleRamp(v / peak),
            "fill-opacity": "0.55",
            class: "kde-cell",
          }),
        );
      }
    }
  }

  function renderFlags(): void {
    const frame = state.frame;
    const flagged = new Set(frame?.flags.map((f) => f.pmu) ?? []);
    nodeLayer.querySelectorAll("circle[data-pmu]").forEach((node) => {
      node.classList.toggle("flagged", flagged.has(node.getAttribute("data-pmu")!));
    });
    applyEmphasis(container, state);
  }

  state.on("data", () => {
    renderGraph();
    renderKde();
  });
  state.on("frame", () => {
    renderKde();
    renderFlags();
  });
  state.on("hover", () => applyEmphasis(container, state));
  state.on("selection", () => applyEmphasis(container, state));
}

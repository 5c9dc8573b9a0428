/** Panels D and E: spectrum line charts for selected vs non-selected PMUs.
 *
 * One factory serves both panels; the only differences are which PMUs a
 * panel draws and the hue of the correlation shading (red for selected,
 * blue for the rest). Stroke depth encodes correlation with the peak PMU.
 */

import { applyEmphasis, bindPmuEvents } from "../emphasis.js";
import type { AppState } from "../state.js";
import { correlationShade, linearScale, svgEl } from "../svg.js";

const W = 420;
const H = 180;
const PAD = 24;

export function mountFftPanel(
  container: HTMLElement,
  state: AppState,
  kind: "selected" | "unselected",
): void {
  container.classList.add(`panel-fft-${kind}`);
  const title = document.createElement("h3");
  title.textContent = kind === "selected" ? "Selected PMU FFTs" : "Non-Selected PMU FFTs";
  container.append(title);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${W} ${H}`,
    width: String(W),
    height: String(H),
  });
  const lineLayer = svgEl("g", { "data-role": "line-layer" });
  svg.append(lineLayer);
  container.append(svg);

  function wanted(pmu: string): boolean {
    return kind === "selected" ? state.selected.has(pmu) : !state.selected.has(pmu);
  }

  function render(): void {
    while (lineLayer.firstChild) lineLayer.removeChild(lineLayer.firstChild);
    const frame = state.frame;
    const bins = state.analysis?.bins_hz;
    if (!frame || !bins) return;

    const pmus = Object.keys(frame.mags).filter(
      (p) => wanted(p) && frame.mags[p] !== null,
    );
    let peak = 0;
    for (const p of pmus) {
      for (const v of frame.mags[p]!) peak = Math.max(peak, v);
    }
    const sx = linearScale([bins[0], bins[bins.length - 1]], [PAD, W - PAD]);
    const sy = linearScale([0, peak || 1], [H - PAD, PAD / 2]);

    for (const pmu of pmus) {
      const values = frame.mags[pmu]!;
      const points = values
        .map((v, i) => `${sx(bins[i])},${sy(v)}`)
        .join(" ");
      const line = svgEl("polyline", {
        points,
        fill: "none",
        class: "fft-line",
        stroke: correlationShade(
          frame.correlation[pmu] ?? 0,
          kind === "selected" ? "red" : "blue",
        ),
        "stroke-width": "1.2",
      });
      bindPmuEvents(line, pmu, state);
      lineLayer.append(line);
    }
    applyEmphasis(container, state);
  }

  state.on("data", render);
  state.on("frame", render);
  state.on("selection", render);
  state.on("hover", () => applyEmphasis(container, state));
}

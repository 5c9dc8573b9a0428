/** Panel C: main oscillation frequency over the analysis range.
 *
 * A polyline of f* per window with gaps left open; the cursor tracks the
 * scrub position. Clicking a timeline marker scrubs to that frame.
 */

import { nearestEntryIndex, type AppState } from "../state.js";
import { formatHz, linearScale, svgEl } from "../svg.js";

const W = 420;
const H = 160;
const PAD = 26;

export function mountTimelinePanel(container: HTMLElement, state: AppState): void {
  container.classList.add("panel-timeline");
  const title = document.createElement("h3");
  title.textContent = "Main Oscillation Frequency";
  const readout = document.createElement("span");
  readout.setAttribute("data-role", "fstar-readout");
  container.append(title, readout);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${W} ${H}`,
    width: String(W),
    height: String(H),
  });
  const pathLayer = svgEl("g", { "data-role": "path-layer" });
  const markerLayer = svgEl("g", { "data-role": "marker-layer" });
  const cursor = svgEl("line", {
    "data-role": "cursor",
    y1: String(PAD / 2),
    y2: String(H - PAD),
    stroke: "#b33",
  });
  svg.append(pathLayer, markerLayer, cursor);
  container.append(svg);

  function render(): void {
    while (pathLayer.firstChild) pathLayer.removeChild(pathLayer.firstChild);
    while (markerLayer.firstChild) markerLayer.removeChild(markerLayer.firstChild);
    const entries = state.timeline?.entries ?? [];
    if (entries.length === 0) return;

    const ticks = entries.map((e) => e.start_tick);
    const freqs = entries.filter((e) => e.f_star_hz !== null).map((e) => e.f_star_hz!);
    const sx = linearScale([Math.min(...ticks), Math.max(...ticks, 1)], [PAD, W - PAD]);
    const sy = linearScale(
      [0, Math.max(...freqs, 1)],
      [H - PAD, PAD / 2],
    );

    let run: string[] = [];
    const flush = () => {
      if (run.length > 1) {
        pathLayer.append(
          svgEl("polyline", {
            points: run.join(" "),
            fill: "none",
            stroke: "#356",
            "stroke-width": "1.5",
          }),
        );
      }
      run = [];
    };
    entries.forEach((entry, i) => {
      if (entry.gap || entry.f_star_hz === null) {
        flush();
        return;
      }
      const x = sx(entry.start_tick);
      const y = sy(entry.f_star_hz);
      run.push(`${x},${y}`);
      const marker = svgEl("circle", {
        cx: String(x),
        cy: String(y),
        r: "3",
        class: "timeline-marker",
        fill: "#356",
        "data-entry": String(i),
      });
      marker.addEventListener("click", () => state.scrubTo(i));
      markerLayer.append(marker);
    });
    flush();
    renderCursor();
  }

  function renderCursor(): void {
    const entries = state.timeline?.entries ?? [];
    const idx = nearestEntryIndex(state);
    if (idx === null || entries.length === 0) {
      cursor.setAttribute("x1", "-10");
      cursor.setAttribute("x2", "-10");
      readout.textContent = "";
      return;
    }
    const ticks = entries.map((e) => e.start_tick);
    const sx = linearScale([Math.min(...ticks), Math.max(...ticks, 1)], [PAD, W - PAD]);
    const x = sx(entries[idx].start_tick);
    cursor.setAttribute("x1", String(x));
    cursor.setAttribute("x2", String(x));
    readout.textContent = formatHz(state.frame?.f_star_hz ?? null);
  }

  state.on("data", render);
  state.on("frame", renderCursor);
}

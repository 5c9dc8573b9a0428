/** Linked-highlighting plumbing shared by every panel.
 *
 * Panels tag PMU-bound elements with `data-pmu` (and cluster elements with
 * `data-cluster-pmus`); emphasis is applied as CSS classes only, so hover and
 * selection changes never rebuild or re-lay-out a panel.
 */

import type { AppState } from "./state.js";

export function applyEmphasis(root: ParentNode, state: AppState): void {
  root.querySelectorAll("[data-pmu]").forEach((node) => {
    const pmu = node.getAttribute("data-pmu")!;
    node.classList.toggle("hover", state.hovered === pmu);
    node.classList.toggle("selected", state.selected.has(pmu));
  });
  root.querySelectorAll("[data-cluster-pmus]").forEach((node) => {
    const pmus = node.getAttribute("data-cluster-pmus")!.split(",");
    node.classList.toggle(
      "hover",
      state.hovered !== null && pmus.includes(state.hovered),
    );
    node.classList.toggle(
      "selected",
      pmus.some((p) => state.selected.has(p)),
    );
  });
}

export function bindPmuEvents(node: Element, pmu: string, state: AppState): void {
  node.setAttribute("data-pmu", pmu);
  node.addEventListener("mouseenter", () => state.hover(pmu));
  node.addEventListener("mouseleave", () => state.hover(null));
  node.addEventListener("click", () => state.toggleSelect(pmu));
}

/** Panel A: event selection, analysis parameters, flagged list, time slider.
 *
 * The flagged list mirrors the current frame: selection icon, PMU id, a
 * swatch shaded by correlation to the peak PMU, and the magnitude at the
 * oscillation frequency. Scrubbing the slider re-binds panels B-F.
 */

import { applyEmphasis } from "../emphasis.js";
import type { AppState } from "../state.js";
import { correlationShade, el } from "../svg.js";

export interface AnalysisParams {
  from: string;
  to: string;
  window_s: number;
  attribute: string;
  threshold_pct: number;
}

export interface SettingsHooks {
  onSubmit(params: AnalysisParams): void;
}

export function mountSettingsPanel(
  container: HTMLElement,
  state: AppState,
  hooks: SettingsHooks,
): void {
  container.classList.add("panel-settings");
  container.append(el("h3", {}, "Settings"));

  const eventSelect = el("select", { "data-role": "event-select" });
  const fromInput = el("input", { "data-role": "from", size: "22" });
  const toInput = el("input", { "data-role": "to", size: "22" });
  const windowSelect = el("select", { "data-role": "window" });
  for (const w of [2, 5, 10]) {
    windowSelect.append(el("option", { value: String(w) }, `${w} s`));
  }
  const attrInput = el("input", { "data-role": "attribute", value: "VPm", size: "5" });
  const thresholdInput = el("input", {
    "data-role": "threshold",
    type: "number",
    min: "1",
    max: "100",
    value: "100",
  });
  const submit = el("button", { "data-role": "submit" }, "Submit");

  eventSelect.addEventListener("change", () => {
    const ev = state.events.find((e) => e.id === eventSelect.value);
    if (ev) {
      fromInput.value = ev.t_start;
      toInput.value = ev.t_end;
    }
  });
  submit.addEventListener("click", () => {
    hooks.onSubmit({
      from: fromInput.value,
      to: toInput.value,
      window_s: Number(windowSelect.value),
      attribute: attrInput.value,
      threshold_pct: Number(thresholdInput.value),
    });
  });

  const form = el("div", { class: "settings-form" });
  form.append(
    labeled("Event", eventSelect),
    labeled("From", fromInput),
    labeled("To", toInput),
    labeled("Window", windowSelect),
    labeled("Attribute", attrInput),
    labeled("Threshold %", thresholdInput),
    submit,
  );
  container.append(form);

  const slider = el("input", {
    type: "range",
    "data-role": "time-slider",
    min: "0",
    max: "0",
    value: "0",
  });
  slider.addEventListener("input", () => state.scrubTo(Number(slider.value)));
  const sliderLabel = el("span", { "data-role": "slider-time" }, "--");
  container.append(el("div", { class: "scrub-row" }));
  container.lastElementChild!.append(slider, sliderLabel);

  const flaggedTitle = el("h4", {}, "Flagged PMUs");
  const flaggedList = el("ul", { "data-role": "flagged-list" });
  container.append(flaggedTitle, flaggedList);

  function renderEvents(): void {
    while (eventSelect.firstChild) eventSelect.removeChild(eventSelect.firstChild);
    eventSelect.append(el("option", { value: "" }, "browse by time"));
    for (const ev of state.events) {
      eventSelect.append(
        el("option", { value: ev.id }, `${ev.id} (${ev.kind})`),
      );
    }
  }

  function renderFlags(): void {
    while (flaggedList.firstChild) flaggedList.removeChild(flaggedList.firstChild);
    const frame = state.frame;
    if (!frame) return;
    for (const flag of frame.flags) {
      const item = el("li", { "data-pmu": flag.pmu });
      const pick = el("input", { type: "checkbox", "data-role": "flag-select" });
      pick.checked = state.selected.has(flag.pmu);
      pick.addEventListener("change", () => state.toggleSelect(flag.pmu));
      const swatch = el("span", { class: "swatch" });
      swatch.style.background = correlationShade(
        frame.correlation[flag.pmu] ?? 0,
        "red",
      );
      item.append(
        pick,
        el("span", { class: "pmu-id" }, flag.pmu),
        swatch,
        el("span", { class: "mag" }, flag.magnitude.toExponential(3)),
      );
      flaggedList.append(item);
    }
    applyEmphasis(container, state);
  }

  function renderSlider(): void {
    const frames = state.analysis?.frames ?? [];
    slider.max = String(Math.max(frames.length - 1, 0));
    slider.value = String(state.frameIndex);
    sliderLabel.textContent = state.frame?.t ?? "--";
  }

  state.on("data", () => {
    renderEvents();
    renderSlider();
    renderFlags();
  });
  state.on("frame", () => {
    renderSlider();
    renderFlags();
  });
  state.on("selection", renderFlags);
  state.on("hover", () => applyEmphasis(container, state));
  renderEvents();
}

function labeled(text: string, control: HTMLElement): HTMLElement {
  const wrap = el("label", { class: "field" });
  wrap.append(el("span", {}, text), control);
  return wrap;
}

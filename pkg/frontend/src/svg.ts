/** Tiny DOM/SVG helpers; no framework, panels build their trees directly. */

const SVG_NS = "http://www.w3.org/2000/svg";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

export function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

export function clear(node: Element): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

export interface Scale {
  (value: number): number;
  invert(pixel: number): number;
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  fn.invert = (pixel: number) => d0 + ((pixel - r0) / (r1 - r0 || 1)) * span;
  return fn;
}

/** White -> purple ramp for the contour field, t in [0, 1]. */
export function purpleRamp(t: number): string {
  const c = Math.max(0, Math.min(1, t));
  const r = Math.round(255 - c * (255 - 84));
  const g = Math.round(255 - c * (255 - 39));
  const b = Math.round(255 - c * (255 - 143));
  return `rgb(${r},${g},${b})`;
}

/** Correlation shading: higher r, deeper shade. Hue differs per panel. */
export function correlationShade(r: number, hue: "red" | "blue"): string {
  const c = Math.max(0, Math.min(1, (r + 1) / 2));
  const strength = Math.round(40 + c * 60);
  return hue === "red"
    ? `hsl(0, ${strength}%, ${85 - c * 45}%)`
    : `hsl(215, ${strength}%, ${85 - c * 45}%)`;
}

export function formatHz(f: number | null): string {
  return f === null ? "--" : `${f.toFixed(2)} Hz`;
}

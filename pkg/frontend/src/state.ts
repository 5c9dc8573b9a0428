/** Shared application state: one selection model drives every panel.
 *
 * Panels subscribe to the events they care about. Hover/select changes fan
 * out everywhere (linked highlighting); the scrub position re-binds panels
 * B-F to the nearest frame; the dendrogram deliberately ignores scrubbing
 * and re-renders only when `applyDendrogram` lands after an explicit Update.
 */

import type {
  AnalyzeResponse,
  DendrogramResponse,
  EmbeddingResponse,
  EventRecord,
  FramePayload,
  TimelineResponse,
  Topology,
} from "./types.js";

export type StateEvent =
  | "data"        // analysis payload replaced
  | "frame"       // scrub position changed
  | "hover"       // hovered PMU changed
  | "selection"   // selected PMU set changed
  | "embedding"   // similarity payload for the current frame arrived
  | "dendrogram"  // dendrogram model replaced (explicit update only)
  | "toggles";    // link-class / collision toggles changed

export interface LinkToggles {
  self: boolean;
  intraHop: boolean;
  collision: boolean;
}

type Listener = () => void;

export class AppState {
  topology: Topology | null = null;
  events: EventRecord[] = [];
  analysis: AnalyzeResponse | null = null;
  timeline: TimelineResponse | null = null;
  embedding: EmbeddingResponse | null = null;
  dendrogram: DendrogramResponse | null = null;

  frameIndex = 0;
  hovered: string | null = null;
  selected = new Set<string>();
  epicenters: string[] = [];
  toggles: LinkToggles = { self: true, intraHop: true, collision: false };
  /** Scrubbing after an Update leaves the dendrogram showing stale params. */
  dendrogramStale = false;

  private listeners = new Map<StateEvent, Set<Listener>>();

  on(event: StateEvent, fn: Listener): () => void {
    if (!this.listeners.has(event)) this.listeners.set(event, new Set());
    this.listeners.get(event)!.add(fn);
    return () => this.listeners.get(event)!.delete(fn);
  }

  private emit(event: StateEvent): void {
    for (const fn of this.listeners.get(event) ?? []) fn();
  }

  get frame(): FramePayload | null {
    return this.analysis?.frames[this.frameIndex] ?? null;
  }

  setAnalysis(analysis: AnalyzeResponse): void {
    this.analysis = analysis;
    this.frameIndex = 0;
    this.embedding = null;
    this.emit("data");
    this.emit("frame");
  }

  setTimeline(timeline: TimelineResponse): void {
    this.timeline = timeline;
    this.emit("data");
  }

  /** Scrub: clamp to the loaded frames and re-bind panels B-F. */
  scrubTo(index: number): void {
    if (!this.analysis || this.analysis.frames.length === 0) return;
    const clamped = Math.max(0, Math.min(index, this.analysis.frames.length - 1));
    if (clamped === this.frameIndex) return;
    this.frameIndex = clamped;
    this.embedding = null;
    if (this.dendrogram) this.dendrogramStale = true;
    this.emit("frame");
  }

  hover(pmu: string | null): void {
    if (pmu === this.hovered) return;
    this.hovered = pmu;
    this.emit("hover");
  }

  toggleSelect(pmu: string): void {
    if (this.selected.has(pmu)) this.selected.delete(pmu);
    else this.selected.add(pmu);
    this.emit("selection");
  }

  setSelected(pmus: Iterable<string>): void {
    this.selected = new Set(pmus);
    this.emit("selection");
  }

  clearSelection(): void {
    this.hovered = null;
    this.selected.clear();
    this.emit("hover");
    this.emit("selection");
  }

  setEmbedding(embedding: EmbeddingResponse): void {
    this.embedding = embedding;
    this.emit("embedding");
  }

  /** Only the explicit Update/Submit path lands a new dendrogram. */
  applyDendrogram(model: DendrogramResponse, epicenters: string[]): void {
    this.dendrogram = model;
    this.epicenters = epicenters;
    this.dendrogramStale = false;
    this.emit("dendrogram");
  }

  setToggles(next: Partial<LinkToggles>): void {
    this.toggles = { ...this.toggles, ...next };
    this.emit("toggles");
  }
}

/** Index of the timeline entry nearest a frame's start tick. */
export function nearestEntryIndex(state: AppState): number | null {
  const frame = state.frame;
  const entries = state.timeline?.entries;
  if (!frame || !entries || entries.length === 0) return null;
  let best = 0;
  let bestGap = Infinity;
  entries.forEach((e, i) => {
    const gap = Math.abs(e.start_tick - frame.start_tick);
    if (gap < bestGap) {
      best = i;
      bestGap = gap;
    }
  });
  return best;
}

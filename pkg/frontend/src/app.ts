/** Composition root: builds the seven panels and wires them to the service.
 *
 * Everything analytic arrives as service JSON; this layer only routes it.
 * Scrubbing re-binds panels B-F from the already-loaded analysis payload
 * (embedding fetches are cache-first per window); the dendrogram refreshes
 * only through its Update button.
 */

import { ApiClient } from "./api.js";
import { mountDendrogramPanel } from "./panels/dendrogram.js";
import { mountFftPanel } from "./panels/fft.js";
import { mountNetworkPanel } from "./panels/network.js";
import { mountSettingsPanel, type AnalysisParams } from "./panels/settings.js";
import { mountSimilarityPanel } from "./panels/similarity.js";
import { mountTimelinePanel } from "./panels/timeline.js";
import { AppState } from "./state.js";
import { el } from "./svg.js";

export interface App {
  state: AppState;
  client: ApiClient;
  /** Run an analysis and hydrate panels A-F. */
  analyze(params: AnalysisParams): Promise<void>;
  /** Explicit dendrogram update (panel G's Update button calls this). */
  updateDendrogram(staged: {
    epicenterIds: string[];
    selectedIds: string[];
    k: number | null;
  }): Promise<void>;
  /** Cache-first embedding fetch for the current frame. */
  refreshEmbedding(): Promise<void>;
}

export function createApp(root: HTMLElement, client: ApiClient): App {
  const state = new AppState();
  let lastParams: AnalysisParams | null = null;

  const panels: Record<string, HTMLElement> = {};
  for (const [key, label] of [
    ["settings", "A"],
    ["network", "B"],
    ["timeline", "C"],
    ["fft-selected", "D"],
    ["fft-unselected", "E"],
    ["similarity", "F"],
    ["dendrogram", "G"],
  ] as const) {
    const panel = el("section", { id: `panel-${key}`, "data-panel": label });
    root.append(panel);
    panels[key] = panel;
  }

  async function analyze(params: AnalysisParams): Promise<void> {
    lastParams = params;
    const [analysis, timeline] = await Promise.all([
      client.analyze({
        from: params.from,
        to: params.to,
        window_s: params.window_s,
        attribute: params.attribute,
        threshold_pct: params.threshold_pct,
      }),
      client.timeline({
        from: params.from,
        to: params.to,
        window_s: params.window_s,
        attribute: params.attribute,
      }),
    ]);
    state.setTimeline(timeline);
    state.setAnalysis(analysis);
    await refreshEmbedding();
  }

  async function refreshEmbedding(): Promise<void> {
    const frame = state.frame;
    if (!frame || !lastParams) return;
    const pmus = Object.keys(frame.mags).filter((p) => frame.mags[p] !== null);
    if (pmus.length < 3) return;
    const epicenter = frame.peak_pmu && pmus.includes(frame.peak_pmu) ? [frame.peak_pmu] : null;
    const expected = frame.start_tick;
    const embedding = await client.embedding({
      selected_ids: pmus,
      at: frame.t,
      window_s: lastParams.window_s,
      attribute: lastParams.attribute,
      perplexity: Math.min(10, pmus.length - 1),
      seed: 7,
      epicenter_ids: epicenter,
      collision_radius: 0.6,
    });
    // A fast scrub can supersede this fetch; only land it if still current.
    if (state.frame?.start_tick === expected) {
      if (epicenter) state.epicenters = epicenter;
      state.setEmbedding(embedding);
    }
  }

  async function updateDendrogram(staged: {
    epicenterIds: string[];
    selectedIds: string[];
    k: number | null;
  }): Promise<void> {
    const frame = state.frame;
    if (!frame || !lastParams) return;
    const epicenters = staged.epicenterIds.length
      ? staged.epicenterIds
      : frame.peak_pmu !== null
        ? [frame.peak_pmu]
        : [];
    if (epicenters.length === 0) return;
    const selected = staged.selectedIds.filter((p) => !epicenters.includes(p));
    if (selected.length === 0) return;
    const response = await client.dendrogram({
      epicenter_ids: epicenters,
      selected_ids: selected,
      at: frame.t,
      window_s: lastParams.window_s,
      attribute: lastParams.attribute,
      k: staged.k,
    });
    state.applyDendrogram(response, epicenters);
  }

  mountSettingsPanel(panels["settings"], state, { onSubmit: (p) => void analyze(p) });
  mountNetworkPanel(panels["network"], state);
  mountTimelinePanel(panels["timeline"], state);
  mountFftPanel(panels["fft-selected"], state, "selected");
  mountFftPanel(panels["fft-unselected"], state, "unselected");
  mountSimilarityPanel(panels["similarity"], state);
  mountDendrogramPanel(panels["dendrogram"], state, {
    onUpdate: (staged) => void updateDendrogram(staged),
  });

  state.on("frame", () => {
    void refreshEmbedding();
  });

  return { state, client, analyze, updateDendrogram, refreshEmbedding };
}

export async function boot(root: HTMLElement, baseUrl: string): Promise<App> {
  const client = new ApiClient(baseUrl);
  const app = createApp(root, client);
  const [topology, events] = await Promise.all([client.topology(), client.events()]);
  app.state.topology = topology;
  app.state.events = events;
  app.state.setTimeline({ params: {}, entries: [] });
  return app;
}

/** Hand-built service payloads for panel tests that run without a network. */

import { ApiClient } from "../src/api.js";
import type {
  AnalyzeResponse,
  DendrogramResponse,
  EmbeddingResponse,
  EventRecord,
  TimelineResponse,
  Topology,
} from "../src/types.js";

export const topology: Topology = {
  substations: [
    { id: "s0", name: "Yearling", x: 0, y: 0 },
    { id: "s1", name: "Delcino", x: 10, y: 0 },
    { id: "s2", name: "Sturgeon", x: 5, y: 8 },
  ],
  buses: [
    { id: "b0", substation_id: "s0", voltage_kv: 345 },
    { id: "b1", substation_id: "s1", voltage_kv: 345 },
    { id: "b2", substation_id: "s2", voltage_kv: 345 },
  ],
  edges: [
    { id: "e0", kind: "line", bus_a: "b0", bus_b: "b1" },
    { id: "e1", kind: "line", bus_a: "b1", bus_b: "b2" },
  ],
  pmus: [
    { id: "101", bus_id: "b0", label: "PMU 101" },
    { id: "102", bus_id: "b1", label: "PMU 102" },
    { id: "103", bus_id: "b2", label: "PMU 103" },
  ],
};

export const events: EventRecord[] = [
  {
    id: "evt-1",
    t_start: "2017-04-20T00:00:02",
    t_end: "2017-04-20T00:00:12",
    oscillation_hz: 2.5,
    epicenter_pmus: ["101"],
    kind: "forced",
    provenance: "synthetic_ground_truth",
    warnings: [],
  },
];

function kdeFor(scale: number, hotCell: number) {
  const resolution = 16;
  const values = Array.from({ length: resolution * resolution }, (_, i) =>
    i === hotCell ? scale : scale / (2 + (i % 7)),
  );
  return { resolution, bbox: [0, 0, 10, 8] as [number, number, number, number], bandwidth: 1.0, values };
}

const bins = [0.5, 1.0, 1.5, 2.0, 2.5];

function frame(startTick: number, peak: number) {
  return {
    start_tick: startTick,
    t: `2017-04-20T00:00:${String(startTick / 30).padStart(2, "0")}`,
    valid: true,
    f_star_hz: 2.5,
    peak_pmu: "101",
    peak_mag: peak,
    mags: {
      "101": [0.001, 0.002, 0.001, 0.003, peak],
      "102": [0.001, 0.001, 0.001, 0.002, peak * 0.6],
      "103": [0.001, 0.001, 0.002, 0.001, peak * 0.2],
    },
    flags: [{ pmu: "101", magnitude: peak, rank: 1 }],
    ranking: [
      { pmu: "101", magnitude: peak },
      { pmu: "102", magnitude: peak * 0.6 },
      { pmu: "103", magnitude: peak * 0.2 },
    ],
    correlation: { "101": 1.0, "102": 0.9, "103": 0.4 },
    kde: kdeFor(peak, startTick === 60 ? 50 : 120),
  };
}

export const analyze: AnalyzeResponse = {
  params: {
    from: "2017-04-20T00:00:02",
    to: "2017-04-20T00:00:12",
    day: "2017-04-20",
    start_tick: 60,
    end_tick: 360,
    window_s: 2,
    stride_s: 2,
    attribute: "VPm",
    threshold_pct: 100,
    pmu_ids: ["101", "102", "103"],
    kde_resolution: 16,
    kde_bandwidth: null,
  },
  bins_hz: bins,
  frames: [frame(60, 0.02), frame(120, 0.03)],
};

export const timeline: TimelineResponse = {
  params: {},
  entries: [
    { start_tick: 60, t: "2017-04-20T00:00:02", f_star_hz: 2.5, peak_pmu: "101", peak_mag: 0.02, gap: false },
    { start_tick: 120, t: "2017-04-20T00:00:04", f_star_hz: 2.5, peak_pmu: "101", peak_mag: 0.03, gap: false },
  ],
};

export function embeddingFor(tick: number): EmbeddingResponse {
  const shift = tick / 60;
  return {
    params: { at: `tick-${tick}` },
    points: [
      { pmu: "101", x: 0 + shift, y: 0 },
      { pmu: "102", x: 0.1 + shift, y: 0.05 },
      { pmu: "103", x: 3 + shift, y: 2 },
    ],
    resolved: {
      points: [
        { pmu: "101", x: -0.6 + shift, y: -0.5 },
        { pmu: "102", x: 0.8 + shift, y: 0.6 },
        { pmu: "103", x: 3 + shift, y: 2 },
      ],
      overlaps_remaining: 0,
    },
    rings: [
      { hop: 1, radius: 1.0 },
      { hop: 2, radius: 2.5 },
    ],
    final_kl: 0.01,
  };
}

export const dendrogram: DendrogramResponse = {
  params: {},
  model: {
    root: {
      hop: 0, index: 0, pmu_ids: ["101"],
      avg_spectrum: [0.001, 0.002, 0.001, 0.003, 0.02],
      swatch_r: 1.0, box_stats: [0.02, 0.02, 0.02, 0.02, 0.02], self_link_count: 0,
    },
    layers: [
      {
        hop: 1,
        clusters: [
          {
            hop: 1, index: 0, pmu_ids: ["102"],
            avg_spectrum: [0.001, 0.001, 0.001, 0.002, 0.012],
            swatch_r: 0.9, box_stats: [0.012, 0.012, 0.012, 0.012, 0.012],
            self_link_count: 1,
          },
        ],
        silhouette: null,
        total_pmus: 1,
        k: 1,
      },
      {
        hop: 2,
        clusters: [
          {
            hop: 2, index: 0, pmu_ids: ["103"],
            avg_spectrum: [0.001, 0.001, 0.002, 0.001, 0.004],
            swatch_r: 0.4, box_stats: [0.004, 0.004, 0.004, 0.004, 0.004],
            self_link_count: 0,
          },
        ],
        silhouette: null,
        total_pmus: 1,
        k: 1,
      },
    ],
    links: [
      { kind: "inter_hop", from: [0, 0], to: [1, 0], pair_count: 1, flow_weight: 1.0 },
      { kind: "inter_hop", from: [1, 0], to: [2, 0], pair_count: 1, flow_weight: 1.0 },
      { kind: "intra_hop", from: [1, 0], to: [1, 0], pair_count: 0, flow_weight: null },
    ],
    unreachable: [],
    excluded: [],
    f_star_hz: 2.5,
  },
};

/** In-memory service double: routes ApiClient requests to the fixtures. */
export function fakeClient(): ApiClient {
  const fetchFn: typeof fetch = async (input, init) => {
    const url = String(input);
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const respond = (payload: unknown) =>
      new Response(JSON.stringify(payload), {
        status: 200,
        headers: { "content-type": "application/json" },
      });
    if (path === "/topology") return respond(topology);
    if (path === "/events") return respond(events);
    if (path === "/analyze") return respond(analyze);
    if (path.startsWith("/timeline")) return respond(timeline);
    if (path === "/embedding") {
      const body = JSON.parse(String(init?.body ?? "{}")) as { at: string };
      const tick = body.at.endsWith(":02") ? 60 : 120;
      return respond(embeddingFor(tick));
    }
    if (path === "/dendrogram") return respond(dendrogram);
    return new Response("not found", { status: 404 });
  };
  return new ApiClient("http://fake", fetchFn);
}

/** Wire types for the analysis service payloads (see GET /schema). */

export interface Substation {
  id: string;
  name: string;
  x: number;
  y: number;
}

export interface Bus {
  id: string;
  substation_id: string;
  voltage_kv: number;
}

export interface GridEdge {
  id: string;
  kind: "line" | "transformer";
  bus_a: string;
  bus_b: string;
}

export interface Pmu {
  id: string;
  bus_id: string;
  label: string;
}

export interface Topology {
  substations: Substation[];
  buses: Bus[];
  edges: GridEdge[];
  pmus: Pmu[];
}

export interface EventRecord {
  id: string;
  t_start: string;
  t_end: string;
  oscillation_hz: number | null;
  epicenter_pmus: string[];
  kind: "forced" | "transient" | "unknown";
  provenance: string;
  warnings: string[];
}

export interface KdePayload {
  resolution: number;
  bbox: [number, number, number, number];
  bandwidth: number;
  values: number[];
}

export interface FlagEntry {
  pmu: string;
  magnitude: number;
  rank: number;
}

export interface FramePayload {
  start_tick: number;
  t: string;
  valid: boolean;
  f_star_hz: number | null;
  peak_pmu: string | null;
  peak_mag: number | null;
  mags: Record<string, number[] | null>;
  flags: FlagEntry[];
  ranking: { pmu: string; magnitude: number }[];
  correlation: Record<string, number>;
  kde: KdePayload;
}

export interface AnalyzeParams {
  from: string;
  to: string;
  day: string;
  start_tick: number;
  end_tick: number;
  window_s: number;
  stride_s: number;
  attribute: string;
  threshold_pct: number;
  pmu_ids: string[];
  kde_resolution: number;
  kde_bandwidth: number | null;
}

export interface AnalyzeResponse {
  params: AnalyzeParams;
  bins_hz: number[];
  frames: FramePayload[];
}

export interface TimelineEntry {
  start_tick: number;
  t: string;
  f_star_hz: number | null;
  peak_pmu: string | null;
  peak_mag: number | null;
  gap: boolean;
}

export interface TimelineResponse {
  params: Record<string, unknown>;
  entries: TimelineEntry[];
}

export interface ClusterNode {
  hop: number;
  index: number;
  pmu_ids: string[];
  avg_spectrum: number[];
  swatch_r: number;
  box_stats: [number, number, number, number, number];
  self_link_count: number;
}

export interface DendrogramLink {
  kind: "self" | "intra_hop" | "inter_hop";
  from: [number, number];
  to: [number, number];
  pair_count: number;
  flow_weight: number | null;
}

export interface DendrogramModel {
  root: ClusterNode;
  layers: {
    hop: number;
    clusters: ClusterNode[];
    silhouette: number | null;
    total_pmus: number;
    k: number;
  }[];
  links: DendrogramLink[];
  unreachable: string[];
  excluded: string[];
  f_star_hz: number | null;
}

export interface DendrogramResponse {
  params: Record<string, unknown>;
  model: DendrogramModel;
}

export interface EmbeddingPoint {
  pmu: string;
  x: number;
  y: number;
}

export interface EmbeddingResponse {
  params: Record<string, unknown>;
  points: EmbeddingPoint[];
  resolved: { points: EmbeddingPoint[]; overlaps_remaining: number } | null;
  rings: { hop: number; radius: number }[];
  final_kl: number;
}

export interface AnalyzeRequestBody {
  from: string;
  to: string;
  window_s?: number;
  attribute?: string;
  threshold_pct?: number;
  pmu_ids?: string[] | null;
  stride_s?: number | null;
  kde_resolution?: number | null;
  kde_bandwidth?: number | null;
}

export interface DendrogramRequestBody {
  epicenter_ids: string[];
  selected_ids: string[];
  at: string;
  window_s?: number;
  attribute?: string;
  k?: number | null;
}

export interface EmbeddingRequestBody {
  selected_ids: string[];
  at: string;
  window_s?: number;
  attribute?: string;
  perplexity?: number;
  iters?: number;
  seed?: number;
  epicenter_ids?: string[] | null;
  collision_radius?: number | null;
}

/** Node layout for the grid view.
 *
 * Geographic positions from the topology are the default. The force-directed
 * alternative runs a small seeded spring simulation client-side, so the same
 * topology and seed always land on identical coordinates.
 */

import type { Topology } from "./types.js";

/** Deterministic 32-bit PRNG (mulberry32). */
export function seededRng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export interface NodePositions {
  substations: Map<string, [number, number]>;
  buses: Map<string, [number, number]>;
  pmus: Map<string, [number, number]>;
}

function busPositionsAround(
  topology: Topology,
  subPos: Map<string, [number, number]>,
  spread: number,
): NodePositions {
  const buses = new Map<string, [number, number]>();
  const bySub = new Map<string, string[]>();
  for (const b of topology.buses) {
    if (!bySub.has(b.substation_id)) bySub.set(b.substation_id, []);
    bySub.get(b.substation_id)!.push(b.id);
  }
  for (const [sub, ids] of bySub) {
    const [cx, cy] = subPos.get(sub)!;
    ids.forEach((id, i) => {
      const angle = (2 * Math.PI * i) / Math.max(ids.length, 1);
      buses.set(id, [cx + spread * Math.cos(angle), cy + spread * Math.sin(angle)]);
    });
  }
  const pmus = new Map<string, [number, number]>();
  for (const p of topology.pmus) pmus.set(p.id, buses.get(p.bus_id)!);
  return { substations: subPos, buses, pmus };
}

export function geographicLayout(topology: Topology): NodePositions {
  const subPos = new Map<string, [number, number]>(
    topology.substations.map((s) => [s.id, [s.x, s.y]] as [string, [number, number]]),
  );
  const xs = topology.substations.map((s) => s.x);
  const ys = topology.substations.map((s) => s.y);
  const span = Math.max(
    Math.max(...xs) - Math.min(...xs),
    Math.max(...ys) - Math.min(...ys),
    1,
  );
  return busPositionsAround(topology, subPos, span * 0.02);
}

/** Seeded spring layout over the substation graph (line edges only). */
export function forceLayout(topology: Topology, seed = 1, iterations = 200): NodePositions {
  const rng = seededRng(seed);
  const ids = topology.substations.map((s) => s.id);
  const index = new Map(ids.map((id, i) => [id, i]));
  const busSub = new Map(topology.buses.map((b) => [b.id, b.substation_id]));

  const springs: [number, number][] = [];
  for (const e of topology.edges) {
    if (e.kind !== "line") continue;
    const a = index.get(busSub.get(e.bus_a)!)!;
    const b = index.get(busSub.get(e.bus_b)!)!;
    if (a !== b) springs.push([a, b]);
  }

  const n = ids.length;
  const px = ids.map(() => rng() * 100);
  const py = ids.map(() => rng() * 100);
  const rest = 100 / Math.sqrt(n);

  for (let it = 0; it < iterations; it += 1) {
    const step = 0.08 * (1 - it / iterations) + 0.01;
    const fx = new Array<number>(n).fill(0);
    const fy = new Array<number>(n).fill(0);
    for (let i = 0; i < n; i += 1) {
      for (let j = i + 1; j < n; j += 1) {
        let dx = px[i] - px[j];
        let dy = py[i] - py[j];
        const d2 = dx * dx + dy * dy || 1e-6;
        const d = Math.sqrt(d2);
        const repulse = (rest * rest) / d2;
        dx /= d;
        dy /= d;
        fx[i] += dx * repulse * rest;
        fy[i] += dy * repulse * rest;
        fx[j] -= dx * repulse * rest;
        fy[j] -= dy * repulse * rest;
      }
    }
    for (const [a, b] of springs) {
      let dx = px[b] - px[a];
      let dy = py[b] - py[a];
      const d = Math.sqrt(dx * dx + dy * dy) || 1e-3;
      const pull = (d - rest) * 0.5;
      dx /= d;
      dy /= d;
      fx[a] += dx * pull;
      fy[a] += dy * pull;
      fx[b] -= dx * pull;
      fy[b] -= dy * pull;
    }
    for (let i = 0; i < n; i += 1) {
      px[i] += fx[i] * step;
      py[i] += fy[i] * step;
    }
  }

  const subPos = new Map<string, [number, number]>(
    ids.map((id, i) => [id, [px[i], py[i]] as [number, number]]),
  );
  return busPositionsAround(topology, subPos, rest * 0.15);
}

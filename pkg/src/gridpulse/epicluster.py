"""Epicentric cluster dendrogram construction.

PMUs selected for analysis are layered by hop distance from the chosen
epicenter PMU(s). Each layer is clustered by k-means on the PMUs' magnitude
spectra (silhouette-driven k unless the caller pins one), then clusters are
wired up with three link classes: self links (physically adjacent PMU pairs
inside one cluster), intra-hop links (adjacent pairs across clusters of one
layer) and inter-hop links. Every adjacent-hop cluster pair also carries a
flow whose weight is the inverse Manhattan distance between the cluster-wise
averaged spectra, normalized so the flows into any downstream cluster sum
to one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import GridPulseError
from .model import GridTopology, hop_distances_from, pmu_adjacency
from .spectral import SpectrumFrame, pearson

FLOW_EPSILON = 1e-9
KMEANS_RESTARTS = 10
KMEANS_MAX_ITER = 100
AUTO_K_MAX = 6


def hop_layers(
    topology: GridTopology,
    epicenter_pmus: Sequence[str],
    selected_pmus: Sequence[str],
) -> tuple[dict[int, list[str]], list[str]]:
    """Partition selected PMUs by min hop distance from any epicenter.

    Epicenter PMUs are never layered (they form the root). Returns the layer
    map {hop >= 1: sorted pmu ids} and the unreachable PMUs.
    """
    if not epicenter_pmus:
        raise ValueError("epicenter set must not be empty")
    epi = [topology.pmu(p) for p in epicenter_pmus]
    sel = [topology.pmu(p) for p in selected_pmus]

    dists = [hop_distances_from(topology, e.bus_id) for e in epi]
    layers: dict[int, list[str]] = {}
    unreachable: list[str] = []
    epi_ids = {e.id for e in epi}
    for p in sel:
        if p.id in epi_ids:
            continue
        best = None
        for d in dists:
            h = d.get(p.bus_id)
            if h is not None and (best is None or h < best):
                best = h
        if best is None:
            unreachable.append(p.id)
        elif best == 0:
            # Same bus as an epicenter: belongs with the root's neighborhood,
            # reported at hop 0 is impossible for a non-root node, so layer 1.
            layers.setdefault(1, []).append(p.id)
        else:
            layers.setdefault(best, []).append(p.id)
    for h in layers:
        layers[h].sort()
    return dict(sorted(layers.items())), sorted(unreachable)


def _farthest_point_centers(
    X: np.ndarray, k: int, first: int
) -> np.ndarray:
    centers = [first]
    d = np.linalg.norm(X - X[first], axis=1)
    while len(centers) < k:
        nxt = int(np.argmax(d))
        centers.append(nxt)
        d = np.minimum(d, np.linalg.norm(X - X[nxt], axis=1))
    return X[centers].copy()


def _lloyd(X: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, float]:
    k = len(centers)
    prev = None
    labels = np.zeros(len(X), dtype=int)
    for _ in range(KMEANS_MAX_ITER):
        dists = np.linalg.norm(X[:, None, :] - centers[None, :, :], axis=2)
        labels = np.argmin(dists, axis=1)
        # Keep every cluster populated: steal the point farthest from its center.
        for c in range(k):
            if not (labels == c).any():
                far = int(np.argmax(dists[np.arange(len(X)), labels]))
                labels[far] = c
        if prev is not None and (labels == prev).all():
            break
        prev = labels
        for c in range(k):
            centers[c] = X[labels == c].mean(axis=0)
    inertia = float(np.sum((X - centers[labels]) ** 2))
    return labels, inertia


def kmeans(X: np.ndarray, k: int, seed: int = 0) -> tuple[np.ndarray, float]:
    """Deterministic k-means: farthest-point seeding, fixed restarts, best inertia."""
    n = len(X)
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for {n} points")
    if k == 1:
        center = X.mean(axis=0)
        return np.zeros(n, dtype=int), float(np.sum((X - center) ** 2))
    rng = np.random.default_rng(seed)
    # Distinct first centers per restart: for small inputs every point gets a
    # turn as the seed, which matters on noise-dominated layers.
    firsts = rng.permutation(n)[:KMEANS_RESTARTS]
    best_labels, best_inertia = None, np.inf
    for first in firsts:
        centers = _farthest_point_centers(X, k, int(first))
        labels, inertia = _lloyd(X, centers)
        if inertia < best_inertia - 1e-12:
            best_labels, best_inertia = labels, inertia
    return best_labels, best_inertia


def silhouette_score(X: np.ndarray, labels: np.ndarray) -> float:
    """Mean silhouette over samples; singleton-cluster samples score 0."""
    n = len(X)
    uniq = np.unique(labels)
    if not 2 <= len(uniq) <= n - 1:
        raise ValueError("silhouette needs 2 <= k <= n-1 clusters")
    D = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=2)
    scores = np.zeros(n)
    for i in range(n):
        same = labels == labels[i]
        n_same = same.sum()
        if n_same <= 1:
            scores[i] = 0.0
            continue
        a = D[i, same].sum() / (n_same - 1)
        b = min(D[i, labels == c].mean() for c in uniq if c != labels[i])
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0 else (b - a) / denom
    return float(scores.mean())


@dataclass(frozen=True)
class LayerClustering:
    clusters: tuple[tuple[int, ...], ...]  # index tuples into the feature rows
    k: int
    silhouette: Optional[float]


def cluster_layer(
    features: np.ndarray, k: Union[str, int] = "auto", seed: int = 0
) -> LayerClustering:
    """Cluster one hop layer's spectra; k='auto' maximizes silhouette.

    Auto mode tries k in 2..min(6, n-1); layers of one or two PMUs stay a
    single cluster with a null silhouette.
    """
    n = len(features)
    if n == 0:
        raise ValueError("layer must not be empty")
    if isinstance(k, str):
        if k != "auto":
            raise ValueError(f"k must be 'auto' or an integer, got {k!r}")
        if n <= 2:
            return LayerClustering((tuple(range(n)),), 1, None)
        best = None
        for kk in range(2, min(AUTO_K_MAX, n - 1) + 1):
            labels, _ = kmeans(features, kk, seed=seed)
            s = silhouette_score(features, labels)
            if best is None or s > best[0] + 1e-12:
                best = (s, kk, labels)
        s, kk, labels = best
        return LayerClustering(_clusters_from_labels(labels), kk, s)
    if not 1 <= k <= n:
        raise ValueError(f"manual k={k} out of range for layer of {n}")
    labels, _ = kmeans(features, k, seed=seed)
    sil = silhouette_score(features, labels) if 2 <= k <= n - 1 else None
    return LayerClustering(_clusters_from_labels(labels), k, sil)


def _clusters_from_labels(labels: np.ndarray) -> tuple[tuple[int, ...], ...]:
    groups: dict[int, list[int]] = {}
    for i, c in enumerate(labels):
        groups.setdefault(int(c), []).append(i)
    # Stable output order: by smallest member index.
    return tuple(tuple(g) for g in sorted(groups.values(), key=lambda g: g[0]))


@dataclass(frozen=True)
class ClusterNode:
    hop: int
    index: int  # position within the layer
    pmu_ids: tuple[str, ...]
    avg_spectrum: tuple[float, ...]
    swatch_r: float  # Pearson vs root average spectrum
    box_stats: tuple[float, float, float, float, float]  # min,Q1,median,Q3,max
    self_link_count: int


@dataclass(frozen=True)
class LinkRecord:
    kind: str  # "self" | "intra_hop" | "inter_hop"
    from_hop: int
    from_index: int
    to_hop: int
    to_index: int
    pair_count: int
    flow_weight: Optional[float] = None  # inter-hop only


@dataclass(frozen=True)
class DendrogramLayer:
    hop: int
    clusters: tuple[ClusterNode, ...]
    silhouette: Optional[float]
    total_pmus: int
    k: int


@dataclass(frozen=True)
class DendrogramModel:
    root: ClusterNode
    layers: tuple[DendrogramLayer, ...]
    links: tuple[LinkRecord, ...]
    unreachable: tuple[str, ...]
    excluded: tuple[str, ...]  # selected PMUs whose window was invalid
    f_star_hz: Optional[float]

    def to_dict(self) -> dict:
        def node(c: ClusterNode) -> dict:
            return {
                "hop": c.hop,
                "index": c.index,
                "pmu_ids": list(c.pmu_ids),
                "avg_spectrum": list(c.avg_spectrum),
                "swatch_r": c.swatch_r,
                "box_stats": list(c.box_stats),
                "self_link_count": c.self_link_count,
            }

        return {
            "root": node(self.root),
            "layers": [
                {
                    "hop": layer.hop,
                    "clusters": [node(c) for c in layer.clusters],
                    "silhouette": layer.silhouette,
                    "total_pmus": layer.total_pmus,
                    "k": layer.k,
                }
                for layer in self.layers
            ],
            "links": [
                {
                    "kind": l.kind,
                    "from": [l.from_hop, l.from_index],
                    "to": [l.to_hop, l.to_index],
                    "pair_count": l.pair_count,
                    "flow_weight": l.flow_weight,
                }
                for l in self.links
            ],
            "unreachable": list(self.unreachable),
            "excluded": list(self.excluded),
            "f_star_hz": self.f_star_hz,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _box_stats(values: np.ndarray) -> tuple[float, float, float, float, float]:
    q = np.percentile(values, [0, 25, 50, 75, 100])
    return tuple(float(v) for v in q)


def build_dendrogram(
    topology: GridTopology,
    epicenter_pmus: Sequence[str],
    selected_pmus: Sequence[str],
    frame: SpectrumFrame,
    k_policy: Union[str, int] = "auto",
    seed: int = 0,
) -> DendrogramModel:
    """Assemble the full dendrogram model for one spectrum frame.

    The frame must cover every epicenter and selected PMU; PMUs whose window
    was invalid are excluded from clustering and reported. Flow weights into
    each downstream cluster are normalized to sum to one.
    """
    for p in list(epicenter_pmus) + list(selected_pmus):
        if p not in frame.pmu_ids:
            raise GridPulseError(f"frame does not cover PMU {p!r}")
        topology.pmu(p)

    valid = {
        pid
        for i, pid in enumerate(frame.pmu_ids)
        if frame.valid[i]
    }
    excluded = sorted(
        (set(selected_pmus) | set(epicenter_pmus)) - valid
    )
    epi = [p for p in dict.fromkeys(epicenter_pmus) if p in valid]
    if not epi:
        raise GridPulseError("no epicenter PMU has a valid spectrum in this frame")
    sel = [p for p in dict.fromkeys(selected_pmus) if p in valid]

    layer_map, unreachable = hop_layers(topology, epi, sel)

    spectra = {p: frame.magnitudes_of(p) for p in set(epi) | set(sel)}
    f_bin = frame.f_star_bin

    def make_node(hop: int, index: int, pmus: Sequence[str], root_avg=None) -> ClusterNode:
        pmus = tuple(sorted(pmus))
        mat = np.stack([spectra[p] for p in pmus])
        avg = mat.mean(axis=0)
        at_fstar = mat[:, f_bin - 1]
        swatch = 1.0 if root_avg is None else pearson(avg, root_avg)
        pairs = pmu_adjacency(topology, pmus)
        return ClusterNode(
            hop=hop,
            index=index,
            pmu_ids=pmus,
            avg_spectrum=tuple(float(v) for v in avg),
            swatch_r=float(swatch),
            box_stats=_box_stats(at_fstar),
            self_link_count=len(pairs),
        )

    root = make_node(0, 0, epi)
    root_avg = np.array(root.avg_spectrum)
    # Recompute the root swatch against itself for symmetry with the layers.
    root = ClusterNode(
        hop=0,
        index=0,
        pmu_ids=root.pmu_ids,
        avg_spectrum=root.avg_spectrum,
        swatch_r=pearson(root_avg, root_avg),
        box_stats=root.box_stats,
        self_link_count=root.self_link_count,
    )

    layers: list[DendrogramLayer] = []
    for hop, pmus in layer_map.items():
        feats = np.stack([spectra[p] for p in pmus])
        # A pinned k caps at the layer size so small outer layers still build.
        policy = k_policy if isinstance(k_policy, str) else min(k_policy, len(pmus))
        clustering = cluster_layer(feats, policy, seed=seed)
        nodes = []
        member_lists = [
            sorted(pmus[i] for i in members) for members in clustering.clusters
        ]
        member_lists.sort(key=lambda ms: ms[0])
        for idx, members in enumerate(member_lists):
            nodes.append(make_node(hop, idx, members, root_avg))
        layers.append(
            DendrogramLayer(
                hop=hop,
                clusters=tuple(nodes),
                silhouette=clustering.silhouette,
                total_pmus=len(pmus),
                k=clustering.k,
            )
        )

    # Map every clustered PMU to its (hop, cluster index).
    locate: dict[str, tuple[int, int]] = {p: (0, 0) for p in root.pmu_ids}
    for layer in layers:
        for c in layer.clusters:
            for p in c.pmu_ids:
                locate[p] = (c.hop, c.index)

    links: dict[tuple, LinkRecord] = {}
    for a, b in sorted(pmu_adjacency(topology, list(locate))):
        ha, ia = locate[a]
        hb, ib = locate[b]
        if (ha, ia) == (hb, ib):
            continue  # self links are per-cluster counts
        if ha == hb:
            kind = "intra_hop"
        elif abs(ha - hb) == 1:
            kind = "inter_hop"
        else:
            # Physically adjacent buses never differ by more than one hop layer.
            raise GridPulseError("adjacency spans non-adjacent hops")
        lo, hi = sorted([(ha, ia), (hb, ib)])
        key = (kind, lo, hi)
        if key in links:
            links[key] = LinkRecord(
                kind, lo[0], lo[1], hi[0], hi[1], links[key].pair_count + 1
            )
        else:
            links[key] = LinkRecord(kind, lo[0], lo[1], hi[0], hi[1], 1)

    # Flows: every adjacent-hop cluster pair, normalized per downstream cluster.
    hops_present = [0] + [layer.hop for layer in layers]
    nodes_at: dict[int, list[ClusterNode]] = {0: [root]}
    for layer in layers:
        nodes_at[layer.hop] = list(layer.clusters)
    flow_links: list[LinkRecord] = []
    for h_up, h_dn in zip(hops_present, hops_present[1:]):
        if h_dn != h_up + 1:
            continue  # a hop with no selected PMUs breaks the flow chain
        ups = nodes_at[h_up]
        for dn in nodes_at[h_dn]:
            dn_avg = np.array(dn.avg_spectrum)
            raw = np.array(
                [
                    1.0 / (FLOW_EPSILON + float(np.abs(np.array(u.avg_spectrum) - dn_avg).sum()))
                    for u in ups
                ]
            )
            wts = raw / raw.sum()
            for u, w in zip(ups, wts):
                key = ("inter_hop", (u.hop, u.index), (dn.hop, dn.index))
                pair_count = links.pop(key).pair_count if key in links else 0
                flow_links.append(
                    LinkRecord(
                        "inter_hop", u.hop, u.index, dn.hop, dn.index,
                        pair_count, float(w),
                    )
                )

    all_links = sorted(
        list(links.values()) + flow_links,
        key=lambda l: (l.from_hop, l.from_index, l.to_hop, l.to_index, l.kind),
    )

    return DendrogramModel(
        root=root,
        layers=tuple(layers),
        links=tuple(all_links),
        unreachable=tuple(unreachable),
        excluded=tuple(excluded),
        f_star_hz=frame.f_star_hz,
    )

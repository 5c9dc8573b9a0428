import numpy as np
import pytest

from gridpulse.epicluster import (
    AUTO_K_MAX,
    DendrogramModel,
    build_dendrogram,
    cluster_layer,
    hop_layers,
    kmeans,
    silhouette_score,
)
from gridpulse.spectral import WindowSpec, frame_from_matrix
from gridpulse.synthgen import (
    EventSpec,
    ScenarioSpec,
    generate_topology,
    simulate,
)

from .conftest import make_topology, two_path_topology
from .test_spectral import frame_with_mags

# ---------------------------------------------------------------------------
# Independent oracles: exhaustive minimum-inertia partitions and a plain-loop
# silhouette, kept free of the production implementations.
# ---------------------------------------------------------------------------


def set_partitions_into_k(n, k):
    """All partitions of range(n) into exactly k non-empty parts."""

    def rec(i, parts):
        if i == n:
            if len(parts) == k:
                yield [list(p) for p in parts]
            return
        if len(parts) + (n - i) < k:
            return
        for p in parts:
            p.append(i)
            yield from rec(i + 1, parts)
            p.pop()
        if len(parts) < k:
            parts.append([i])
            yield from rec(i + 1, parts)
            parts.pop()

    yield from rec(0, [])


def inertia_of(X, parts):
    total = 0.0
    for p in parts:
        pts = X[p]
        total += float(np.sum((pts - pts.mean(axis=0)) ** 2))
    return total


def best_partition_exhaustive(X, k):
    best, best_val = None, np.inf
    for parts in set_partitions_into_k(len(X), k):
        v = inertia_of(X, parts)
        if v < best_val - 1e-12:
            best, best_val = [sorted(p) for p in parts], v
    return best, best_val


def silhouette_plain(X, parts):
    labels = {}
    for ci, p in enumerate(parts):
        for i in p:
            labels[i] = ci
    n = len(X)
    scores = []
    for i in range(n):
        mine = [j for j in parts[labels[i]] if j != i]
        if not mine:
            scores.append(0.0)
            continue
        a = float(np.mean([np.linalg.norm(X[i] - X[j]) for j in mine]))
        b = min(
            float(np.mean([np.linalg.norm(X[i] - X[j]) for j in p]))
            for ci, p in enumerate(parts)
            if ci != labels[i]
        )
        scores.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    return float(np.mean(scores))


def exhaustive_auto_k(X):
    n = len(X)
    best_k, best_s = None, -np.inf
    for k in range(2, min(AUTO_K_MAX, n - 1) + 1):
        parts, _ = best_partition_exhaustive(X, k)
        s = silhouette_plain(X, parts)
        if s > best_s + 1e-12:
            best_k, best_s = k, s
    return best_k


# ---------------------------------------------------------------------------


class TestHopLayers:
    def test_chain_layers(self, chain3):
        layers, unreachable = hop_layers(chain3, ["101"], ["102", "103"])
        assert layers == {1: ["102"], 2: ["103"]}
        assert unreachable == []

    def test_min_rule_two_epicenters(self, chain3):
        layers, _ = hop_layers(chain3, ["101", "103"], ["102"])
        assert layers == {1: ["102"]}

    def test_epicenter_in_selected_only_root(self, chain3):
        layers, _ = hop_layers(chain3, ["101"], ["101", "102"])
        assert layers == {1: ["102"]}

    def test_empty_epicenter_rejected(self, chain3):
        with pytest.raises(ValueError):
            hop_layers(chain3, [], ["102"])

    def test_unreachable_reported(self):
        topo = make_topology(
            [("A", 345), ("B", 345), ("C", 345)],
            [("line", "A", "B")],
            [("101", "A"), ("102", "B"), ("103", "C")],
            validate_connected=False,
        )
        layers, unreachable = hop_layers(topo, ["101"], ["102", "103"])
        assert layers == {1: ["102"]}
        assert unreachable == ["103"]


class TestClusterLayer:
    def test_two_groups_recovered(self):
        # Spectra peaked at bin 5 vs bin 10, three PMUs each.
        X = np.zeros((6, 20))
        X[:3, 4] = [1.0, 1.05, 0.95]
        X[3:, 9] = [1.0, 0.9, 1.1]
        result = cluster_layer(X, "auto")
        assert result.k == 2
        groups = {frozenset(c) for c in result.clusters}
        assert groups == {frozenset({0, 1, 2}), frozenset({3, 4, 5})}
        assert result.silhouette > 0.8
        # Matches the exhaustive-partition oracle.
        parts, _ = best_partition_exhaustive(X, 2)
        assert {frozenset(p) for p in parts} == groups

    def test_singleton_layer(self):
        result = cluster_layer(np.array([[1.0, 2.0]]), "auto")
        assert result.k == 1
        assert result.silhouette is None
        assert result.clusters == ((0,),)

    def test_pair_layer_single_cluster(self):
        result = cluster_layer(np.array([[0.0, 0.0], [9.0, 9.0]]), "auto")
        assert result.k == 1 and result.silhouette is None

    def test_manual_three_triplets(self):
        rng = np.random.default_rng(1)
        centers = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
        X = np.vstack([c + rng.normal(0, 0.1, size=(3, 2)) for c in centers])
        result = cluster_layer(X, 3)
        groups = {frozenset(c) for c in result.clusters}
        assert groups == {
            frozenset({0, 1, 2}), frozenset({3, 4, 5}), frozenset({6, 7, 8})
        }

    def test_manual_k_too_large(self):
        with pytest.raises(ValueError):
            cluster_layer(np.zeros((3, 2)), 4)

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        X = rng.normal(0, 1, size=(7, 4))
        a = cluster_layer(X, "auto")
        b = cluster_layer(X, "auto")
        assert a == b

    @pytest.mark.parametrize("seed", range(12))
    def test_auto_k_matches_exhaustive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 9))
        # Two loose blobs plus stragglers keeps the search nontrivial.
        X = np.vstack(
            [
                rng.normal(0, 0.4, size=(n // 2, 3)),
                rng.normal(3, 0.6, size=(n - n // 2, 3)),
            ]
        )
        assert cluster_layer(X, "auto").k == exhaustive_auto_k(X)


class TestSilhouette:
    def test_matches_plain_reimplementation(self):
        rng = np.random.default_rng(3)
        X = rng.normal(0, 1, size=(8, 3))
        labels, _ = kmeans(X, 3, seed=0)
        parts = [sorted(np.where(labels == c)[0].tolist()) for c in np.unique(labels)]
        assert silhouette_score(X, labels) == pytest.approx(silhouette_plain(X, parts))

    def test_bad_k_rejected(self):
        with pytest.raises(ValueError):
            silhouette_score(np.zeros((3, 2)), np.array([0, 0, 0]))


def _frame_for(topology, sigma=0.0, seed=0, f0=2.5, source="S", amplitude=0.02):
    spec = ScenarioSpec(
        seed=seed,
        events=(
            EventSpec(kind="forced", source_bus=source, f0_hz=f0,
                      amplitude=amplitude, t_start_s=0.0, duration_s=20.0),
        ),
        noise_sigma=sigma,
        duration_s=20.0,
    )
    mats, _, _ = simulate(topology, spec, attributes=("VPm",))
    return frame_from_matrix(mats["VPm"], 150, WindowSpec(5))


class TestBuildDendrogram:
    def test_chain_flows_all_one(self, chain5):
        frame = _frame_for(chain5, source="A")
        model = build_dendrogram(chain5, ["101"], ["102", "103", "104", "105"], frame)
        flows = [l for l in model.links if l.kind == "inter_hop"]
        assert flows and all(l.flow_weight == pytest.approx(1.0) for l in flows)
        assert [layer.hop for layer in model.layers] == [1, 2, 3, 4]

    def test_equal_upstreams_split_half(self):
        # Two upstream singletons with identical spectra feed one downstream
        # cluster: symmetry forces 0.5 / 0.5.
        topo = make_topology(
            [("S", 345), ("U1", 345), ("U2", 345), ("D", 345)],
            [("line", "S", "U1"), ("line", "S", "U2"),
             ("line", "U1", "D"), ("line", "U2", "D")],
            [("100", "S"), ("111", "U1"), ("112", "U2"), ("120", "D")],
        )
        # On-bin frequency for the 5 s window: identical spectra regardless
        # of each PMU's draw of the oscillation phase.
        frame = _frame_for(topo, sigma=0.0, f0=2.0)
        model = build_dendrogram(topo, ["100"], ["111", "112", "120"], frame, k_policy=2)
        into_d = [
            l for l in model.links
            if l.kind == "inter_hop" and l.to_hop == 2 and l.flow_weight is not None
        ]
        assert len(into_d) == 2
        assert all(l.flow_weight == pytest.approx(0.5) for l in into_d)

    def test_two_path_swatch_ordering(self):
        topo = two_path_topology()
        frame = _frame_for(topo, sigma=0.005, seed=7)
        selected = ["111", "112", "121", "122", "131", "132", "141", "142"]
        model = build_dendrogram(topo, ["100"], selected, frame, k_policy=2)
        layer1 = model.layers[0]
        strong = next(c for c in layer1.clusters if "111" in c.pmu_ids)
        damped = next(c for c in layer1.clusters if "131" in c.pmu_ids)
        assert strong is not damped
        assert strong.swatch_r > damped.swatch_r

    def test_partition_and_flow_invariants(self):
        rng = np.random.default_rng(0)
        for seed in range(6):
            topo = generate_topology(seed, 8, pmu_coverage=1.0)
            pmu_ids = [p.id for p in topo.pmus]
            epi = [pmu_ids[int(rng.integers(len(pmu_ids)))]]
            selected = [p for p in pmu_ids if p not in epi]
            frame = _frame_for(topo, sigma=0.004, seed=seed,
                               source=topo.pmu(epi[0]).bus_id)
            model = build_dendrogram(topo, epi, selected, frame)

            seen = [p for layer in model.layers for c in layer.clusters for p in c.pmu_ids]
            expected = set(selected) - set(model.unreachable) - set(model.excluded)
            assert sorted(seen) == sorted(expected)          # partition property
            assert len(seen) == len(set(seen))

            by_dest = {}
            for l in model.links:
                if l.kind == "inter_hop" and l.flow_weight is not None:
                    by_dest.setdefault((l.to_hop, l.to_index), 0.0)
                    by_dest[(l.to_hop, l.to_index)] += l.flow_weight
            for total in by_dest.values():
                assert total == pytest.approx(1.0, abs=1e-9)

            for layer in model.layers:
                for c in layer.clusters:
                    assert -1.0 <= c.swatch_r <= 1.0
                    lo, q1, med, q3, hi = c.box_stats
                    assert lo <= q1 <= med <= q3 <= hi

    def test_deterministic_bytes(self, chain5):
        frame = _frame_for(chain5, sigma=0.003, source="A")
        args = (chain5, ["101"], ["102", "103", "104", "105"], frame)
        a = build_dendrogram(*args).to_json()
        b = build_dendrogram(*args).to_json()
        assert a == b

    def test_self_link_counts(self):
        # Both hop-1 PMUs are physically adjacent and land in one cluster.
        topo = make_topology(
            [("S", 345), ("U1", 345), ("U2", 345)],
            [("line", "S", "U1"), ("line", "S", "U2"), ("line", "U1", "U2")],
            [("100", "S"), ("111", "U1"), ("112", "U2")],
        )
        frame = _frame_for(topo)
        model = build_dendrogram(topo, ["100"], ["111", "112"], frame)
        assert len(model.layers[0].clusters) == 1
        assert model.layers[0].clusters[0].self_link_count == 1

    def test_intra_hop_links(self):
        topo = two_path_topology()
        frame = _frame_for(topo, sigma=0.005, seed=3)
        # a1 and c1 sit in different hop-1 clusters but share no edge, so no
        # intra-hop link; add one PMU pair that does share an edge.
        model = build_dendrogram(
            topo, ["100"], ["111", "121", "131", "141"], frame, k_policy=2
        )
        intra = [l for l in model.links if l.kind == "intra_hop"]
        assert intra == []  # no physical edges inside hop 1 in this topology

    def test_missing_pmu_in_frame_rejected(self, chain3):
        frame = _frame_for(chain3, source="A")
        slim = frame_with_mags(np.zeros((1, 75)))
        with pytest.raises(Exception):
            build_dendrogram(chain3, ["101"], ["102"], slim)

    def test_box_stats_quartiles(self):
        mags = np.zeros((5, 10))
        mags[:, 3] = [1.0, 2.0, 3.0, 4.0, 5.0]
        frame = frame_with_mags(mags)
        topo = make_topology(
            [("S", 345), ("T", 345)],
            [("line", "S", "T")],
            [("101", "S"), ("102", "T"), ("103", "T"), ("104", "T"), ("105", "T")],
        )
        model = build_dendrogram(
            topo, ["101"], ["102", "103", "104", "105"], frame, k_policy=1
        )
        cluster = model.layers[0].clusters[0]
        assert cluster.box_stats == (2.0, 2.75, 3.5, 4.25, 5.0)

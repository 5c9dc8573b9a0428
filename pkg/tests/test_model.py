import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridpulse.errors import TopologyError, UnknownIdentifierError
from gridpulse.model import (
    ATTRIBUTE_CODES,
    GridTopology,
    SeriesMatrix,
    hop_distance,
    pmu_adjacency,
    shortest_path_profile,
)
from gridpulse.synthgen import generate_topology

from .conftest import make_topology


class TestHopDistance:
    def test_chain(self, chain3):
        assert hop_distance(chain3, "A", "C") == 2

    def test_identity(self, chain3):
        assert hop_distance(chain3, "A", "A") == 0

    def test_symmetry(self, chain3):
        assert hop_distance(chain3, "C", "A") == hop_distance(chain3, "A", "C")

    def test_unknown_bus(self, chain3):
        with pytest.raises(UnknownIdentifierError):
            hop_distance(chain3, "A", "nope")

    def test_unreachable_api_level(self):
        # Disconnected graphs are rejected at load but the query API still
        # answers for directly constructed hypothetical inputs.
        topo = make_topology(
            [("A", 345), ("B", 345), ("C", 345)],
            [("line", "A", "B")],
            [("101", "A")],
            validate_connected=False,
        )
        assert hop_distance(topo, "A", "C") is None
        with pytest.raises(TopologyError):
            topo.validate_connected()

    def test_transformers_count_as_hops(self):
        topo = make_topology(
            [("A", 345), ("B", 138), ("C", 138)],
            [("transformer", "A", "B"), ("line", "B", "C")],
            [("101", "A")],
        )
        assert hop_distance(topo, "A", "C") == 2
        assert shortest_path_profile(topo, "A", "C") == (2, 1)


class TestPmuAdjacency:
    def test_adjacent_pair(self, chain3):
        assert pmu_adjacency(chain3, ["101", "102"]) == {("101", "102")}

    def test_two_hops_apart(self, chain3):
        assert pmu_adjacency(chain3, ["101", "103"]) == set()

    def test_same_bus_no_pair(self):
        topo = make_topology(
            [("A", 345), ("B", 345)],
            [("line", "A", "B")],
            [("101", "A"), ("102", "A")],
        )
        assert pmu_adjacency(topo, ["101", "102"]) == set()

    def test_unknown_pmu(self, chain3):
        with pytest.raises(UnknownIdentifierError):
            pmu_adjacency(chain3, ["101", "999"])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_hop_distance_metric_properties(seed):
    topo = generate_topology(seed, n_substations=6)
    rng = np.random.default_rng(seed)
    bus_ids = [b.id for b in topo.buses]
    for _ in range(5):
        a, b, c = (bus_ids[int(rng.integers(len(bus_ids)))] for _ in range(3))
        dab = hop_distance(topo, a, b)
        dba = hop_distance(topo, b, a)
        dac = hop_distance(topo, a, c)
        dcb = hop_distance(topo, c, b)
        assert dab == dba
        assert dab <= dac + dcb


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_pmu_adjacency_only_hop_one_pairs(seed):
    topo = generate_topology(seed, n_substations=5)
    ids = [p.id for p in topo.pmus]
    pairs = pmu_adjacency(topo, ids)
    for a, b in pairs:
        assert (b, a) not in pairs  # normalized ordering
        d = hop_distance(topo, topo.pmu(a).bus_id, topo.pmu(b).bus_id)
        assert d == 1


class TestTopologyValidation:
    def test_line_voltage_mismatch_rejected(self):
        with pytest.raises(TopologyError):
            make_topology(
                [("A", 345), ("B", 138)], [("line", "A", "B")], [],
                validate_connected=False,
            )

    def test_transformer_equal_voltage_rejected(self):
        with pytest.raises(TopologyError):
            make_topology(
                [("A", 345), ("B", 345)], [("transformer", "A", "B")], [],
                validate_connected=False,
            )

    def test_duplicate_ids_rejected(self):
        with pytest.raises(TopologyError):
            make_topology(
                [("A", 345), ("A", 345)], [], [], validate_connected=False
            )

    def test_pmu_unknown_bus_rejected(self):
        with pytest.raises(TopologyError):
            make_topology(
                [("A", 345)], [], [("101", "ghost")], validate_connected=False
            )

    def test_roundtrip_json(self, tmp_path, chain3):
        path = tmp_path / "topo.json"
        chain3.save(path)
        loaded = GridTopology.load(path)
        assert loaded == chain3


class TestAttributeSchema:
    def test_exactly_18_codes(self):
        assert len(ATTRIBUTE_CODES) == 18
        assert len(set(ATTRIBUTE_CODES)) == 18

    def test_vpm_present(self):
        assert "VPm" in ATTRIBUTE_CODES

    def test_structure(self):
        mags = [c for c in ATTRIBUTE_CODES if c.endswith("m") and len(c) == 3]
        angles = [c for c in ATTRIBUTE_CODES if c.endswith("a") and len(c) == 3]
        assert len(mags) == 8 and len(angles) == 8
        assert "F" in ATTRIBUTE_CODES and "DF" in ATTRIBUTE_CODES


class TestSeriesMatrix:
    def test_shape_mismatch_rejected(self):
        from datetime import date

        with pytest.raises(ValueError):
            SeriesMatrix(
                attribute="VPm",
                day=date(2017, 4, 20),
                start_tick=0,
                end_tick=10,
                pmu_ids=("101",),
                values=np.zeros((5, 1)),
            )

    def test_tick_bounds(self):
        from datetime import date

        with pytest.raises(ValueError):
            SeriesMatrix(
                attribute="VPm",
                day=date(2017, 4, 20),
                start_tick=0,
                end_tick=2_592_001,
                pmu_ids=("101",),
                values=np.zeros((2_592_001, 1)),
            )

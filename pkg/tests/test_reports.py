from datetime import datetime

import pytest

from gridpulse.reports import link_report, link_report_files
from gridpulse.synthgen import generate_topology, make_report_corpus

from .conftest import make_topology


def _rename(topo, names):
    # Substation names default to "Sub <bus>"; re-label for realistic text.
    from gridpulse.model import GridTopology, Substation

    subs = tuple(
        Substation(s.id, names.get(s.id, s.name), s.x, s.y) for s in topo.substations
    )
    return GridTopology(subs, topo.buses, topo.edges, topo.pmus)


@pytest.fixture()
def grid():
    base = make_topology(
        [("Y1", 345), ("S1", 345), ("S2", 345)],
        [("line", "Y1", "S1"), ("line", "S1", "S2")],
        [("122", "Y1"), ("169", "S1"), ("170", "S2")],
    )
    named = _rename(base, {"sub-Y1": "Yearling", "sub-S1": "Sturgeon"})
    # Sturgeon spans both S buses so the name expands to two PMUs.
    from gridpulse.model import Bus, GridTopology

    buses = tuple(
        Bus(b.id, "sub-S1" if b.id == "S2" else b.substation_id, b.voltage_kv)
        for b in named.buses
    )
    return GridTopology(named.substations, buses, named.edges, named.pmus)


class TestLinkReport:
    def test_full_featured_report(self, grid):
        text = (
            "System Voltage Oscillation at Yearling Substation, 20:44:00, "
            "4/20/2017. Sustained response from PMU #122 at 2.4Hz."
        )
        rec = link_report(text, grid)
        assert rec.epicenter_pmus == ("122",)
        assert rec.oscillation_hz == pytest.approx(2.4)
        assert rec.t_start == datetime(2017, 4, 20, 20, 44, 0)
        assert rec.kind == "forced"
        assert rec.provenance == "report_text"
        assert not rec.warnings

    def test_substation_expansion(self, grid):
        rec = link_report("Transient at Sturgeon, 12:49:00, 4/20/2017.", grid)
        assert rec.epicenter_pmus == ("169", "170")
        assert rec.kind == "transient"

    def test_unlinked_distractor(self, grid):
        rec = link_report("Routine maintenance note", grid)
        assert rec.epicenter_pmus == ()
        assert any("no PMU" in w for w in rec.warnings)
        assert any("no timestamp" in w for w in rec.warnings)

    def test_pmu_id_overrides_substation(self, grid):
        text = "Oscillation at Sturgeon; PMU #122 confirmed as epicenter, 1.1Hz."
        rec = link_report(text, grid)
        assert rec.epicenter_pmus == ("122",)

    def test_unknown_pmu_number_ignored(self, grid):
        rec = link_report("PMU #999 offline at Yearling.", grid)
        # 999 does not exist; fall back to the substation expansion.
        assert rec.epicenter_pmus == ("122",)

    def test_case_insensitive_and_hash_optional(self, grid):
        rec = link_report("pmu 122 and PMU#169 both ringing at 0.7 Hz.", grid)
        assert rec.epicenter_pmus == ("122", "169")

    def test_whole_word_substation_only(self, grid):
        rec = link_report("The Yearlings community meeting went fine.", grid)
        assert rec.epicenter_pmus == ()

    def test_iso_timestamp_accepted(self, grid):
        rec = link_report("PMU #122 event at 2017-04-20T20:44:00.", grid)
        assert rec.t_start == datetime(2017, 4, 20, 20, 44, 0)

    def test_deterministic(self, grid):
        text = "PMU #122 at Yearling, 20:44:00, 4/20/2017, 2.4Hz oscillation."
        assert link_report(text, grid) == link_report(text, grid)


class TestCorpusLinking:
    def test_mini_corpus_exact(self, tmp_path):
        topo = generate_topology(21, 8, pmu_coverage=0.8)
        corpus = make_report_corpus(topo, seed=13, n_reports=40)
        for rid, text, _ in corpus:
            (tmp_path / f"{rid}.txt").write_text(text)
        records = link_report_files(sorted(tmp_path.glob("*.txt")), topo)
        by_id = {r.id: r for r in records}
        for rid, _, expected in corpus:
            got = sorted(by_id[rid].epicenter_pmus)
            assert got == sorted(expected["pmus"]), rid
            if expected["t"] is not None:
                assert by_id[rid].t_start.isoformat() == expected["t"]

import json
from concurrent.futures import ThreadPoolExecutor
from datetime import date

import pytest
from fastapi.testclient import TestClient

from gridpulse.service import ServiceConfig, create_app
from gridpulse.store import DayStore
from gridpulse.synthgen import EventSpec, ScenarioSpec, generate_topology, simulate

DAY = date(2017, 4, 20)


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc-data")
    topology = generate_topology(30, 6, pmu_coverage=1.0)
    source_bus = topology.pmu("103").bus_id
    scenario = ScenarioSpec(
        seed=30,
        events=(
            EventSpec(kind="forced", source_bus=source_bus, f0_hz=2.5,
                      amplitude=0.02, t_start_s=2.0, duration_s=50.0),
        ),
        noise_sigma=0.002,
        duration_s=60.0,
        day=DAY,
    )
    matrices, _, records = simulate(
        topology, scenario, attributes=("VPm", "IAm", "F")
    )
    topology.save(root / "topology.json")
    store = DayStore(root / "store")
    for m in matrices.values():
        store.write(m, dense=True)
    (root / "events.json").write_text(
        json.dumps([e.to_dict() for e in records], indent=2)
    )
    return root


@pytest.fixture(scope="session")
def client(data_dir):
    app = create_app(ServiceConfig(data_dir=data_dir))
    with TestClient(app) as c:
        yield c


ANALYZE_BODY = {
    "from": "2017-04-20T00:00:02",
    "to": "2017-04-20T00:00:12",
    "window_s": 2,
    "attribute": "VPm",
    "threshold_pct": 100.0,
}


class TestBasicEndpoints:
    def test_topology_roundtrip(self, client, data_dir):
        res = client.get("/topology")
        assert res.status_code == 200
        body = res.json()
        original = json.loads((data_dir / "topology.json").read_text())
        assert len(body["substations"]) == len(original["substations"])
        assert len(body["buses"]) == len(original["buses"])
        assert len(body["edges"]) == len(original["edges"])
        assert len(body["pmus"]) == len(original["pmus"])

    def test_events_listing(self, client):
        res = client.get("/events")
        assert res.status_code == 200
        events = res.json()
        assert len(events) == 1
        assert events[0]["kind"] == "forced"
        assert events[0]["epicenter_pmus"] == ["103"]

    def test_schema_index_and_docs(self, client):
        idx = client.get("/schema").json()
        assert "analyze_response" in idx["schemas"]
        doc = client.get("/schema/topology")
        assert doc.status_code == 200
        assert doc.json()["version"] == "1"
        assert client.get("/schema/nope").status_code == 404


class TestAnalyze:
    def test_threshold_100_single_flag(self, client):
        res = client.post("/analyze", json=ANALYZE_BODY)
        assert res.status_code == 200
        body = res.json()
        assert body["params"]["threshold_pct"] == 100.0
        for frame in body["frames"]:
            assert frame["valid"]
            assert len(frame["flags"]) == 1
            assert frame["flags"][0]["pmu"] == "103"
            assert frame["ranking"][0]["pmu"] == "103"
            assert frame["f_star_hz"] == pytest.approx(2.5)
            assert frame["correlation"]["103"] == pytest.approx(1.0)
            kde = frame["kde"]
            assert len(kde["values"]) == kde["resolution"] ** 2

    def test_byte_identical_repeats(self, client):
        a = client.post("/analyze", json=ANALYZE_BODY)
        b = client.post("/analyze", json=ANALYZE_BODY)
        assert a.content == b.content

    def test_param_echo_carries_resolved_values(self, client):
        res = client.post("/analyze", json=ANALYZE_BODY).json()
        params = res["params"]
        assert params["day"] == "2017-04-20"
        assert params["start_tick"] == 60
        assert params["end_tick"] == 360
        assert params["stride_s"] == 2
        assert len(params["pmu_ids"]) > 0

    def test_pmu_subset(self, client):
        body = dict(ANALYZE_BODY, pmu_ids=["101", "103"])
        res = client.post("/analyze", json=body)
        assert res.status_code == 200
        frame = res.json()["frames"][0]
        assert set(frame["mags"]) == {"101", "103"}


class TestDendrogramEndpoint:
    BODY = {
        "epicenter_ids": ["103"],
        "selected_ids": ["101", "102", "104", "105", "106"],
        "at": "2017-04-20T00:00:05",
        "window_s": 2,
        "attribute": "VPm",
    }

    def test_model_shape(self, client):
        res = client.post("/dendrogram", json=self.BODY)
        assert res.status_code == 200
        model = res.json()["model"]
        assert model["root"]["pmu_ids"] == ["103"]
        assert model["layers"]
        flows = [
            l for l in model["links"]
            if l["kind"] == "inter_hop" and l["flow_weight"] is not None
        ]
        assert flows

    def test_byte_identical_repeats(self, client):
        a = client.post("/dendrogram", json=self.BODY)
        b = client.post("/dendrogram", json=self.BODY)
        assert a.content == b.content

    def test_manual_k(self, client):
        res = client.post("/dendrogram", json=dict(self.BODY, k=2))
        assert res.status_code == 200
        assert res.json()["params"]["k"] == 2


class TestEmbeddingEndpoint:
    BODY = {
        "selected_ids": ["101", "102", "103", "104", "105", "106"],
        "at": "2017-04-20T00:00:05",
        "window_s": 2,
        "attribute": "VPm",
        "perplexity": 3.0,
        "iters": 300,
        "seed": 4,
        "epicenter_ids": ["103"],
        "collision_radius": 0.5,
    }

    def test_points_rings_and_determinism(self, client):
        a = client.post("/embedding", json=self.BODY)
        assert a.status_code == 200
        body = a.json()
        assert len(body["points"]) == 6
        assert body["rings"]
        assert body["resolved"]["overlaps_remaining"] == 0
        b = client.post("/embedding", json=self.BODY)
        assert a.content == b.content

    def test_perplexity_too_large(self, client):
        res = client.post("/embedding", json=dict(self.BODY, perplexity=6.0))
        assert res.status_code == 400


class TestTimelineEndpoint:
    def test_entries(self, client):
        res = client.get(
            "/timeline",
            params={
                "from": "2017-04-20T00:00:02",
                "to": "2017-04-20T00:00:22",
                "window_s": 2,
                "attribute": "VPm",
            },
        )
        assert res.status_code == 200
        entries = res.json()["entries"]
        assert len(entries) == 10
        assert all(e["f_star_hz"] == pytest.approx(2.5) for e in entries)


class TestErrorMapping:
    def test_missing_field_400(self, client):
        assert client.post("/analyze", json={"from": "2017-04-20T00:00:02"}).status_code == 400

    def test_unknown_extra_field_400(self, client):
        assert (
            client.post("/analyze", json=dict(ANALYZE_BODY, nope=1)).status_code == 400
        )

    def test_bad_threshold_400(self, client):
        assert (
            client.post("/analyze", json=dict(ANALYZE_BODY, threshold_pct=0)).status_code
            == 400
        )

    def test_unknown_attribute_400(self, client):
        assert (
            client.post("/analyze", json=dict(ANALYZE_BODY, attribute="XXX")).status_code
            == 400
        )

    def test_unknown_pmu_404(self, client):
        assert (
            client.post("/analyze", json=dict(ANALYZE_BODY, pmu_ids=["999"])).status_code
            == 404
        )

    def test_beyond_stored_range_422(self, client):
        body = dict(ANALYZE_BODY, to="2017-04-20T00:30:00")
        assert client.post("/analyze", json=body).status_code == 422

    def test_multi_day_range_422(self, client):
        body = dict(ANALYZE_BODY, to="2017-04-22T00:00:00")
        assert client.post("/analyze", json=body).status_code == 422

    def test_no_data_for_attribute_422(self, client):
        body = dict(ANALYZE_BODY, attribute="DF")
        assert client.post("/analyze", json=body).status_code == 422

    def test_window_does_not_fit_422(self, client):
        body = dict(ANALYZE_BODY, to="2017-04-20T00:00:03")  # 1 s range, 2 s window
        assert client.post("/analyze", json=body).status_code == 422


class TestConcurrencyAndCache:
    def test_concurrent_identical_requests_identical_bodies(self, client):
        def hit(_):
            return client.post("/analyze", json=ANALYZE_BODY).content

        with ThreadPoolExecutor(max_workers=8) as ex:
            results = list(ex.map(hit, range(16)))
        assert len({r for r in results}) == 1

    def test_cacheless_still_deterministic(self, data_dir):
        app = create_app(ServiceConfig(data_dir=data_dir, cache_size=0))
        with TestClient(app) as c:
            a = c.post("/analyze", json=ANALYZE_BODY).content
            b = c.post("/analyze", json=ANALYZE_BODY).content
        assert a == b

    def test_concurrent_mixed_attributes(self, client):
        # Reads of other attributes proceed while analyze runs.
        def analyze(_):
            return client.post("/analyze", json=ANALYZE_BODY).status_code

        def other(_):
            return client.post(
                "/analyze", json=dict(ANALYZE_BODY, attribute="IAm")
            ).status_code

        with ThreadPoolExecutor(max_workers=8) as ex:
            codes = list(ex.map(lambda f: f(0), [analyze, other] * 6))
        assert set(codes) == {200}


class TestConfigSources:
    def test_env_fallback(self, data_dir, monkeypatch):
        monkeypatch.setenv("GRIDPULSE_DATA", str(data_dir))
        cfg = ServiceConfig.from_sources()
        assert cfg.data_dir == data_dir

    def test_config_file(self, data_dir, tmp_path):
        cfg_file = tmp_path / "svc.conf"
        cfg_file.write_text(f"data_dir = {data_dir}\ncache_size = 7\n# comment\n")
        cfg = ServiceConfig.from_sources(config_file=str(cfg_file), env={})
        assert cfg.cache_size == 7
        assert str(cfg.data_dir) == str(data_dir)

    def test_flag_overrides_file(self, data_dir, tmp_path):
        cfg_file = tmp_path / "svc.conf"
        cfg_file.write_text(f"data_dir = {data_dir}\nport = 9000\n")
        cfg = ServiceConfig.from_sources(config_file=str(cfg_file), env={}, port=9100)
        assert cfg.port == 9100

    def test_missing_data_dir(self):
        with pytest.raises(ValueError):
            ServiceConfig.from_sources(env={})

"""HTTP/JSON analysis service tying the engine modules together.

All analytics are computed on demand from store contents; responses are
deterministic for a given request and data directory, built with canonical
JSON (sorted keys, no whitespace) so repeated identical requests return
byte-identical bodies. A small LRU cache keyed by the canonical request
avoids recomputing hot queries; identical concurrent requests therefore
share one computation's bytes without any hidden state.

Error mapping: 400 malformed parameters, 404 unknown event/PMU, 422 for
windows that fall outside the stored data.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from collections import OrderedDict
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import Response
from pydantic import BaseModel, ConfigDict, Field

from . import embed, epicluster, localize, spectral
from .errors import (
    GridPulseError,
    RangeError,
    UnknownIdentifierError,
)
from .model import ATTRIBUTE_CODES, SAMPLE_RATE, EventRecord, GridTopology
from .store import DayStore

SCHEMA_VERSION = "1"


@dataclass
class ServiceConfig:
    data_dir: Path
    cache_size: int = 64
    kde_resolution: int = 64
    port: int = 8080

    @classmethod
    def from_sources(
        cls,
        data_dir: Optional[str] = None,
        config_file: Optional[str] = None,
        env: Optional[dict] = None,
        **overrides,
    ) -> "ServiceConfig":
        """Merge key=value config file, environment, and explicit flags."""
        values: dict = {}
        if config_file:
            for line in Path(config_file).read_text().splitlines():
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, val = line.partition("=")
                values[key.strip()] = val.strip()
        if env is None:
            env = dict(os.environ)
        if data_dir is None:
            data_dir = values.get("data_dir") or env.get("GRIDPULSE_DATA")
        if data_dir is None:
            raise ValueError(
                "no data directory: pass --data, set data_dir in the config "
                "file, or export GRIDPULSE_DATA"
            )
        cfg = cls(data_dir=Path(data_dir))
        for key in ("cache_size", "kde_resolution", "port"):
            if key in values:
                setattr(cfg, key, int(values[key]))
            if overrides.get(key) is not None:
                setattr(cfg, key, int(overrides[key]))
        return cfg


class _LruCache:
    def __init__(self, size: int):
        self.size = size
        self._data: OrderedDict[str, bytes] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key: str) -> Optional[bytes]:
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
            return None

    def put(self, key: str, value: bytes) -> None:
        if self.size <= 0:
            return
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.size:
                self._data.popitem(last=False)


def canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


class AnalyzeRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    from_: str = Field(alias="from")
    to: str
    window_s: int = 2
    attribute: str = "VPm"
    threshold_pct: float = 100.0
    pmu_ids: Optional[list[str]] = None
    stride_s: Optional[int] = None
    kde_resolution: Optional[int] = None
    kde_bandwidth: Optional[float] = None


class DendrogramRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    epicenter_ids: list[str]
    selected_ids: list[str]
    at: str
    window_s: int = 2
    attribute: str = "VPm"
    k: Optional[int] = None  # None selects silhouette-driven auto mode


class EmbeddingRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    selected_ids: list[str]
    at: str
    window_s: int = 2
    attribute: str = "VPm"
    perplexity: float = 10.0
    iters: int = 1000
    seed: int = 0
    epicenter_ids: Optional[list[str]] = None
    collision_radius: Optional[float] = None


class Engine:
    """Loads one data directory and answers analysis queries."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        root = Path(config.data_dir)
        topo_path = root / "topology.json"
        if not topo_path.exists():
            raise FileNotFoundError(f"{topo_path} not found")
        self.topology = GridTopology.load(topo_path)
        self.store = DayStore(root / "store")
        self.events: list[EventRecord] = []
        events_path = root / "events.json"
        if events_path.exists():
            self.events = [
                EventRecord.from_dict(d) for d in json.loads(events_path.read_text())
            ]
        self.cache = _LruCache(config.cache_size)
        self._positions = {
            p.id: self.topology.pmu_position(p.id) for p in self.topology.pmus
        }

    # -- time handling ----------------------------------------------------

    def _parse_ts(self, value: str) -> datetime:
        try:
            return datetime.fromisoformat(value.replace("Z", "+00:00")).replace(
                tzinfo=None
            )
        except ValueError:
            raise ValueError(f"unparseable timestamp {value!r}") from None

    def _to_tick(self, ts: datetime) -> tuple[date, int]:
        midnight = ts.replace(hour=0, minute=0, second=0, microsecond=0)
        tick = int(round((ts - midnight).total_seconds() * SAMPLE_RATE))
        return ts.date(), tick

    def _tick_to_iso(self, day: date, tick: int) -> str:
        base = datetime.combine(day, datetime.min.time())
        return (base + timedelta(seconds=tick / SAMPLE_RATE)).isoformat()

    def _resolve_range(self, from_s: str, to_s: str) -> tuple[date, int, int]:
        d0, t0 = self._to_tick(self._parse_ts(from_s))
        d1, t1 = self._to_tick(self._parse_ts(to_s))
        if d1 != d0:
            if d1 == d0 + timedelta(days=1) and t1 == 0:
                t1 = 86_400 * SAMPLE_RATE
            else:
                raise RangeError("analysis ranges must fall within one stored day")
        if t1 <= t0:
            raise ValueError("'to' must be after 'from'")
        return d0, t0, t1

    def _resolve_pmus(self, pmu_ids: Optional[list[str]]) -> tuple[str, ...]:
        if pmu_ids is None:
            return tuple(p.id for p in self.topology.pmus)
        if not pmu_ids:
            raise ValueError("pmu_ids must not be empty when given")
        for p in pmu_ids:
            self.topology.pmu(p)  # 404 on unknown
        return tuple(dict.fromkeys(pmu_ids))

    def _read(self, attribute: str, day: date, pmus, t0: int, t1: int):
        if attribute not in ATTRIBUTE_CODES:
            raise ValueError(f"unknown attribute {attribute!r}")
        try:
            handle = self.store.open(attribute, day)
        except UnknownIdentifierError:
            raise RangeError(
                f"no stored data for {attribute} on {day.isoformat()}"
            ) from None
        if t1 > handle.day_ticks:
            raise RangeError(
                f"requested ticks [{t0}, {t1}) exceed stored range "
                f"[0, {handle.day_ticks})"
            )
        matrix, _stats = handle.read_range(pmus, t0, t1)
        return matrix

    # -- payload builders ---------------------------------------------------

    def topology_payload(self) -> dict:
        return self.topology.to_dict()

    def events_payload(self) -> list[dict]:
        return [e.to_dict() for e in self.events]

    def analyze_payload(self, req: AnalyzeRequest) -> dict:
        day, t0, t1 = self._resolve_range(req.from_, req.to)
        pmus = self._resolve_pmus(req.pmu_ids)
        window = spectral.WindowSpec(req.window_s, req.stride_s)
        if t0 + window.n_samples > t1:
            raise RangeError("window does not fit inside the requested range")
        if not 0 < req.threshold_pct <= 100:
            raise ValueError("threshold_pct must be in (0, 100]")
        resolution = req.kde_resolution or self.config.kde_resolution
        matrix = self._read(req.attribute, day, pmus, t0, t1)
        frames = spectral.sliding_frames(matrix, window)

        frame_payloads = []
        for fr in frames:
            flags = spectral.flag_pmus(fr, req.threshold_pct) if fr.is_valid else []
            ranking = localize.rank_epicenter_candidates(fr)
            corr = (
                spectral.correlation_to_reference(fr, fr.peak_pmu)
                if fr.is_valid
                else {}
            )
            kde = localize.frame_kde(
                fr, self._positions, bandwidth=req.kde_bandwidth, resolution=resolution
            )
            frame_payloads.append(
                {
                    "start_tick": fr.start_tick,
                    "t": self._tick_to_iso(day, fr.start_tick),
                    "valid": bool(fr.is_valid),
                    "f_star_hz": fr.f_star_hz,
                    "peak_pmu": fr.peak_pmu,
                    "peak_mag": fr.peak_mag,
                    "mags": {
                        pid: [float(v) for v in fr.mags[i]] if fr.valid[i] else None
                        for i, pid in enumerate(fr.pmu_ids)
                    },
                    "flags": [
                        {"pmu": p, "magnitude": m, "rank": r} for p, m, r in flags
                    ],
                    "ranking": [{"pmu": p, "magnitude": m} for p, m in ranking],
                    "correlation": corr,
                    "kde": kde.to_dict(),
                }
            )

        n = window.n_samples
        return {
            "params": {
                "from": req.from_,
                "to": req.to,
                "day": day.isoformat(),
                "start_tick": t0,
                "end_tick": t1,
                "window_s": req.window_s,
                "stride_s": req.stride_s or req.window_s,
                "attribute": req.attribute,
                "threshold_pct": req.threshold_pct,
                "pmu_ids": list(pmus),
                "kde_resolution": resolution,
                "kde_bandwidth": req.kde_bandwidth,
            },
            "bins_hz": [k * SAMPLE_RATE / n for k in range(1, n // 2 + 1)],
            "frames": frame_payloads,
        }

    def timeline_payload(
        self, from_s: str, to_s: str, window_s: int, attribute: str
    ) -> dict:
        day, t0, t1 = self._resolve_range(from_s, to_s)
        window = spectral.WindowSpec(window_s)
        if t0 + window.n_samples > t1:
            raise RangeError("window does not fit inside the requested range")
        pmus = tuple(p.id for p in self.topology.pmus)
        matrix = self._read(attribute, day, pmus, t0, t1)
        entries = spectral.main_frequency_timeline(matrix, window)
        return {
            "params": {
                "from": from_s,
                "to": to_s,
                "day": day.isoformat(),
                "window_s": window_s,
                "attribute": attribute,
            },
            "entries": [
                {
                    "start_tick": e.start_tick,
                    "t": self._tick_to_iso(day, e.start_tick),
                    "f_star_hz": e.f_star_hz,
                    "peak_pmu": e.peak_pmu,
                    "peak_mag": e.peak_mag,
                    "gap": e.gap,
                }
                for e in entries
            ],
        }

    def dendrogram_payload(self, req: DendrogramRequest) -> dict:
        day, t0 = self._to_tick(self._parse_ts(req.at))
        window = spectral.WindowSpec(req.window_s)
        pmus = self._resolve_pmus(
            list(dict.fromkeys(list(req.epicenter_ids) + list(req.selected_ids)))
        )
        if not req.epicenter_ids:
            raise ValueError("epicenter_ids must not be empty")
        matrix = self._read(req.attribute, day, pmus, t0, t0 + window.n_samples)
        frame = spectral.frame_from_matrix(matrix, t0, window)
        model = epicluster.build_dendrogram(
            self.topology,
            req.epicenter_ids,
            req.selected_ids,
            frame,
            k_policy="auto" if req.k is None else req.k,
        )
        return {
            "params": {
                "epicenter_ids": list(req.epicenter_ids),
                "selected_ids": list(req.selected_ids),
                "at": req.at,
                "day": day.isoformat(),
                "start_tick": t0,
                "window_s": req.window_s,
                "attribute": req.attribute,
                "k": req.k,
            },
            "model": model.to_dict(),
        }

    def embedding_payload(self, req: EmbeddingRequest) -> dict:
        day, t0 = self._to_tick(self._parse_ts(req.at))
        window = spectral.WindowSpec(req.window_s)
        pmus = self._resolve_pmus(list(req.selected_ids))
        if len(pmus) < 2:
            raise ValueError("need at least two PMUs to embed")
        if not 0 < req.perplexity < len(pmus):
            raise ValueError("perplexity must be below the number of embedded PMUs")
        if req.epicenter_ids:
            for e in req.epicenter_ids:
                if e not in pmus:
                    raise ValueError(
                        "epicenter_ids must be included in selected_ids for rings"
                    )
        matrix = self._read(req.attribute, day, pmus, t0, t0 + window.n_samples)
        frame = spectral.frame_from_matrix(matrix, t0, window)
        usable = [pid for i, pid in enumerate(frame.pmu_ids) if frame.valid[i]]
        if len(usable) < 2:
            raise RangeError("fewer than two PMUs have valid spectra in this window")
        if req.perplexity >= len(usable):
            raise ValueError(
                "perplexity must be below the number of PMUs with valid spectra"
            )
        spectra = [frame.magnitudes_of(p) for p in usable]
        D = embed.distance_matrix(spectra)
        result = embed.tsne_embed(
            D, perplexity=req.perplexity, iters=req.iters, seed=req.seed
        )
        points = {pid: (float(x), float(y)) for pid, (x, y) in zip(usable, result.points)}

        resolved = None
        if req.collision_radius is not None:
            res = embed.resolve_collisions(
                result.points, req.collision_radius, ids=usable
            )
            resolved = {
                "points": [
                    {"pmu": pid, "x": float(x), "y": float(y)}
                    for pid, (x, y) in zip(usable, res.points)
                ],
                "overlaps_remaining": res.overlaps_remaining,
            }

        rings = {}
        if req.epicenter_ids:
            usable_epi = [e for e in req.epicenter_ids if e in points]
            if usable_epi:
                rings = embed.hop_rings(self.topology, usable_epi, points)

        return {
            "params": {
                "selected_ids": list(req.selected_ids),
                "at": req.at,
                "day": day.isoformat(),
                "start_tick": t0,
                "window_s": req.window_s,
                "attribute": req.attribute,
                "perplexity": req.perplexity,
                "iters": req.iters,
                "seed": req.seed,
                "epicenter_ids": list(req.epicenter_ids or []),
                "collision_radius": req.collision_radius,
            },
            "points": [
                {"pmu": pid, "x": points[pid][0], "y": points[pid][1]} for pid in usable
            ],
            "resolved": resolved,
            "rings": [{"hop": h, "radius": r} for h, r in sorted(rings.items())],
            "final_kl": result.kl_trace[-1],
        }


def _schemas() -> dict[str, dict]:
    """JSON schema documents for the wire formats, served under /schema."""
    pmu_ref = {"type": "string", "description": "PMU id"}
    return {
        "topology": {
            "version": SCHEMA_VERSION,
            "type": "object",
            "required": ["substations", "buses", "edges", "pmus"],
            "properties": {
                "substations": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "name", "x", "y"],
                        "properties": {
                            "id": {"type": "string"},
                            "name": {"type": "string"},
                            "x": {"type": "number"},
                            "y": {"type": "number"},
                        },
                    },
                },
                "buses": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "substation_id", "voltage_kv"],
                        "properties": {
                            "id": {"type": "string"},
                            "substation_id": {"type": "string"},
                            "voltage_kv": {"enum": [345, 138, 69]},
                        },
                    },
                },
                "edges": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "kind", "bus_a", "bus_b"],
                        "properties": {
                            "id": {"type": "string"},
                            "kind": {"enum": ["line", "transformer"]},
                            "bus_a": {"type": "string"},
                            "bus_b": {"type": "string"},
                        },
                    },
                },
                "pmus": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "bus_id", "label"],
                        "properties": {
                            "id": pmu_ref,
                            "bus_id": {"type": "string"},
                            "label": {"type": "string"},
                        },
                    },
                },
            },
        },
        "events": {
            "version": SCHEMA_VERSION,
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "t_start", "t_end", "kind", "provenance"],
                "properties": {
                    "id": {"type": "string"},
                    "t_start": {"type": "string", "format": "date-time"},
                    "t_end": {"type": "string", "format": "date-time"},
                    "oscillation_hz": {"type": ["number", "null"]},
                    "epicenter_pmus": {"type": "array", "items": pmu_ref},
                    "kind": {"enum": ["forced", "transient", "unknown"]},
                    "provenance": {"enum": ["report_text", "synthetic_ground_truth"]},
                    "warnings": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
        "analyze_response": {
            "version": SCHEMA_VERSION,
            "type": "object",
            "required": ["params", "bins_hz", "frames"],
            "properties": {
                "params": {"type": "object"},
                "bins_hz": {"type": "array", "items": {"type": "number"}},
                "frames": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": [
                            "start_tick", "t", "valid", "f_star_hz", "peak_pmu",
                            "peak_mag", "mags", "flags", "ranking", "correlation",
                            "kde",
                        ],
                    },
                },
            },
        },
        "timeline_response": {
            "version": SCHEMA_VERSION,
            "type": "object",
            "required": ["params", "entries"],
        },
        "dendrogram_response": {
            "version": SCHEMA_VERSION,
            "type": "object",
            "required": ["params", "model"],
            "properties": {
                "model": {
                    "type": "object",
                    "required": ["root", "layers", "links", "unreachable", "f_star_hz"],
                }
            },
        },
        "embedding_response": {
            "version": SCHEMA_VERSION,
            "type": "object",
            "required": ["params", "points", "rings", "final_kl"],
        },
    }


def create_app(config: ServiceConfig) -> FastAPI:
    engine = Engine(config)
    app = FastAPI(title="gridpulse", version="0.1.0")
    app.state.engine = engine
    schemas = _schemas()

    def respond(kind: str, request_key: dict, build) -> Response:
        key = hashlib.sha256(canonical_json({"op": kind, **request_key})).hexdigest()
        cached = engine.cache.get(key)
        if cached is None:
            cached = canonical_json(build())
            engine.cache.put(key, cached)
        return Response(content=cached, media_type="application/json")

    @app.exception_handler(RequestValidationError)
    async def _validation(_req: Request, exc: RequestValidationError):
        return Response(
            content=canonical_json({"error": "malformed parameters", "detail": str(exc)}),
            status_code=400,
            media_type="application/json",
        )

    @app.exception_handler(UnknownIdentifierError)
    async def _unknown(_req: Request, exc: UnknownIdentifierError):
        return Response(
            content=canonical_json({"error": str(exc)}),
            status_code=404,
            media_type="application/json",
        )

    @app.exception_handler(RangeError)
    async def _range(_req: Request, exc: RangeError):
        return Response(
            content=canonical_json({"error": str(exc)}),
            status_code=422,
            media_type="application/json",
        )

    @app.exception_handler(ValueError)
    async def _value(_req: Request, exc: ValueError):
        return Response(
            content=canonical_json({"error": str(exc)}),
            status_code=400,
            media_type="application/json",
        )

    @app.exception_handler(GridPulseError)
    async def _domain(_req: Request, exc: GridPulseError):
        return Response(
            content=canonical_json({"error": str(exc)}),
            status_code=422,
            media_type="application/json",
        )

    @app.get("/")
    def root():
        return {
            "service": "gridpulse",
            "version": "0.1.0",
            "endpoints": [
                "/topology", "/events", "/analyze", "/dendrogram",
                "/embedding", "/timeline", "/schema",
            ],
        }

    @app.get("/topology")
    def topology():
        return respond("topology", {}, engine.topology_payload)

    @app.get("/events")
    def events():
        return respond("events", {}, engine.events_payload)

    @app.post("/analyze")
    def analyze(req: AnalyzeRequest):
        return respond(
            "analyze",
            req.model_dump(by_alias=True),
            lambda: engine.analyze_payload(req),
        )

    @app.post("/dendrogram")
    def dendrogram(req: DendrogramRequest):
        return respond(
            "dendrogram", req.model_dump(), lambda: engine.dendrogram_payload(req)
        )

    @app.post("/embedding")
    def embedding(req: EmbeddingRequest):
        return respond(
            "embedding", req.model_dump(), lambda: engine.embedding_payload(req)
        )

    @app.get("/timeline")
    def timeline(
        from_: str = Query(alias="from"),
        to: str = Query(),
        window_s: int = Query(default=2),
        attribute: str = Query(default="VPm"),
    ):
        return respond(
            "timeline",
            {"from": from_, "to": to, "window_s": window_s, "attribute": attribute},
            lambda: engine.timeline_payload(from_, to, window_s, attribute),
        )

    @app.get("/schema")
    def schema_index():
        return {"version": SCHEMA_VERSION, "schemas": sorted(schemas)}

    @app.get("/schema/{name}")
    def schema_doc(name: str):
        if name not in schemas:
            raise UnknownIdentifierError(f"unknown schema {name!r}")
        return schemas[name]

    return app


def create_app_from_dir(data_dir: str | Path, **kwargs) -> FastAPI:
    return create_app(ServiceConfig(data_dir=Path(data_dir), **kwargs))

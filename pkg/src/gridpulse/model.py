"""Shared domain types and graph primitives.

The grid is modeled as a graph over buses: line edges join buses at the same
voltage level, transformer edges join buses at different levels inside a
substation. PMUs sit on buses. All types are immutable after construction and
safe to share across concurrent readers.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Optional

from .errors import TopologyError, UnknownIdentifierError

import numpy as np

SAMPLE_RATE = 30
TICKS_PER_DAY = 86_400 * SAMPLE_RATE  # 2 592 000
VOLTAGE_LEVELS_KV = (345, 138, 69)

# 18 attribute codes: {V,I} x {P,A,B,C} x {magnitude, angle}, plus frequency
# and rate-of-change-of-frequency.
ATTRIBUTE_CODES = tuple(
    f"{q}{ph}{c}" for q in "VI" for ph in "PABC" for c in "ma"
) + ("F", "DF")


@dataclass(frozen=True)
class Substation:
    id: str
    name: str
    x: float
    y: float


@dataclass(frozen=True)
class Bus:
    id: str
    substation_id: str
    voltage_kv: int


@dataclass(frozen=True)
class Edge:
    id: str
    kind: str  # "line" | "transformer"
    bus_a: str
    bus_b: str


@dataclass(frozen=True)
class Pmu:
    id: str
    bus_id: str
    label: str


@dataclass(frozen=True)
class GridTopology:
    """Electrical network: substations, buses, edges, and sensor placements."""

    substations: tuple[Substation, ...]
    buses: tuple[Bus, ...]
    edges: tuple[Edge, ...]
    pmus: tuple[Pmu, ...]

    _bus_index: dict = field(init=False, repr=False, compare=False)
    _pmu_index: dict = field(init=False, repr=False, compare=False)
    _sub_index: dict = field(init=False, repr=False, compare=False)
    _adj: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_sub_index", {s.id: s for s in self.substations})
        object.__setattr__(self, "_bus_index", {b.id: b for b in self.buses})
        object.__setattr__(self, "_pmu_index", {p.id: p for p in self.pmus})
        adj: dict[str, list[tuple[str, str]]] = {b.id: [] for b in self.buses}
        for e in self.edges:
            adj[e.bus_a].append((e.bus_b, e.kind))
            adj[e.bus_b].append((e.bus_a, e.kind))
        object.__setattr__(self, "_adj", adj)
        self._validate()

    def _validate(self):
        for coll, idx in (
            (self.substations, self._sub_index),
            (self.buses, self._bus_index),
            (self.pmus, self._pmu_index),
        ):
            if len(idx) != len(coll):
                raise TopologyError("duplicate ids within a collection")
        if len({e.id for e in self.edges}) != len(self.edges):
            raise TopologyError("duplicate edge ids")
        for b in self.buses:
            if b.substation_id not in self._sub_index:
                raise TopologyError(f"bus {b.id} references unknown substation")
            if b.voltage_kv not in VOLTAGE_LEVELS_KV:
                raise TopologyError(f"bus {b.id} has unsupported voltage level")
        for e in self.edges:
            if e.bus_a not in self._bus_index or e.bus_b not in self._bus_index:
                raise TopologyError(f"edge {e.id} references unknown bus")
            if e.bus_a == e.bus_b:
                raise TopologyError(f"edge {e.id} is a self-loop")
            va = self._bus_index[e.bus_a].voltage_kv
            vb = self._bus_index[e.bus_b].voltage_kv
            if e.kind == "line" and va != vb:
                raise TopologyError(f"line edge {e.id} joins different voltage levels")
            if e.kind == "transformer" and va == vb:
                raise TopologyError(f"transformer edge {e.id} joins equal voltage levels")
            if e.kind not in ("line", "transformer"):
                raise TopologyError(f"edge {e.id} has unknown kind {e.kind!r}")
        for p in self.pmus:
            if p.bus_id not in self._bus_index:
                raise TopologyError(f"PMU {p.id} references unknown bus")

    def validate_connected(self) -> "GridTopology":
        """Reject a disconnected bus graph; called by loaders and generators.

        Direct construction skips this so graph queries can still answer
        "unreachable" for hypothetical inputs.
        """
        if self.buses and not self._is_connected():
            raise TopologyError("bus graph is not connected")
        return self

    def _is_connected(self) -> bool:
        seen = {self.buses[0].id}
        stack = [self.buses[0].id]
        while stack:
            for nbr, _ in self._adj[stack.pop()]:
                if nbr not in seen:
                    seen.add(nbr)
                    stack.append(nbr)
        return len(seen) == len(self.buses)

    def bus(self, bus_id: str) -> Bus:
        try:
            return self._bus_index[bus_id]
        except KeyError:
            raise UnknownIdentifierError(f"unknown bus {bus_id!r}") from None

    def pmu(self, pmu_id: str) -> Pmu:
        try:
            return self._pmu_index[pmu_id]
        except KeyError:
            raise UnknownIdentifierError(f"unknown PMU {pmu_id!r}") from None

    def substation(self, sub_id: str) -> Substation:
        try:
            return self._sub_index[sub_id]
        except KeyError:
            raise UnknownIdentifierError(f"unknown substation {sub_id!r}") from None

    def has_pmu(self, pmu_id: str) -> bool:
        return pmu_id in self._pmu_index

    def neighbors(self, bus_id: str) -> list[tuple[str, str]]:
        """(neighbor bus id, edge kind) pairs, duplicates kept for parallel edges."""
        if bus_id not in self._adj:
            raise UnknownIdentifierError(f"unknown bus {bus_id!r}")
        return self._adj[bus_id]

    def pmu_position(self, pmu_id: str) -> tuple[float, float]:
        """Abstract-km coordinates of the substation hosting the PMU's bus."""
        bus = self.bus(self.pmu(pmu_id).bus_id)
        sub = self._sub_index[bus.substation_id]
        return (sub.x, sub.y)

    def pmus_at_substation(self, sub_id: str) -> list[Pmu]:
        self.substation(sub_id)
        bus_ids = {b.id for b in self.buses if b.substation_id == sub_id}
        return [p for p in self.pmus if p.bus_id in bus_ids]

    def to_dict(self) -> dict:
        return {
            "substations": [
                {"id": s.id, "name": s.name, "x": s.x, "y": s.y}
                for s in self.substations
            ],
            "buses": [
                {"id": b.id, "substation_id": b.substation_id, "voltage_kv": b.voltage_kv}
                for b in self.buses
            ],
            "edges": [
                {"id": e.id, "kind": e.kind, "bus_a": e.bus_a, "bus_b": e.bus_b}
                for e in self.edges
            ],
            "pmus": [
                {"id": p.id, "bus_id": p.bus_id, "label": p.label} for p in self.pmus
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridTopology":
        return cls(
            substations=tuple(
                Substation(s["id"], s["name"], float(s["x"]), float(s["y"]))
                for s in d["substations"]
            ),
            buses=tuple(
                Bus(b["id"], b["substation_id"], int(b["voltage_kv"]))
                for b in d["buses"]
            ),
            edges=tuple(
                Edge(e["id"], e["kind"], e["bus_a"], e["bus_b"]) for e in d["edges"]
            ),
            pmus=tuple(Pmu(p["id"], p["bus_id"], p["label"]) for p in d["pmus"]),
        ).validate_connected()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "GridTopology":
        return cls.from_dict(json.loads(Path(path).read_text()))


def hop_distance(topology: GridTopology, from_bus: str, to_bus: str) -> Optional[int]:
    """Shortest-path edge count between two buses, or None if unreachable.

    Every edge counts as one hop regardless of kind. Symmetric by construction.
    """
    topology.bus(from_bus)
    topology.bus(to_bus)
    if from_bus == to_bus:
        return 0
    dist = {from_bus: 0}
    frontier = [from_bus]
    while frontier:
        nxt = []
        for b in frontier:
            for nbr, _ in topology.neighbors(b):
                if nbr not in dist:
                    dist[nbr] = dist[b] + 1
                    if nbr == to_bus:
                        return dist[nbr]
                    nxt.append(nbr)
        frontier = nxt
    return None


def hop_distances_from(topology: GridTopology, source_bus: str) -> dict[str, int]:
    """BFS hop distance from one bus to every reachable bus."""
    topology.bus(source_bus)
    dist = {source_bus: 0}
    frontier = [source_bus]
    while frontier:
        nxt = []
        for b in frontier:
            for nbr, _ in topology.neighbors(b):
                if nbr not in dist:
                    dist[nbr] = dist[b] + 1
                    nxt.append(nbr)
        frontier = nxt
    return dist


def shortest_path_profile(
    topology: GridTopology, from_bus: str, to_bus: str
) -> Optional[tuple[int, int]]:
    """(hops, transformer crossings) along a shortest path, or None.

    Among all shortest paths the one with the fewest transformer crossings is
    reported, so the profile is deterministic.
    """
    topology.bus(from_bus)
    topology.bus(to_bus)
    best: dict[str, tuple[int, int]] = {from_bus: (0, 0)}
    heap: list[tuple[int, int, str]] = [(0, 0, from_bus)]
    while heap:
        hops, xf, b = heapq.heappop(heap)
        if (hops, xf) > best.get(b, (1 << 30, 0)):
            continue
        if b == to_bus:
            return (hops, xf)
        for nbr, kind in topology.neighbors(b):
            cand = (hops + 1, xf + (1 if kind == "transformer" else 0))
            if cand < best.get(nbr, (1 << 30, 0)):
                best[nbr] = cand
                heapq.heappush(heap, (cand[0], cand[1], nbr))
    return None


def pmu_adjacency(
    topology: GridTopology, pmu_set: Iterable[str]
) -> set[tuple[str, str]]:
    """Unordered PMU pairs whose buses are joined by a single edge.

    Two PMUs on the same bus contribute no pair: links count physical edges.
    """
    pmus = [topology.pmu(p) for p in pmu_set]
    by_bus: dict[str, list[str]] = {}
    for p in pmus:
        by_bus.setdefault(p.bus_id, []).append(p.id)
    pairs: set[tuple[str, str]] = set()
    for i, p in enumerate(pmus):
        for nbr, _ in topology.neighbors(p.bus_id):
            for q_id in by_bus.get(nbr, ()):
                if q_id != p.id:
                    pairs.add((min(p.id, q_id), max(p.id, q_id)))
    return pairs


@dataclass(frozen=True)
class SeriesMatrix:
    """Time-aligned block of 30 Hz samples for one attribute and a PMU set.

    ``values`` is row-major (ticks x PMUs) float64; NaN marks a dropout cell.
    """

    attribute: str
    day: date
    start_tick: int
    end_tick: int
    pmu_ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.attribute not in ATTRIBUTE_CODES:
            raise ValueError(f"unknown attribute code {self.attribute!r}")
        if not (0 <= self.start_tick < self.end_tick <= TICKS_PER_DAY):
            raise ValueError("tick range must satisfy 0 <= start < end <= 2592000")
        rows = self.end_tick - self.start_tick
        if self.values.shape != (rows, len(self.pmu_ids)):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"({rows}, {len(self.pmu_ids)})"
            )
        if self.values.dtype != np.float64:
            raise ValueError("values must be float64")
        self.values.setflags(write=False)

    @property
    def rows(self) -> int:
        return self.end_tick - self.start_tick

    def column(self, pmu_id: str) -> np.ndarray:
        try:
            j = self.pmu_ids.index(pmu_id)
        except ValueError:
            raise UnknownIdentifierError(f"PMU {pmu_id!r} not in matrix") from None
        return self.values[:, j]

    def equals(self, other: "SeriesMatrix") -> bool:
        """Bit-exact equality including null placement."""
        if (
            self.attribute != other.attribute
            or self.day != other.day
            or self.start_tick != other.start_tick
            or self.end_tick != other.end_tick
            or self.pmu_ids != other.pmu_ids
        ):
            return False
        a, b = self.values, other.values
        return bool(np.array_equal(a.view(np.uint64), b.view(np.uint64)))


@dataclass(frozen=True)
class EventRecord:
    """A grid event with its linked epicenter PMUs and provenance."""

    id: str
    t_start: datetime
    t_end: datetime
    oscillation_hz: Optional[float]
    epicenter_pmus: tuple[str, ...]
    kind: str  # "forced" | "transient" | "unknown"
    provenance: str  # "report_text" | "synthetic_ground_truth"
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.t_start > self.t_end:
            raise ValueError("event t_start must be <= t_end")
        if self.kind not in ("forced", "transient", "unknown"):
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.kind == "forced" and not (self.oscillation_hz and self.oscillation_hz > 0):
            raise ValueError("forced events require oscillation_hz > 0")
        if self.provenance not in ("report_text", "synthetic_ground_truth"):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "t_start": self.t_start.isoformat(),
            "t_end": self.t_end.isoformat(),
            "oscillation_hz": self.oscillation_hz,
            "epicenter_pmus": list(self.epicenter_pmus),
            "kind": self.kind,
            "provenance": self.provenance,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EventRecord":
        return cls(
            id=d["id"],
            t_start=datetime.fromisoformat(d["t_start"]),
            t_end=datetime.fromisoformat(d["t_end"]),
            oscillation_hz=d.get("oscillation_hz"),
            epicenter_pmus=tuple(d.get("epicenter_pmus", ())),
            kind=d.get("kind", "unknown"),
            provenance=d["provenance"],
            warnings=tuple(d.get("warnings", ())),
        )

"""Shared fixtures and small hand-built topologies."""

from __future__ import annotations

import numpy as np
import pytest

from gridpulse.model import Bus, Edge, GridTopology, Pmu, Substation


def make_topology(bus_specs, edge_specs, pmu_specs, validate_connected=True):
    """Terse builder: buses as (id, voltage), edges as (kind, a, b),
    PMUs as (id, bus)."""
    subs = tuple(
        Substation(f"sub-{b[0]}", f"Sub {b[0].upper()}", float(i), 0.0)
        for i, b in enumerate(bus_specs)
    )
    buses = tuple(Bus(b[0], f"sub-{b[0]}", b[1]) for b in bus_specs)
    edges = tuple(
        Edge(f"e{i}", kind, a, b) for i, (kind, a, b) in enumerate(edge_specs)
    )
    pmus = tuple(Pmu(pid, bus, f"PMU {pid}") for pid, bus in pmu_specs)
    topo = GridTopology(substations=subs, buses=buses, edges=edges, pmus=pmus)
    if validate_connected:
        topo.validate_connected()
    return topo


@pytest.fixture
def chain3():
    """A - B - C line chain at 345 kV, one PMU per bus."""
    return make_topology(
        [("A", 345), ("B", 345), ("C", 345)],
        [("line", "A", "B"), ("line", "B", "C")],
        [("101", "A"), ("102", "B"), ("103", "C")],
    )


@pytest.fixture
def chain5():
    """Five-bus line chain, PMUs everywhere."""
    names = ["A", "B", "C", "D", "E"]
    return make_topology(
        [(n, 345) for n in names],
        [("line", a, b) for a, b in zip(names, names[1:])],
        [(str(101 + i), n) for i, n in enumerate(names)],
    )


def two_path_topology():
    """Source S with a line path (a1, a2) and a transformer-damped path (b1, b2).

    Both paths are widened with a sibling branch so hop layers have enough
    PMUs to cluster into two groups.
    """
    return make_topology(
        [
            ("S", 345),
            ("a1", 345), ("a2", 345), ("c1", 345), ("c2", 345),
            ("b1", 138), ("b2", 138), ("d1", 138), ("d2", 138),
        ],
        [
            ("line", "S", "a1"), ("line", "a1", "a2"),
            ("line", "S", "c1"), ("line", "c1", "c2"),
            ("transformer", "S", "b1"), ("line", "b1", "b2"),
            ("transformer", "S", "d1"), ("line", "d1", "d2"),
        ],
        [
            ("100", "S"),
            ("111", "a1"), ("112", "a2"), ("121", "c1"), ("122", "c2"),
            ("131", "b1"), ("132", "b2"), ("141", "d1"), ("142", "d2"),
        ],
    )


def naive_dft_amplitudes(samples: np.ndarray) -> np.ndarray:
    """Brute-force O(N^2) one-sided amplitude spectrum over bins 1..N/2.

    Independent oracle for the FFT path: mean subtraction plus the direct
    DFT sum, no fft library involved.
    """
    x = np.asarray(samples, dtype=np.float64)
    n = len(x)
    x = x - x.mean()
    out = np.zeros(n // 2)
    for k in range(1, n // 2 + 1):
        re = sum(x[m] * np.cos(2 * np.pi * k * m / n) for m in range(n))
        im = sum(-x[m] * np.sin(2 * np.pi * k * m / n) for m in range(n))
        out[k - 1] = 2.0 / n * np.hypot(re, im)
    return out

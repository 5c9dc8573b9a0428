"""Similarity embedding of PMU spectra.

Pairwise Euclidean distances over spectrum vectors feed an exact 2-D t-SNE
(no tree approximation; sensor counts here are tens to a few hundred). The
optimizer is plain gradient descent with momentum and early exaggeration;
after the burn-in phase a step that would raise the KL objective is halved
until it does not, so the reported KL trace is non-increasing over the tail
of the run. Collision resolution and average-hop rings serve the scatter
panel.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import GridTopology, hop_distances_from

P_FLOOR = 1e-12
EXAGGERATION = 4.0
EXAGGERATION_ITERS = 100
MOMENTUM_SWITCH_ITER = 250
MOMENTUM_EARLY = 0.5
MOMENTUM_LATE = 0.8
MONOTONE_FROM_ITER = 500


def distance_matrix(spectra: Sequence[np.ndarray]) -> np.ndarray:
    """Symmetric Euclidean distance matrix over equal-length vectors."""
    if len(spectra) == 0:
        return np.zeros((0, 0))
    lengths = {len(s) for s in spectra}
    if len(lengths) > 1:
        raise ValueError("all spectrum vectors must have the same length")
    X = np.asarray(spectra, dtype=np.float64)
    sq = np.sum(X**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2 * X @ X.T
    np.fill_diagonal(d2, 0.0)
    return np.sqrt(np.maximum(d2, 0.0))


def _conditional_probs(d2_row: np.ndarray, beta: float) -> np.ndarray:
    p = np.exp(-d2_row * beta)
    s = p.sum()
    return p / s if s > 0 else np.full_like(p, 1.0 / len(p))


def _row_entropy(d2_row: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    p = np.exp(-d2_row * beta)
    s = p.sum()
    if s <= 0:
        p = np.full_like(p, 1.0 / len(p))
        return float(np.log(len(p))), p
    p = p / s
    nz = p > 0
    h = float(-np.sum(p[nz] * np.log(p[nz])))
    return h, p


def joint_probabilities(D: np.ndarray, perplexity: float) -> np.ndarray:
    """Symmetrized t-SNE joint probabilities from a distance matrix.

    Per-point precision found by binary search so each conditional
    distribution's entropy matches log(perplexity).
    """
    n = len(D)
    target = np.log(perplexity)
    P = np.zeros((n, n))
    d2 = D**2
    for i in range(n):
        row = np.delete(d2[i], i)
        beta, lo, hi = 1.0, 0.0, np.inf
        for _ in range(64):
            h, p = _row_entropy(row, beta)
            if abs(h - target) < 1e-7:
                break
            if h > target:
                lo = beta
                beta = beta * 2 if hi == np.inf else (beta + hi) / 2
            else:
                hi = beta
                beta = (lo + beta) / 2
        P[i, np.arange(n) != i] = p
    P = (P + P.T) / (2 * n)
    return np.maximum(P, P_FLOOR)


def _q_matrix(Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sq = np.sum(Y**2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2 * Y @ Y.T
    W = 1.0 / (1.0 + np.maximum(d2, 0.0))
    np.fill_diagonal(W, 0.0)
    Q = np.maximum(W / W.sum(), P_FLOOR)
    return Q, W


def _kl(P: np.ndarray, Q: np.ndarray) -> float:
    mask = P > P_FLOOR
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


def _gradient(P: np.ndarray, Q: np.ndarray, W: np.ndarray, Y: np.ndarray) -> np.ndarray:
    PQW = (P - Q) * W
    return 4.0 * ((np.diag(PQW.sum(axis=1)) - PQW) @ Y)


@dataclass(frozen=True)
class TsneResult:
    points: np.ndarray  # (n, 2), centroid at origin
    kl_trace: tuple[float, ...]  # objective per iteration (true P throughout)


def tsne_embed(
    D: np.ndarray,
    perplexity: float = 10.0,
    iters: int = 1000,
    seed: int = 0,
    learning_rate: float = 100.0,
) -> TsneResult:
    """Exact t-SNE on a precomputed distance matrix; deterministic per seed."""
    n = len(D)
    if n < 2:
        raise ValueError("need at least two points")
    if not 0 < perplexity < n:
        raise ValueError("perplexity must satisfy 0 < perplexity < n")
    if D.shape != (n, n):
        raise ValueError("distance matrix must be square")

    P = joint_probabilities(D, perplexity)
    rng = np.random.default_rng(seed)
    Y = rng.normal(0.0, 1e-4, size=(n, 2))
    update = np.zeros_like(Y)
    kl_trace = []

    for it in range(iters):
        exaggerate = it < EXAGGERATION_ITERS
        P_eff = P * EXAGGERATION if exaggerate else P
        momentum = MOMENTUM_EARLY if it < MOMENTUM_SWITCH_ITER else MOMENTUM_LATE

        Q, W = _q_matrix(Y)
        grad = _gradient(P_eff, Q, W, Y)
        step = momentum * update - learning_rate * grad

        if it >= MONOTONE_FROM_ITER and kl_trace:
            # Tail phase: refuse steps that raise the objective.
            prev_kl = kl_trace[-1]
            for _ in range(60):
                Qc, _w = _q_matrix(Y + step)
                if _kl(P, Qc) <= prev_kl + 1e-15:
                    break
                step = step * 0.5
            else:
                step = np.zeros_like(step)

        update = step
        Y = Y + update
        Y = Y - Y.mean(axis=0)
        Qn, _ = _q_matrix(Y)
        kl_trace.append(_kl(P, Qn))

    return TsneResult(points=Y, kl_trace=tuple(kl_trace))


@dataclass(frozen=True)
class CollisionResult:
    points: np.ndarray
    overlaps_remaining: int
    iterations: int


def resolve_collisions(
    points: np.ndarray,
    radius: float,
    max_iters: int = 50,
    ids: Optional[Sequence[str]] = None,
) -> CollisionResult:
    """Push overlapping circles apart; best effort within max_iters sweeps.

    Each overlapping pair splits its overlap symmetrically along the pair
    axis. Coincident points get a deterministic jitter axis derived from
    their ids (or indices), so repeated runs agree.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    pts = np.array(points, dtype=np.float64)
    n = len(pts)
    tags = list(ids) if ids is not None else [str(i) for i in range(n)]
    min_dist = 2.0 * radius
    # Overlapping pairs separate to slightly beyond contact; the slack keeps
    # dense packs from re-colliding forever at the critical distance.
    target = min_dist * 1.05

    def jitter_axis(i: int, j: int) -> np.ndarray:
        # crc32 rather than hash(): stable across processes.
        h = zlib.crc32(f"{tags[i]}|{tags[j]}".encode())
        ang = 2 * np.pi * (h / 0xFFFFFFFF)
        return np.array([np.cos(ang), np.sin(ang)])

    iterations = 0
    for sweep in range(max_iters):
        moved = False
        for i in range(n):
            for j in range(i + 1, n):
                delta = pts[j] - pts[i]
                d = float(np.hypot(*delta))
                if d >= min_dist:
                    continue
                axis = delta / d if d > 1e-12 else jitter_axis(i, j)
                shift = (target - d) / 2.0
                pts[i] -= axis * shift
                pts[j] += axis * shift
                moved = True
        iterations = sweep + 1
        if not moved:
            break

    overlaps = 0
    for i in range(n):
        for j in range(i + 1, n):
            if float(np.hypot(*(pts[j] - pts[i]))) < min_dist - 1e-9:
                overlaps += 1
    return CollisionResult(points=pts, overlaps_remaining=overlaps, iterations=iterations)


def hop_rings(
    topology: GridTopology,
    epicenter_pmus: Sequence[str],
    embedded: dict[str, tuple[float, float]],
) -> dict[int, float]:
    """Mean embedded distance from the epicenter point per hop layer.

    The epicenter point is the centroid of the epicenters' embedded
    positions; hops with no embedded PMU are omitted.
    """
    if not epicenter_pmus:
        raise ValueError("epicenter set must not be empty")
    epi_pts = []
    for p in epicenter_pmus:
        topology.pmu(p)
        if p not in embedded:
            raise ValueError(f"epicenter PMU {p!r} has no embedded position")
        epi_pts.append(embedded[p])
    center = np.mean(np.asarray(epi_pts, dtype=np.float64), axis=0)

    dists = [hop_distances_from(topology, topology.pmu(p).bus_id) for p in epicenter_pmus]
    sums: dict[int, list[float]] = {}
    epi_set = set(epicenter_pmus)
    for pid, pos in embedded.items():
        if pid in epi_set:
            continue
        bus = topology.pmu(pid).bus_id
        hop = None
        for d in dists:
            h = d.get(bus)
            if h is not None and (hop is None or h < hop):
                hop = h
        if hop is None:
            continue
        sums.setdefault(hop, []).append(float(np.hypot(*(np.asarray(pos) - center))))
    return {h: float(np.mean(v)) for h, v in sorted(sums.items())}

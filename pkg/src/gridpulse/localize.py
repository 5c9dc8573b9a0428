"""Epicenter candidate ranking and the network contour field.

Ranking follows the magnitude-at-oscillation-frequency heuristic: the PMU
with the largest spectrum magnitude at the frame's dominant frequency is the
best epicenter candidate. The contour is a Gaussian kernel density field
over sensor positions weighted by those peak magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .spectral import SpectrumFrame

DEFAULT_RESOLUTION = 128
# Default bandwidth as a fraction of the position bounding-box diagonal.
DEFAULT_BANDWIDTH_FRACTION = 0.08


def rank_epicenter_candidates(frame: SpectrumFrame) -> list[tuple[str, float]]:
    """Valid PMUs ordered by magnitude at f*, descending; ties by PMU id."""
    if not frame.is_valid:
        return []
    entries = []
    for i, pid in enumerate(frame.pmu_ids):
        if frame.valid[i]:
            entries.append((pid, float(frame.mags[i, frame.f_star_bin - 1])))
    entries.sort(key=lambda e: (-e[1], e[0]))
    return entries


@dataclass(frozen=True)
class KdeField:
    values: np.ndarray  # (resolution, resolution) row-major, row 0 at y0
    x0: float
    y0: float
    x1: float
    y1: float
    bandwidth: float

    def to_dict(self) -> dict:
        return {
            "resolution": self.values.shape[0],
            "bbox": [self.x0, self.y0, self.x1, self.y1],
            "bandwidth": self.bandwidth,
            "values": [float(v) for v in self.values.ravel()],
        }


def kde_field(
    positions: Sequence[tuple[float, float]],
    weights: Sequence[float],
    bandwidth: Optional[float] = None,
    resolution: int = DEFAULT_RESOLUTION,
) -> KdeField:
    """Gaussian KDE of weights over positions on a square grid.

    field(g) = sum_p w_p * exp(-|g - pos_p|^2 / (2 bw^2)), evaluated at cell
    centers of a resolution x resolution grid covering the position bounding
    box plus a 10% margin per side.
    """
    if resolution < 16:
        raise ValueError("resolution must be >= 16")
    if len(positions) != len(weights):
        raise ValueError("positions and weights must have equal length")
    if bandwidth is not None and bandwidth <= 0:
        raise ValueError("bandwidth must be positive")

    if not positions:
        bw = bandwidth if bandwidth is not None else 1.0
        return KdeField(np.zeros((resolution, resolution)), 0.0, 0.0, 1.0, 1.0, bw)

    pos = np.asarray(positions, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    x_min, y_min = pos.min(axis=0)
    x_max, y_max = pos.max(axis=0)
    diag = float(np.hypot(x_max - x_min, y_max - y_min))
    if bandwidth is None:
        bandwidth = DEFAULT_BANDWIDTH_FRACTION * diag if diag > 0 else 1.0

    mx = 0.10 * (x_max - x_min)
    my = 0.10 * (y_max - y_min)
    if mx == 0:
        mx = max(bandwidth, 1.0)
    if my == 0:
        my = max(bandwidth, 1.0)
    x0, x1 = x_min - mx, x_max + mx
    y0, y1 = y_min - my, y_max + my

    gx = np.linspace(x0, x1, resolution)
    gy = np.linspace(y0, y1, resolution)
    dx = gx[None, :, None] - pos[None, None, :, 0]
    dy = gy[:, None, None] - pos[None, None, :, 1]
    sq = dx**2 + dy**2
    field = (w[None, None, :] * np.exp(-sq / (2 * bandwidth**2))).sum(axis=2)
    return KdeField(field, float(x0), float(y0), float(x1), float(y1), float(bandwidth))


def frame_kde(
    frame: SpectrumFrame,
    positions_by_pmu: dict[str, tuple[float, float]],
    bandwidth: Optional[float] = None,
    resolution: int = DEFAULT_RESOLUTION,
) -> KdeField:
    """KDE of magnitude-at-f* over PMU positions for one frame."""
    positions = []
    weights = []
    if frame.is_valid:
        for i, pid in enumerate(frame.pmu_ids):
            if frame.valid[i] and pid in positions_by_pmu:
                positions.append(positions_by_pmu[pid])
                weights.append(float(frame.mags[i, frame.f_star_bin - 1]))
    return kde_field(positions, weights, bandwidth=bandwidth, resolution=resolution)

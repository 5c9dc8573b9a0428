"""Sliding-window spectrum analysis over PMU series.

Windows are mean-subtracted and transformed to a one-sided amplitude spectrum
(scaling 2/N over bins 1..N/2, DC excluded) so an on-bin sinusoid of unit
amplitude reads exactly 1.0 at its bin. A window with more than 10% dropout
is invalid; smaller gaps are linearly interpolated. The frame's dominant
frequency f* is the bin of the global magnitude maximum across valid PMUs.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Optional, Sequence

import numpy as np

from .errors import GridPulseError
from .model import SAMPLE_RATE, SeriesMatrix

ALLOWED_WINDOW_SECONDS = (2, 5, 10)
MAX_GAP_FRACTION = 0.10


@dataclass(frozen=True)
class WindowSpec:
    window_seconds: int
    stride_seconds: Optional[int] = None  # default: window length (non-overlapping)
    hann: bool = False

    def __post_init__(self):
        if self.window_seconds not in ALLOWED_WINDOW_SECONDS:
            raise ValueError(
                f"window_seconds must be one of {ALLOWED_WINDOW_SECONDS}"
            )
        if self.stride_seconds is not None and self.stride_seconds <= 0:
            raise ValueError("stride_seconds must be positive")

    @property
    def n_samples(self) -> int:
        return self.window_seconds * SAMPLE_RATE

    @property
    def stride_ticks(self) -> int:
        s = self.stride_seconds if self.stride_seconds is not None else self.window_seconds
        return s * SAMPLE_RATE


@dataclass(frozen=True)
class SpectrumFrame:
    """Per-window, per-PMU one-sided magnitude spectra plus the window peak."""

    attribute: str
    day: date
    start_tick: int
    n_samples: int
    pmu_ids: tuple[str, ...]
    mags: np.ndarray  # (n_pmus, n_bins), rows of invalid PMUs are zero
    valid: np.ndarray  # (n_pmus,) bool
    f_star_bin: Optional[int]
    f_star_hz: Optional[float]
    peak_pmu: Optional[str]
    peak_mag: Optional[float]

    @property
    def n_bins(self) -> int:
        return self.n_samples // 2

    @property
    def bins_hz(self) -> np.ndarray:
        """Frequency of bins 1..N/2; bin width 30/N Hz."""
        return np.arange(1, self.n_bins + 1) * (SAMPLE_RATE / self.n_samples)

    @property
    def is_valid(self) -> bool:
        return self.f_star_bin is not None

    def magnitudes_of(self, pmu_id: str) -> np.ndarray:
        return self.mags[self.pmu_ids.index(pmu_id)]

    def magnitude_at_fstar(self, pmu_id: str) -> float:
        if self.f_star_bin is None:
            raise GridPulseError("frame has no valid PMUs")
        return float(self.mags[self.pmu_ids.index(pmu_id), self.f_star_bin - 1])


def compute_spectrum(samples: np.ndarray, sample_rate: int = SAMPLE_RATE,
                     hann: bool = False) -> Optional[np.ndarray]:
    """One-sided amplitude spectrum of one window, or None when invalid.

    Returns bins 1..N/2 (DC excluded). NaN gaps up to 10% of the window are
    linearly interpolated; a window with more nulls (or all nulls) is invalid.
    """
    x = np.asarray(samples, dtype=np.float64)
    n = len(x)
    if n != sample_rate * 2 and n != sample_rate * 5 and n != sample_rate * 10:
        raise ValueError(f"window length {n} not supported at {sample_rate} Hz")
    missing = np.isnan(x)
    n_missing = int(missing.sum())
    if n_missing:
        if n_missing > MAX_GAP_FRACTION * n:
            return None
        idx = np.arange(n)
        x = x.copy()
        x[missing] = np.interp(idx[missing], idx[~missing], x[~missing])
    x = x - x.mean()
    if hann:
        x = x * np.hanning(n)
    spec = np.fft.rfft(x)
    return (2.0 / n) * np.abs(spec[1 : n // 2 + 1])


def spectral_energy(amplitudes: np.ndarray, n_samples: int) -> float:
    """Mean-removed signal energy implied by a one-sided amplitude spectrum.

    With the 2/N amplitude scaling the exact identity is
    energy = N/2 * sum(a_k^2) over interior bins plus N/4 * a_{N/2}^2 at
    Nyquist; it is checked against the time-domain energy in tests.
    """
    interior = amplitudes[:-1]
    nyquist = amplitudes[-1]
    return float(n_samples / 2 * np.sum(interior**2) + n_samples / 4 * nyquist**2)


def frame_from_matrix(
    matrix: SeriesMatrix,
    start_tick: int,
    window: WindowSpec,
    pmu_ids: Optional[Sequence[str]] = None,
) -> SpectrumFrame:
    """Compute one SpectrumFrame from a window of a SeriesMatrix."""
    ids = tuple(pmu_ids) if pmu_ids is not None else matrix.pmu_ids
    n = window.n_samples
    if start_tick < matrix.start_tick or start_tick + n > matrix.end_tick:
        raise ValueError("window does not fit inside the matrix tick range")
    row0 = start_tick - matrix.start_tick

    n_bins = n // 2
    mags = np.zeros((len(ids), n_bins))
    valid = np.zeros(len(ids), dtype=bool)
    for i, pid in enumerate(ids):
        col = matrix.column(pid)[row0 : row0 + n]
        spec = compute_spectrum(col, hann=window.hann)
        if spec is not None:
            mags[i] = spec
            valid[i] = True

    f_bin = peak_pmu = peak_mag = None
    if valid.any():
        vmags = mags[valid]
        flat = int(np.argmax(vmags))
        peak = float(vmags.flat[flat])
        # Ties resolve to the lowest bin, then the lexicographically first PMU.
        rows, cols = np.where(vmags == peak)
        order = np.lexsort((np.array([ids[j] for j in np.where(valid)[0]])[rows], cols))
        r, c = rows[order[0]], cols[order[0]]
        f_bin = int(c) + 1
        peak_pmu = [ids[j] for j in np.where(valid)[0]][r]
        peak_mag = peak

    return SpectrumFrame(
        attribute=matrix.attribute,
        day=matrix.day,
        start_tick=start_tick,
        n_samples=n,
        pmu_ids=ids,
        mags=mags,
        valid=valid,
        f_star_bin=f_bin,
        f_star_hz=None if f_bin is None else f_bin * SAMPLE_RATE / n,
        peak_pmu=peak_pmu,
        peak_mag=peak_mag,
    )


def sliding_frames(
    matrix: SeriesMatrix,
    window: WindowSpec,
    pmu_ids: Optional[Sequence[str]] = None,
    t0_tick: Optional[int] = None,
    t1_tick: Optional[int] = None,
) -> list[SpectrumFrame]:
    """All frames at stride steps whose windows fit inside [t0, t1)."""
    t0 = matrix.start_tick if t0_tick is None else t0_tick
    t1 = matrix.end_tick if t1_tick is None else t1_tick
    frames = []
    start = t0
    while start + window.n_samples <= t1:
        frames.append(frame_from_matrix(matrix, start, window, pmu_ids))
        start += window.stride_ticks
    return frames


@dataclass(frozen=True)
class TimelineEntry:
    start_tick: int
    f_star_hz: Optional[float]
    peak_pmu: Optional[str]
    peak_mag: Optional[float]
    gap: bool


def main_frequency_timeline(
    matrix: SeriesMatrix,
    window: WindowSpec,
    pmu_ids: Optional[Sequence[str]] = None,
) -> list[TimelineEntry]:
    """Dominant frequency per stride step; windows with no valid PMU are gaps."""
    ids = tuple(pmu_ids) if pmu_ids is not None else matrix.pmu_ids
    if not ids:
        raise ValueError("pmu set must not be empty")
    out = []
    for fr in sliding_frames(matrix, window, ids):
        out.append(
            TimelineEntry(
                start_tick=fr.start_tick,
                f_star_hz=fr.f_star_hz,
                peak_pmu=fr.peak_pmu,
                peak_mag=fr.peak_mag,
                gap=not fr.is_valid,
            )
        )
    return out


def flag_pmus(
    frame: SpectrumFrame, threshold_pct: float
) -> list[tuple[str, float, int]]:
    """PMUs whose magnitude at f* reaches threshold_pct of the frame peak.

    Sorted descending by magnitude, ties by PMU id; rank is 1-based. At 100%
    only the argmax set is flagged. Returns [] when no PMU is valid.
    """
    if not 0 < threshold_pct <= 100:
        raise ValueError("threshold_pct must be in (0, 100]")
    if not frame.is_valid:
        return []
    cutoff = (threshold_pct / 100.0) * frame.peak_mag
    entries = []
    for i, pid in enumerate(frame.pmu_ids):
        if not frame.valid[i]:
            continue
        m = float(frame.mags[i, frame.f_star_bin - 1])
        if m >= cutoff:
            entries.append((pid, m))
    entries.sort(key=lambda e: (-e[1], e[0]))
    return [(pid, m, rank + 1) for rank, (pid, m) in enumerate(entries)]


def pearson(u: np.ndarray, v: np.ndarray) -> float:
    """Pearson r with flat vectors defined as carrying no signal (r = 0)."""
    du = u - u.mean()
    dv = v - v.mean()
    nu = float(np.sqrt(np.sum(du**2)))
    nv = float(np.sqrt(np.sum(dv**2)))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.sum(du * dv) / (nu * nv), -1.0, 1.0))


def correlation_to_reference(
    frame: SpectrumFrame, reference_pmu: str
) -> dict[str, float]:
    """Pearson correlation of each valid PMU's spectrum against a reference."""
    if reference_pmu not in frame.pmu_ids:
        raise GridPulseError(f"reference PMU {reference_pmu!r} not in frame")
    ridx = frame.pmu_ids.index(reference_pmu)
    if not frame.valid[ridx]:
        raise GridPulseError(f"reference PMU {reference_pmu!r} is invalid in frame")
    ref = frame.mags[ridx]
    out = {}
    for i, pid in enumerate(frame.pmu_ids):
        if frame.valid[i]:
            out[pid] = pearson(frame.mags[i], ref)
    return out

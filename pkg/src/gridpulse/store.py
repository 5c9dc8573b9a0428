"""Day-partitioned columnar storage for PMU samples.

One file holds one attribute for all PMUs for one day, split into 15-minute
row groups (27000 ticks each). Each row group stores one chunk per PMU:
a presence bitmap plus a DEFLATE-compressed payload of the present float64
values. Range reads decompress only the row groups and columns requested.

Byte layout (little-endian), see docs/day_file_format.md for the full map:

    magic   b"PMUC1"
    u32     header length
    bytes   header JSON
    bytes   row-group chunk data (bitmap then payload per column, in order)
    bytes   footer JSON
    u32     footer length
    magic   b"PMUC1"

The footer records per-row-group byte offsets, per-chunk offsets/lengths and
CRCs, and a CRC of the header so a truncated or mixed-up file is rejected
before any chunk is trusted. Writers publish atomically via rename.
"""

from __future__ import annotations

import json
import os
import zlib
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import FormatError, IntegrityError, RangeError, UnknownIdentifierError
from .model import SAMPLE_RATE, TICKS_PER_DAY, SeriesMatrix

MAGIC = b"PMUC1"
TICKS_PER_GROUP = 15 * 60 * SAMPLE_RATE  # 27000
GROUPS_PER_DAY = TICKS_PER_DAY // TICKS_PER_GROUP  # 96
FORMAT_VERSION = 1


@dataclass
class ReadStats:
    """Per-query observability counters."""

    row_groups_touched: int = 0
    bytes_read: int = 0
    columns_decoded: int = 0


@dataclass(frozen=True)
class _Chunk:
    offset: int
    bitmap_len: int
    payload_len: int
    crc: int
    n_present: int


@dataclass(frozen=True)
class _Group:
    tick_start: int
    tick_end: int
    offset: int
    chunks: tuple[_Chunk, ...]


def day_file_name(attribute: str, day: date) -> str:
    return f"{attribute}_{day.isoformat()}.pmuc"


def _compress(raw: bytes, level: int) -> bytes:
    return zlib.compress(raw, level)


def _bitmap(mask: np.ndarray) -> bytes:
    return np.packbits(mask.astype(np.uint8), bitorder="little").tobytes()


def _unpack_bitmap(raw: bytes, n_rows: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return bits[:n_rows].astype(bool)


def write_day(
    attribute: str,
    day: date,
    matrix: SeriesMatrix,
    out_dir: str | Path,
    dense: bool = False,
    compression_level: int = 6,
) -> Path:
    """Write one attribute-day file; returns the published path.

    The matrix must cover ticks [0, 2592000) or a prefix starting at tick 0.
    Without ``dense`` the day is padded with nulls to the full 96 groups;
    with it, only ``ceil(end_tick / 27000)`` groups are written and the count
    is recorded in the header.
    """
    if matrix.attribute != attribute:
        raise FormatError(
            f"matrix attribute {matrix.attribute!r} does not match {attribute!r}"
        )
    if matrix.day != day:
        raise FormatError("matrix day does not match requested day")
    if matrix.start_tick != 0:
        raise FormatError("day files cover a prefix of the day; start_tick must be 0")

    day_ticks = matrix.end_tick if dense else TICKS_PER_DAY
    n_groups = -(-day_ticks // TICKS_PER_GROUP)

    header = {
        "version": FORMAT_VERSION,
        "attribute": attribute,
        "date": day.isoformat(),
        "pmu_ids": list(matrix.pmu_ids),
        "sample_rate": SAMPLE_RATE,
        "ticks_per_group": TICKS_PER_GROUP,
        "row_group_count": n_groups,
        "day_ticks": day_ticks,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    final_path = out_dir / day_file_name(attribute, day)
    tmp_path = out_dir / (final_path.name + ".tmp")

    values = matrix.values
    n_cols = len(matrix.pmu_ids)

    groups = []
    with open(tmp_path, "wb") as f:
        f.write(MAGIC)
        f.write(len(header_bytes).to_bytes(4, "little"))
        f.write(header_bytes)
        pos = f.tell()

        for g in range(n_groups):
            t0 = g * TICKS_PER_GROUP
            t1 = min((g + 1) * TICKS_PER_GROUP, day_ticks)
            rows = t1 - t0
            group_offset = pos
            chunks = []
            for c in range(n_cols):
                if t0 < matrix.end_tick:
                    col = values[t0 : min(t1, matrix.end_tick), c]
                    if len(col) < rows:
                        col = np.concatenate([col, np.full(rows - len(col), np.nan)])
                else:
                    col = np.full(rows, np.nan)
                present = ~np.isnan(col)
                bitmap_comp = _compress(_bitmap(present), compression_level)
                payload_comp = _compress(
                    col[present].astype(np.float64).tobytes(), compression_level
                )
                crc = zlib.crc32(bitmap_comp + payload_comp)
                f.write(bitmap_comp)
                f.write(payload_comp)
                chunks.append(
                    {
                        "offset": pos,
                        "bitmap_len": len(bitmap_comp),
                        "payload_len": len(payload_comp),
                        "crc": crc,
                        "n_present": int(present.sum()),
                    }
                )
                pos += len(bitmap_comp) + len(payload_comp)
            groups.append(
                {
                    "tick_start": t0,
                    "tick_end": t1,
                    "offset": group_offset,
                    "chunks": chunks,
                }
            )

        footer = {
            "groups": groups,
            "header_crc": zlib.crc32(header_bytes),
        }
        footer_bytes = json.dumps(footer, sort_keys=True).encode()
        f.write(footer_bytes)
        f.write(len(footer_bytes).to_bytes(4, "little"))
        f.write(MAGIC)

    os.replace(tmp_path, final_path)
    return final_path


class DayFile:
    """Read handle for one attribute-day file.

    Opening parses only the header and footer; chunk data is read and
    decompressed on demand. One DayFile may serve many concurrent readers as
    long as each query uses its own ``read_range`` call (a private file
    descriptor is opened per call).
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        with open(self.path, "rb") as f:
            magic = f.read(5)
            if magic != MAGIC:
                raise FormatError(f"{self.path}: bad magic")
            header_len = int.from_bytes(f.read(4), "little")
            header_bytes = f.read(header_len)
            try:
                self.header = json.loads(header_bytes)
            except json.JSONDecodeError as e:
                raise FormatError(f"{self.path}: unreadable header") from e

            f.seek(-9, os.SEEK_END)
            trailer = f.read(9)
            if trailer[4:] != MAGIC:
                raise FormatError(f"{self.path}: bad trailer magic")
            footer_len = int.from_bytes(trailer[:4], "little")
            f.seek(-(9 + footer_len), os.SEEK_END)
            try:
                footer = json.loads(f.read(footer_len))
            except json.JSONDecodeError as e:
                raise FormatError(f"{self.path}: unreadable footer") from e

        if footer.get("header_crc") != zlib.crc32(header_bytes):
            raise IntegrityError(f"{self.path}: header checksum mismatch")

        self.pmu_ids: tuple[str, ...] = tuple(self.header["pmu_ids"])
        self.day: date = date.fromisoformat(self.header["date"])
        self.attribute: str = self.header["attribute"]
        self.day_ticks: int = self.header["day_ticks"]
        self._col_index = {p: i for i, p in enumerate(self.pmu_ids)}

        groups = []
        prev_offset = -1
        for g in footer["groups"]:
            if g["offset"] <= prev_offset:
                raise FormatError(f"{self.path}: row-group offsets not increasing")
            prev_offset = g["offset"]
            groups.append(
                _Group(
                    tick_start=g["tick_start"],
                    tick_end=g["tick_end"],
                    offset=g["offset"],
                    chunks=tuple(
                        _Chunk(
                            offset=c["offset"],
                            bitmap_len=c["bitmap_len"],
                            payload_len=c["payload_len"],
                            crc=c["crc"],
                            n_present=c["n_present"],
                        )
                        for c in g["chunks"]
                    ),
                )
            )
        self._groups: tuple[_Group, ...] = tuple(groups)
        if len(self._groups) != self.header["row_group_count"]:
            raise FormatError(f"{self.path}: group count mismatch")

    def read_range(
        self,
        pmu_ids: Sequence[str],
        t0_tick: int,
        t1_tick: int,
        stats: Optional[ReadStats] = None,
    ) -> tuple[SeriesMatrix, ReadStats]:
        """Read [t0, t1) for the requested columns only.

        Touches exactly the row groups overlapping the range and decompresses
        only the requested columns; counters land in ``stats``.
        """
        if stats is None:
            stats = ReadStats()
        if not 0 <= t0_tick < t1_tick <= self.day_ticks:
            raise RangeError(
                f"tick range [{t0_tick}, {t1_tick}) outside stored [0, {self.day_ticks})"
            )
        cols = []
        for p in pmu_ids:
            if p not in self._col_index:
                raise UnknownIdentifierError(f"PMU {p!r} not in {self.path.name}")
            cols.append(self._col_index[p])

        g0 = t0_tick // TICKS_PER_GROUP
        g1 = (t1_tick - 1) // TICKS_PER_GROUP
        rows = t1_tick - t0_tick
        out = np.full((rows, len(cols)), np.nan)

        with open(self.path, "rb") as f:
            for g in range(g0, g1 + 1):
                grp = self._groups[g]
                stats.row_groups_touched += 1
                grows = grp.tick_end - grp.tick_start
                for oj, c in enumerate(cols):
                    ch = grp.chunks[c]
                    f.seek(ch.offset)
                    raw = f.read(ch.bitmap_len + ch.payload_len)
                    stats.bytes_read += len(raw)
                    if zlib.crc32(raw) != ch.crc:
                        raise IntegrityError(
                            f"{self.path.name}: chunk checksum mismatch "
                            f"(group {g}, column {c})"
                        )
                    present = _unpack_bitmap(
                        zlib.decompress(raw[: ch.bitmap_len]), grows
                    )
                    payload = np.frombuffer(
                        zlib.decompress(raw[ch.bitmap_len :]), dtype=np.float64
                    )
                    if len(payload) != ch.n_present:
                        raise IntegrityError(
                            f"{self.path.name}: payload length mismatch"
                        )
                    col = np.full(grows, np.nan)
                    col[present] = payload
                    lo = max(t0_tick, grp.tick_start)
                    hi = min(t1_tick, grp.tick_end)
                    out[lo - t0_tick : hi - t0_tick, oj] = col[
                        lo - grp.tick_start : hi - grp.tick_start
                    ]
        stats.columns_decoded += len(cols)

        matrix = SeriesMatrix(
            attribute=self.attribute,
            day=self.day,
            start_tick=t0_tick,
            end_tick=t1_tick,
            pmu_ids=tuple(pmu_ids),
            values=out,
        )
        return matrix, stats

    def describe(self) -> dict:
        """Header plus per-group compressed sizes, for `inspect --stats`."""
        sizes = []
        for grp in self._groups:
            sizes.append(
                sum(c.bitmap_len + c.payload_len for c in grp.chunks)
            )
        return {
            "path": str(self.path),
            "header": self.header,
            "group_compressed_bytes": sizes,
            "total_compressed_bytes": sum(sizes),
        }


class DayStore:
    """Directory of day files addressed by (attribute, date)."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._open: dict[tuple[str, str], DayFile] = {}

    def path_for(self, attribute: str, day: date) -> Path:
        return self.root / day_file_name(attribute, day)

    def available(self) -> list[tuple[str, date]]:
        out = []
        if not self.root.is_dir():
            return out
        for p in sorted(self.root.glob("*.pmuc")):
            stem = p.name[: -len(".pmuc")]
            attr, _, day_s = stem.partition("_")
            try:
                out.append((attr, date.fromisoformat(day_s)))
            except ValueError:
                continue
        return out

    def open(self, attribute: str, day: date) -> DayFile:
        key = (attribute, day.isoformat())
        if key not in self._open:
            path = self.path_for(attribute, day)
            if not path.exists():
                raise UnknownIdentifierError(
                    f"no day file for attribute {attribute!r} on {day.isoformat()}"
                )
            self._open[key] = DayFile(path)
        return self._open[key]

    def write(self, matrix: SeriesMatrix, dense: bool = False, level: int = 6) -> Path:
        path = write_day(
            matrix.attribute, matrix.day, matrix, self.root, dense=dense,
            compression_level=level,
        )
        self._open.pop((matrix.attribute, matrix.day.isoformat()), None)
        return path

    def read_range(
        self,
        attribute: str,
        day: date,
        pmu_ids: Sequence[str],
        t0_tick: int,
        t1_tick: int,
    ) -> tuple[SeriesMatrix, ReadStats]:
        return self.open(attribute, day).read_range(pmu_ids, t0_tick, t1_tick)

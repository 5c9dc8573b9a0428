"""Link unstructured operator report text to epicenter PMUs.

Matching is plain pattern extraction, in precedence order: explicit PMU id
references win over substation-name mentions, which expand to every PMU at
that substation. Timestamps are accepted as ISO-8601 or the operator-log
form ``HH:MM:SS, M/D/YYYY``; an oscillation frequency is read from a
``<number> Hz`` token. No semantic parsing is attempted.
"""

from __future__ import annotations

import re
from datetime import datetime
from pathlib import Path
from typing import Iterable

from .model import EventRecord, GridTopology

PMU_ID_RE = re.compile(r"\bPMU\s*#?\s*(\d+)", re.IGNORECASE)
FREQ_RE = re.compile(r"(\d+(?:\.\d+)?)\s*Hz\b", re.IGNORECASE)
ISO_TS_RE = re.compile(
    r"\b(\d{4}-\d{2}-\d{2}[T ]\d{2}:\d{2}:\d{2}(?:\.\d+)?)\b"
)
CLOCK_TS_RE = re.compile(r"\b(\d{1,2}:\d{2}:\d{2}),\s*(\d{1,2}/\d{1,2}/\d{4})\b")


def _parse_timestamps(text: str) -> list[datetime]:
    out = []
    for m in ISO_TS_RE.finditer(text):
        try:
            out.append(datetime.fromisoformat(m.group(1).replace(" ", "T")))
        except ValueError:
            continue
    for m in CLOCK_TS_RE.finditer(text):
        try:
            out.append(datetime.strptime(f"{m.group(2)} {m.group(1)}", "%m/%d/%Y %H:%M:%S"))
        except ValueError:
            continue
    return sorted(out)


def _classify(text: str, freq: float | None) -> str:
    lowered = text.lower()
    if "transient" in lowered:
        return "transient"
    if freq is not None and freq > 0 and "oscillation" in lowered:
        return "forced"
    return "unknown"


def link_report(text: str, topology: GridTopology, report_id: str = "report") -> EventRecord:
    """Build an EventRecord from one report's text.

    PMU-id matches take precedence; otherwise whole-word substation names
    expand to the PMUs they host. Reports with neither produce an unlinked
    record; a missing timestamp yields an unknown-time record with a warning.
    """
    warnings: list[str] = []

    pmu_ids: list[str] = []
    for m in PMU_ID_RE.finditer(text):
        pid = m.group(1)
        if topology.has_pmu(pid) and pid not in pmu_ids:
            pmu_ids.append(pid)

    if not pmu_ids:
        for sub in topology.substations:
            if re.search(rf"\b{re.escape(sub.name)}\b", text, re.IGNORECASE):
                for p in topology.pmus_at_substation(sub.id):
                    if p.id not in pmu_ids:
                        pmu_ids.append(p.id)

    freq_m = FREQ_RE.search(text)
    freq = float(freq_m.group(1)) if freq_m else None
    if freq is not None and freq <= 0:
        freq = None

    stamps = _parse_timestamps(text)
    if stamps:
        t_start, t_end = stamps[0], stamps[-1]
    else:
        t_start = t_end = datetime(1970, 1, 1)
        warnings.append("no timestamp found; time unknown")

    if not pmu_ids:
        warnings.append("no PMU or substation association found")

    kind = _classify(text, freq)
    return EventRecord(
        id=report_id,
        t_start=t_start,
        t_end=t_end,
        oscillation_hz=freq,
        epicenter_pmus=tuple(sorted(pmu_ids)),
        kind=kind,
        provenance="report_text",
        warnings=tuple(warnings),
    )


def link_report_files(paths: Iterable[str | Path], topology: GridTopology) -> list[EventRecord]:
    records = []
    for p in sorted(Path(x) for x in paths):
        records.append(link_report(p.read_text(), topology, report_id=p.stem))
    return records

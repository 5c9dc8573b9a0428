"""Command-line entry points.

`generate` builds a seeded synthetic data directory (topology, day files,
ground truth, events, reports); `serve` exposes it over HTTP; the analysis
commands run the same engine code paths as the service and print JSON.
"""

from __future__ import annotations

import json
from datetime import date, timedelta
from pathlib import Path

import click
import numpy as np

from . import synthgen
from .model import GridTopology, SeriesMatrix
from .reports import link_report_files
from .service import AnalyzeRequest, DendrogramRequest, Engine, ServiceConfig, canonical_json
from .store import DayFile, DayStore


@click.group()
def main():
    """Oscillation localization and tracing over synchrophasor data."""


@main.command()
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--substations", type=int, default=10, show_default=True)
@click.option("--days", type=int, default=1, show_default=True)
@click.option("--duration-s", type=float, default=120.0, show_default=True,
              help="Seconds of data per day (dense day files).")
@click.option("--coverage", type=float, default=1.0, show_default=True,
              help="Fraction of buses hosting a PMU.")
@click.option("--noise", type=float, default=0.004, show_default=True)
@click.option("--reports", "n_reports", type=int, default=20, show_default=True,
              help="Synthetic report corpus size.")
@click.option("--out", type=click.Path(path_type=Path), required=True)
def generate(seed, substations, days, duration_s, coverage, noise, n_reports, out):
    """Generate a reproducible synthetic data directory."""
    topology = synthgen.generate_topology(
        seed, substations, buses_per_substation=(2, 3), pmu_coverage=coverage
    )
    out.mkdir(parents=True, exist_ok=True)
    topology.save(out / "topology.json")

    store = DayStore(out / "store")
    rng = np.random.default_rng(seed ^ 0xD0)
    all_events = []
    truths = []
    base_day = date(2017, 4, 20)
    for d in range(days):
        day = base_day + timedelta(days=d)
        events = [
            synthgen.EventSpec(
                kind="forced",
                source_bus=synthgen.pick_source_bus(topology, rng),
                f0_hz=round(float(rng.uniform(0.5, 3.0)) * 2) / 2,
                amplitude=0.02,
                t_start_s=10.0,
                duration_s=duration_s * 0.75,
            )
        ]
        if d % 2 == 1:
            events.append(
                synthgen.EventSpec(
                    kind="transient",
                    source_bus=synthgen.pick_source_bus(topology, rng),
                    f0_hz=1.5,
                    amplitude=0.05,
                    t_start_s=duration_s * 0.5,
                    duration_s=4.0,
                    decay_tau_s=0.5,
                )
            )
        scenario = synthgen.ScenarioSpec(
            seed=seed + d,
            n_substations=substations,
            events=tuple(events),
            noise_sigma=noise,
            day=day,
            duration_s=duration_s,
        )
        matrices, truth, records = synthgen.simulate(topology, scenario)
        for m in matrices.values():
            store.write(m, dense=True)
        all_events.extend(records)
        truths.append({"day": day.isoformat(), **truth.to_dict()})
        click.echo(f"wrote {len(matrices)} attribute files for {day.isoformat()}")

    (out / "events.json").write_text(
        json.dumps([e.to_dict() for e in all_events], indent=2, sort_keys=True)
    )
    (out / "ground_truth.json").write_text(json.dumps(truths, indent=2, sort_keys=True))

    reports_dir = out / "reports"
    reports_dir.mkdir(exist_ok=True)
    for rid, text, _expected in synthgen.make_report_corpus(
        topology, seed, n_reports=n_reports, day=base_day
    ):
        (reports_dir / f"{rid}.txt").write_text(text)
    click.echo(f"wrote {n_reports} reports, {len(all_events)} events -> {out}")


@main.command()
@click.option("--data", type=click.Path(path_type=Path), required=True)
@click.option("--attr", "attribute", required=True)
@click.option("--date", "day_s", required=True, help="ISO date, e.g. 2017-04-20")
@click.option("--dense", is_flag=True, help="Store only the covered row groups.")
@click.argument("csv_path", type=click.Path(path_type=Path, exists=True))
def ingest(data, attribute, day_s, dense, csv_path):
    """Ingest a CSV (header: tick,<pmu>,<pmu>,...; empty cell = null)."""
    day = date.fromisoformat(day_s)
    lines = csv_path.read_text().strip().splitlines()
    header = lines[0].split(",")
    if header[0] != "tick":
        raise click.UsageError("first CSV column must be 'tick'")
    pmu_ids = tuple(header[1:])
    rows = []
    ticks = []
    for line in lines[1:]:
        parts = line.split(",")
        ticks.append(int(parts[0]))
        rows.append([float(v) if v != "" else np.nan for v in parts[1:]])
    if ticks != list(range(ticks[0], ticks[0] + len(ticks))) or ticks[0] != 0:
        raise click.UsageError("ticks must be contiguous from 0")
    matrix = SeriesMatrix(
        attribute=attribute,
        day=day,
        start_tick=0,
        end_tick=len(ticks),
        pmu_ids=pmu_ids,
        values=np.array(rows, dtype=np.float64),
    )
    path = DayStore(data / "store").write(matrix, dense=dense)
    click.echo(f"wrote {path}")


@main.command()
@click.option("--stats", is_flag=True, help="Include per-group compressed sizes.")
@click.argument("path", type=click.Path(path_type=Path, exists=True))
def inspect(stats, path):
    """Print a day file's header (and optionally size stats)."""
    f = DayFile(path)
    info = f.describe()
    if not stats:
        info.pop("group_compressed_bytes")
    click.echo(json.dumps(info, indent=2, sort_keys=True))


def _engine(data: Path) -> Engine:
    return Engine(ServiceConfig(data_dir=data))


@main.command()
@click.option("--data", type=click.Path(path_type=Path), required=True)
@click.option("--event", "event_id", default=None, help="Analyze a stored event's range.")
@click.option("--from", "from_s", default=None)
@click.option("--to", "to_s", default=None)
@click.option("--window", type=click.Choice(["2", "5", "10"]), default="2")
@click.option("--attr", "attribute", default="VPm", show_default=True)
@click.option("--threshold", type=float, default=100.0, show_default=True)
@click.option("--pmus", default=None, help="Comma-separated PMU ids (default: all).")
def analyze(data, event_id, from_s, to_s, window, attribute, threshold, pmus):
    """Run sliding-window analysis; emits one JSON frame per line."""
    engine = _engine(data)
    if event_id is not None:
        match = [e for e in engine.events if e.id == event_id]
        if not match:
            raise click.UsageError(f"unknown event {event_id!r}")
        from_s = match[0].t_start.isoformat()
        to_s = match[0].t_end.isoformat()
    if from_s is None or to_s is None:
        raise click.UsageError("pass --event or both --from and --to")
    req = AnalyzeRequest(
        **{"from": from_s, "to": to_s},
        window_s=int(window),
        attribute=attribute,
        threshold_pct=threshold,
        pmu_ids=pmus.split(",") if pmus else None,
    )
    payload = engine.analyze_payload(req)
    meta = {"params": payload["params"], "bins_hz": payload["bins_hz"]}
    click.echo(json.dumps(meta, sort_keys=True))
    for frame in payload["frames"]:
        click.echo(json.dumps(frame, sort_keys=True))


@main.command()
@click.option("--data", type=click.Path(path_type=Path), required=True)
@click.option("--epicenter", required=True, help="Comma-separated epicenter PMU ids.")
@click.option("--select", "selected", required=True, help="Comma-separated PMU ids.")
@click.option("--at", "at_s", required=True, help="Window start timestamp (ISO).")
@click.option("--window", type=click.Choice(["2", "5", "10"]), default="2")
@click.option("--attr", "attribute", default="VPm", show_default=True)
@click.option("--k", type=int, default=None, help="Clusters per hop (default: auto).")
def dendrogram(data, epicenter, selected, at_s, window, attribute, k):
    """Build the epicentric cluster dendrogram for one window."""
    engine = _engine(data)
    req = DendrogramRequest(
        epicenter_ids=epicenter.split(","),
        selected_ids=selected.split(","),
        at=at_s,
        window_s=int(window),
        attribute=attribute,
        k=k,
    )
    click.echo(canonical_json(engine.dendrogram_payload(req)).decode())


@main.command("link-reports")
@click.option("--data", type=click.Path(path_type=Path), required=True)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Write events JSON here instead of stdout.")
def link_reports(data, out):
    """Link report text files in DATA/reports to PMUs; emit events JSON."""
    topology = GridTopology.load(data / "topology.json")
    paths = sorted((data / "reports").glob("*.txt"))
    records = link_report_files(paths, topology)
    text = json.dumps([r.to_dict() for r in records], indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {len(records)} events -> {out}")
    else:
        click.echo(text)


@main.command()
@click.option("--data", type=click.Path(path_type=Path), default=None,
              help="Data directory (falls back to GRIDPULSE_DATA).")
@click.option("--port", type=int, default=None)
@click.option("--cache-size", type=int, default=None)
@click.option("--config", "config_file", type=click.Path(exists=True), default=None,
              help="key=value config file.")
def serve(data, port, cache_size, config_file):
    """Serve the analysis API over HTTP."""
    import uvicorn

    from .service import create_app

    cfg = ServiceConfig.from_sources(
        data_dir=str(data) if data else None,
        config_file=config_file,
        port=port,
        cache_size=cache_size,
    )
    uvicorn.run(create_app(cfg), host="127.0.0.1", port=cfg.port)


if __name__ == "__main__":
    main()

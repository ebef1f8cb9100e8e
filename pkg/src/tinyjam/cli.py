"""Command-line front door: validate, render, analyze, generate, serve."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import analytics, corpus, synth, trace
from .audio import DEFAULT_SAMPLE_RATE, write_wav
from .model import (
    CsvHeaderError,
    CsvParseError,
    InvalidPerformanceError,
    parse_events_csv,
    performance_from_events,
    validate_events,
)

_TABLE_ROWS = ("mean", "std", "min", "q25", "q50", "q75", "max")
_TABLE_ROW_LABELS = {"q25": "25%", "q50": "50%", "q75": "75%"}


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load_events(path: Path):
    try:
        return parse_events_csv(path.read_text(encoding="utf-8"))
    except (CsvHeaderError, CsvParseError) as exc:
        _fail(f"{path}: {exc}")


@click.group()
def main() -> None:
    """Tools for five-second single-touch performances."""


@main.command("validate")
@click.argument("perf_csv", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def validate_cmd(perf_csv: Path) -> None:
    """Check a performance CSV against the format constraints."""
    events = _load_events(perf_csv)
    violations = validate_events(events)
    if violations:
        for v in violations:
            click.echo(str(v), err=True)
        sys.exit(1)
    click.echo(f"{perf_csv}: valid ({len(events)} events)")


@main.command("render-audio")
@click.argument("perf_csv", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--instrument", default="chirp", show_default=True)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--sample-rate", default=DEFAULT_SAMPLE_RATE, show_default=True)
def render_audio_cmd(perf_csv: Path, instrument: str, output: Path, sample_rate: int) -> None:
    """Render a performance CSV to a WAV file."""
    events = _load_events(perf_csv)
    perf = performance_from_events(events, instrument=instrument)
    try:
        buf = synth.render(perf, sample_rate)
    except InvalidPerformanceError as exc:
        for v in exc.violations:
            click.echo(str(v), err=True)
        sys.exit(1)
    write_wav(buf, output)
    click.echo(f"wrote {output} ({buf.duration:.1f}s @ {sample_rate} Hz)")


@main.command("render-trace")
@click.argument("perf_csv", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--size", default=300, show_default=True)
@click.option("--per-swipe", is_flag=True, help="Cycle a color per gesture.")
def render_trace_cmd(perf_csv: Path, output: Path, size: int, per_swipe: bool) -> None:
    """Render a performance CSV to a PNG trace image."""
    events = _load_events(perf_csv)
    perf = performance_from_events(events)
    try:
        image = trace.render_trace(perf, size, "per-swipe" if per_swipe else "single")
    except ValueError as exc:
        _fail(str(exc))
    trace.write_png(image, output)
    click.echo(f"wrote {output}")


def _write_swipe_table(report: analytics.CorpusReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["statistic", *analytics.SWIPE_MEASUREMENTS])
        for row in _TABLE_ROWS:
            label = _TABLE_ROW_LABELS.get(row, row)
            values = [
                f"{report.swipe_table[col][row]:.4f}" if report.swipe_table else ""
                for col in analytics.SWIPE_MEASUREMENTS
            ]
            writer.writerow([label, *values])


def _write_curves(report_swipes, path: Path, seed: int, per_quartile: int = 20, n_points: int = 50) -> None:
    quartiles = analytics.sample_swipes_by_quartile(report_swipes, per_quartile, seed)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["quartile", "swipe", *[f"u{i}" for i in range(n_points)]])
        for q, bucket in enumerate(quartiles, start=1):
            for s, swipe in enumerate(bucket):
                try:
                    curve = analytics.velocity_curve(swipe, n_points)
                except ValueError:
                    continue
                writer.writerow([q, s, *[f"{v:.5f}" for v in curve]])


@main.command("analyze")
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.option("--heatmap", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--kde-csv", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--swipe-table", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--curves", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--seed", default=42, show_default=True)
@click.option("--kde-resolution", default=100, show_default=True)
def analyze_cmd(
    corpus_dir: Path,
    output: Path,
    heatmap: Path | None,
    kde_csv: Path | None,
    swipe_table: Path | None,
    curves: Path | None,
    seed: int,
    kde_resolution: int,
) -> None:
    """Aggregate a corpus directory into a JSON report (plus optional artifacts)."""
    try:
        perfs = corpus.load_corpus(corpus_dir)
    except corpus.CorpusLoadError as exc:
        _fail(str(exc))
    report = analytics.build_report(perfs, kde_resolution=kde_resolution)
    output.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    click.echo(
        f"{report.n_performances} performances, {report.n_events} events, "
        f"{report.swipe_counts.get('valid', 0)} valid swipes -> {output}"
    )
    if heatmap is not None:
        if report.kde is None:
            click.echo("no events; skipping heatmap", err=True)
        else:
            trace.write_png(trace.render_heatmap(report.kde), heatmap)
            click.echo(f"wrote {heatmap}")
    if kde_csv is not None:
        if report.kde is None:
            click.echo("no events; skipping KDE matrix", err=True)
        else:
            with open(kde_csv, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                for row in report.kde.densities:
                    writer.writerow([f"{v:.8g}" for v in row])
            click.echo(f"wrote {kde_csv}")
    if swipe_table is not None:
        _write_swipe_table(report, swipe_table)
        click.echo(f"wrote {swipe_table}")
    if curves is not None:
        swipes = [
            g
            for perf in perfs
            for g in analytics.segment(perf)
            if g.kind == "swipe" and g.events[-1].time - g.events[0].time <= 5.0
        ]
        if len(swipes) < 4:
            click.echo("fewer than 4 swipes; skipping curves", err=True)
        else:
            _write_curves(swipes, curves, seed)
            click.echo(f"wrote {curves}")


@main.command("gen-corpus")
@click.option("-n", "--count", default=1000, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--reply-fraction", default=0.29, show_default=True)
@click.option("-o", "--output", required=True, type=click.Path(file_okay=False, path_type=Path))
def gen_corpus_cmd(count: int, seed: int, reply_fraction: float, output: Path) -> None:
    """Write a seeded synthetic corpus as a store directory."""
    if output.exists() and any(output.iterdir()):
        _fail(f"{output} exists and is not empty")
    perfs = corpus.generate_corpus(count, seed, reply_fraction)
    corpus.write_corpus(perfs, output)
    click.echo(f"wrote {count} performances to {output}")


@main.command("serve")
@click.option("--port", envvar="JAM_PORT", default=8080, show_default=True)
@click.option(
    "--store-dir",
    envvar="JAM_STORE",
    required=True,
    type=click.Path(file_okay=False, path_type=Path),
)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve_cmd(port: int, store_dir: Path, host: str) -> None:
    """Run the HTTP API server."""
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(store_dir), host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()

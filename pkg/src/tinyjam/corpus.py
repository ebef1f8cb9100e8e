"""Synthetic corpus generation and corpus-directory loading.

The generator produces seeded, reproducible performances whose gesture
mix roughly matches observed usage (mostly short swipes with a median
duration near 0.13 s and an upper quartile near 0.54 s, moved-event
spacing near 17 ms, tap gaps near 0.22 s, a reply share near 29%). The
match is approximate by design; it exists so analytics output on a
desk-scale corpus is sanity-comparable to real data.

A corpus directory is either a store layout (``perfs/<id>/`` holding
``meta.json`` + ``events.csv``) or a flat tree of ``<name>.csv`` files
with optional ``<name>.json`` sidecars.
"""

from __future__ import annotations

import json
import math
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import (
    CsvHeaderError,
    CsvParseError,
    MetadataError,
    TinyPerformance,
    TouchEvent,
    isoformat_utc,
    parse_events_csv,
    performance_from_metadata,
)
from .store import JamStore

__all__ = [
    "CorpusLoadError",
    "load_corpus",
    "generate_performance",
    "generate_corpus",
    "write_corpus",
]

_INSTRUMENT_WEIGHTS = {
    "chirp": 342,
    "drums": 205,
    "keys": 210,
    "quack": 200,
    "strings": 205,
    "wub": 200,
    "fmlead": 90,
    "pad": 95,
}

_STYLES = ("taps", "swipes", "long-swipe", "mixture")
_STYLE_WEIGHTS = (0.20, 0.45, 0.10, 0.25)

_WINDOW_S = 5.0
_MAX_EVENTS = 380


class CorpusLoadError(ValueError):
    """A corpus directory or file could not be read."""


def _quantize(value: float) -> float:
    return float(f"{value:.6f}")


def load_corpus(path: str | Path) -> list[TinyPerformance]:
    """Read every performance under ``path`` (store layout or flat tree)."""
    root = Path(path)
    if not root.is_dir():
        raise CorpusLoadError(f"{root} is not a directory")
    if (root / "perfs").is_dir():
        pairs = [
            (d / "events.csv", d / "meta.json")
            for d in sorted((root / "perfs").iterdir())
            if d.is_dir()
        ]
    else:
        pairs = []
        for csv_path in sorted(root.rglob("*.csv")):
            if csv_path.name == "events.csv":
                sidecar = csv_path.parent / "meta.json"
            else:
                sidecar = csv_path.with_suffix(".json")
            pairs.append((csv_path, sidecar))

    out: list[TinyPerformance] = []
    for csv_path, meta_path in pairs:
        try:
            events = parse_events_csv(csv_path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise CorpusLoadError(f"{csv_path}: {exc}") from exc
        except (CsvHeaderError, CsvParseError) as exc:
            raise CorpusLoadError(f"{csv_path}: {exc}") from exc
        if meta_path.exists():
            try:
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
                out.append(performance_from_metadata(meta, events))
            except (json.JSONDecodeError, MetadataError) as exc:
                raise CorpusLoadError(f"{meta_path}: {exc}") from exc
        else:
            out.append(
                TinyPerformance(
                    id=csv_path.stem,
                    performer="",
                    instrument="unknown",
                    date=datetime(1970, 1, 1, tzinfo=timezone.utc),
                    parent_id=None,
                    events=events,
                )
            )
    return out


def _random_swipe(
    rng: np.random.Generator,
    t_start: float,
    x: float,
    y: float,
    z: float,
    max_duration: float,
) -> list[TouchEvent]:
    duration = float(np.exp(rng.normal(math.log(0.13), 1.6)))
    duration = min(max(duration, 0.02), max_duration)
    n_moves = max(1, int(round(duration / rng.uniform(0.015, 0.020))))
    n_moves = min(n_moves, _MAX_EVENTS // 2)
    steps = rng.uniform(0.85, 1.15, n_moves)
    steps *= duration / steps.sum()

    events = [TouchEvent(_quantize(t_start), _quantize(x), _quantize(y), z, 0)]
    heading = rng.uniform(0.0, 2.0 * math.pi)
    t = t_start
    for dt in steps:
        t += dt
        heading += rng.normal(0.0, 0.35)
        speed = float(np.exp(rng.normal(math.log(0.9), 0.8)))
        step = min(speed, 20.0) * dt
        x += step * math.cos(heading)
        y += step * math.sin(heading)
        if not 0.0 <= x <= 1.0:
            x = min(max(x, 0.0), 1.0)
            heading = math.pi - heading
        if not 0.0 <= y <= 1.0:
            y = min(max(y, 0.0), 1.0)
            heading = -heading
        qt = _quantize(min(t, _WINDOW_S))
        if qt <= events[-1].time:
            continue
        events.append(TouchEvent(qt, _quantize(x), _quantize(y), z, 1))
    return events


def generate_performance(
    rng: np.random.Generator,
    perf_id: str = "",
    performer: str = "",
    date: datetime | None = None,
    parent_id: str | None = None,
    instrument: str | None = None,
) -> TinyPerformance:
    """One random valid performance drawn from the corpus distributions."""
    if instrument is None:
        names = sorted(_INSTRUMENT_WEIGHTS)
        weights = np.array([_INSTRUMENT_WEIGHTS[n] for n in names], dtype=float)
        instrument = str(rng.choice(names, p=weights / weights.sum()))
    if date is None:
        date = datetime(2020, 1, 1, tzinfo=timezone.utc)
    style = str(rng.choice(_STYLES, p=np.array(_STYLE_WEIGHTS)))

    events: list[TouchEvent] = []
    z = _quantize(rng.uniform(15.0, 60.0))
    x = rng.uniform(0.05, 0.95)
    y = rng.uniform(0.05, 0.95)

    if style == "long-swipe":
        t0 = rng.uniform(0.0, 0.1)
        events = _random_swipe(rng, t0, x, y, z, max_duration=rng.uniform(4.2, _WINDOW_S - t0))
        # force the duration up; _random_swipe may have drawn a short one
        if events[-1].time - events[0].time < 4.0:
            events = _random_swipe(rng, t0, x, y, z, max_duration=4.5)
        return TinyPerformance(perf_id, performer, instrument, date, parent_id, tuple(events))

    t = rng.uniform(0.0, 0.3)
    budget = rng.uniform(2.0, _WINDOW_S)
    while t < budget and len(events) < _MAX_EVENTS:
        x = rng.uniform(0.05, 0.95) if rng.random() < 0.4 else min(max(x + rng.normal(0, 0.15), 0.0), 1.0)
        y = rng.uniform(0.05, 0.95) if rng.random() < 0.4 else min(max(y + rng.normal(0, 0.15), 0.0), 1.0)
        if style == "taps" or (style == "mixture" and rng.random() < 0.5):
            events.append(TouchEvent(_quantize(t), _quantize(x), _quantize(y), z, 0))
        else:
            remaining = _WINDOW_S - t - 0.01
            if remaining < 0.03:
                break
            swipe = _random_swipe(rng, t, x, y, z, max_duration=min(remaining, 3.0))
            events.extend(swipe)
            t = swipe[-1].time
        gap = float(np.exp(rng.normal(math.log(0.221), 0.7)))
        t += min(max(gap, 0.03), 1.5)
    return TinyPerformance(perf_id, performer, instrument, date, parent_id, tuple(events))


def generate_corpus(
    n: int, seed: int, reply_fraction: float = 0.29
) -> list[TinyPerformance]:
    """Generate ``n`` performances; replies link to random earlier ones.

    Fully deterministic for a fixed seed, including ids and dates, so a
    corpus written to disk twice is byte-identical.
    """
    rng = np.random.default_rng(seed)
    date = datetime(2020, 1, 1, tzinfo=timezone.utc)
    out: list[TinyPerformance] = []
    for i in range(n):
        date = date + timedelta(seconds=float(rng.uniform(60.0, 3600.0)))
        parent_id = None
        if i > 0 and rng.random() < reply_fraction:
            parent_id = out[int(rng.integers(0, i))].id
        out.append(
            generate_performance(
                rng,
                perf_id=rng.bytes(16).hex(),
                performer=f"tester{int(rng.integers(1, 40)):02d}",
                date=date,
                parent_id=parent_id,
            )
        )
    return out


def write_corpus(perfs: Sequence[TinyPerformance], out_dir: str | Path) -> JamStore:
    """Write performances as a store directory (ids and dates preserved)."""
    store = JamStore(out_dir)
    for perf in perfs:
        store.put(perf, perf_id=perf.id, created_at=isoformat_utc(perf.date))
    return store

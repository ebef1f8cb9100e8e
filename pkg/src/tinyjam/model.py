"""Data model for tiny touchscreen performances.

A tiny performance is at most five seconds of single-touch gesture data
captured over a square performance area. Positions are fractions of the
area's side length with the origin at the top-left corner (y grows
downward). Events travel as CSV, one row per touch sample; the descriptive
metadata (id, performer, instrument, date, parent link) travels as a JSON
sidecar object, one per performance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Mapping, Sequence

__all__ = [
    "CSV_HEADER",
    "MAX_DURATION_S",
    "INSTRUMENTS",
    "TouchEvent",
    "TinyPerformance",
    "LayeredPerformance",
    "Violation",
    "CsvHeaderError",
    "CsvParseError",
    "MetadataError",
    "ChainError",
    "InvalidPerformanceError",
    "parse_events_csv",
    "serialize_events_csv",
    "serialize_performance_csv",
    "validate",
    "validate_events",
    "metadata_to_dict",
    "metadata_to_json",
    "performance_from_metadata",
    "performance_from_events",
    "isoformat_utc",
    "parse_iso_utc",
]

CSV_HEADER = "time,x,y,z,moving"

#: Hard cap on performance length, seconds. The value 5.0 itself is legal.
MAX_DURATION_S = 5.0

INSTRUMENTS = ("chirp", "drums", "fmlead", "keys", "pad", "quack", "strings", "wub")


class CsvHeaderError(ValueError):
    """The CSV header line is not ``time,x,y,z,moving``."""


class CsvParseError(ValueError):
    """A CSV data row is malformed. ``line`` is the 1-based line number."""

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class MetadataError(ValueError):
    """A metadata JSON object is missing fields or has bad values."""


class ChainError(ValueError):
    """A reply chain is broken: empty, cyclic, or mislinked."""


class InvalidPerformanceError(ValueError):
    """A performance failed validation; ``violations`` lists every breach."""

    def __init__(self, violations: Sequence["Violation"]) -> None:
        detail = "; ".join(str(v) for v in violations) or "invalid performance"
        super().__init__(detail)
        self.violations = list(violations)


@dataclass(frozen=True)
class TouchEvent:
    """One touch sample.

    ``time`` is the offset in seconds from the start of the performance,
    ``x``/``y`` the position as fractions of the performance-area width,
    ``z`` the raw touch pressure in device units, and ``moving`` 0 for a
    touch-down or 1 for a touch-moved sample.
    """

    time: float
    x: float
    y: float
    z: float
    moving: int


@dataclass(frozen=True)
class TinyPerformance:
    """A recorded performance: ordered touch events plus display metadata."""

    id: str
    performer: str
    instrument: str
    date: datetime
    parent_id: str | None
    events: tuple[TouchEvent, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))

    @property
    def duration(self) -> float:
        """Seconds between the first and last event (0.0 when empty)."""
        if not self.events:
            return 0.0
        return self.events[-1].time - self.events[0].time


@dataclass(frozen=True)
class LayeredPerformance:
    """A reply chain ordered root-first; each layer replies to the previous."""

    layers: tuple[TinyPerformance, ...]

    def __post_init__(self) -> None:
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise ChainError("a layered performance needs at least one layer")
        seen: set[str] = set()
        for layer in layers:
            if layer.id in seen:
                raise ChainError(f"reply chain revisits performance {layer.id!r}")
            seen.add(layer.id)
        for below, above in zip(layers, layers[1:]):
            if above.parent_id != below.id:
                raise ChainError(f"layer {above.id!r} is not a reply to {below.id!r}")

    @property
    def depth(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class Violation:
    """One validation failure; ``index`` locates the offending event, if any."""

    code: str
    message: str
    index: int | None = None

    def __str__(self) -> str:
        return self.message


def validate_events(events: Sequence[TouchEvent]) -> list[Violation]:
    """Check the event stream against the format's constraints.

    Returns every violated constraint (ranges, time ordering, duration,
    first-event flag); an empty list means the stream is valid. Never raises
    and never mutates.
    """
    out: list[Violation] = []
    for i, e in enumerate(events):
        if not (math.isfinite(e.time) and 0.0 <= e.time <= MAX_DURATION_S):
            out.append(Violation("time-out-of-range", f"time out of range at index {i}", i))
        if not (math.isfinite(e.x) and 0.0 <= e.x <= 1.0):
            out.append(Violation("x-out-of-range", f"x out of range at index {i}", i))
        if not (math.isfinite(e.y) and 0.0 <= e.y <= 1.0):
            out.append(Violation("y-out-of-range", f"y out of range at index {i}", i))
        if not (math.isfinite(e.z) and e.z >= 0.0):
            out.append(Violation("z-out-of-range", f"z out of range at index {i}", i))
        if e.moving not in (0, 1):
            out.append(Violation("moving-invalid", f"moving flag not 0/1 at index {i}", i))
    if events:
        if events[0].moving != 0:
            out.append(Violation("first-event-moving", "performance begins mid-swipe", 0))
        for i in range(1, len(events)):
            if events[i].time < events[i - 1].time:
                out.append(Violation("non-monotonic-time", f"non-monotonic time at index {i}", i))
        duration = events[-1].time - events[0].time
        if math.isfinite(duration) and duration > MAX_DURATION_S:
            out.append(
                Violation(
                    "duration-exceeded",
                    f"duration {duration:.6f}s exceeds {MAX_DURATION_S}s",
                )
            )
    return out


def validate(perf: TinyPerformance) -> list[Violation]:
    """Validate a whole performance: event constraints plus instrument name."""
    out = validate_events(perf.events)
    if perf.instrument not in INSTRUMENTS:
        out.append(Violation("instrument-unknown", f"unknown instrument {perf.instrument!r}"))
    return out


def serialize_events_csv(events: Iterable[TouchEvent]) -> str:
    """Render events as CSV: header line then one fixed 6-decimal row per event."""
    lines = [CSV_HEADER]
    for e in events:
        lines.append(f"{e.time:.6f},{e.x:.6f},{e.y:.6f},{e.z:.6f},{int(e.moving):d}")
    return "\n".join(lines) + "\n"


def serialize_performance_csv(perf: TinyPerformance) -> str:
    return serialize_events_csv(perf.events)


def parse_events_csv(text: str) -> tuple[TouchEvent, ...]:
    """Parse performance CSV text into an ordered event tuple.

    Row order is preserved exactly as given; no sorting or filtering happens
    here (out-of-order rows are a matter for :func:`validate_events`).
    Raises :class:`CsvHeaderError` for a bad header and
    :class:`CsvParseError` (with the 1-based line number) for a malformed row.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CsvHeaderError(f"empty input, expected header {CSV_HEADER!r}")
    header = lines[0].lstrip("﻿").rstrip("\r").strip()
    if header != CSV_HEADER:
        raise CsvHeaderError(f"bad header {lines[0]!r}, expected {CSV_HEADER!r}")

    events: list[TouchEvent] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        fields = raw.rstrip("\r").split(",")
        if len(fields) != 5:
            raise CsvParseError(lineno, f"expected 5 fields, got {len(fields)}")
        try:
            time, x, y, z = (float(f) for f in fields[:4])
        except ValueError:
            raise CsvParseError(lineno, f"non-numeric value in row {raw!r}") from None
        if not all(map(math.isfinite, (time, x, y, z))):
            raise CsvParseError(lineno, f"non-finite value in row {raw!r}")
        try:
            moving = int(fields[4])
        except ValueError:
            raise CsvParseError(lineno, f"bad moving flag {fields[4]!r}") from None
        events.append(TouchEvent(time, x, y, z, moving))
    return tuple(events)


def isoformat_utc(dt: datetime) -> str:
    """ISO-8601 in UTC with a ``Z`` suffix; naive datetimes are taken as UTC."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_iso_utc(text: str) -> datetime:
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def metadata_to_dict(perf: TinyPerformance) -> dict:
    """Sidecar metadata object: id, performer, instrument, date, parent_id."""
    return {
        "id": perf.id,
        "performer": perf.performer,
        "instrument": perf.instrument,
        "date": isoformat_utc(perf.date),
        "parent_id": perf.parent_id,
    }


def metadata_to_json(perf: TinyPerformance) -> str:
    return json.dumps(metadata_to_dict(perf), indent=2) + "\n"


def performance_from_metadata(meta: Mapping, events: Iterable[TouchEvent]) -> TinyPerformance:
    """Combine a metadata mapping (parsed sidecar JSON) with parsed events."""
    try:
        perf_id = str(meta["id"])
        performer = str(meta["performer"])
        instrument = str(meta["instrument"])
        date = parse_iso_utc(str(meta["date"]))
    except KeyError as exc:
        raise MetadataError(f"metadata missing field {exc.args[0]!r}") from None
    except ValueError as exc:
        raise MetadataError(f"bad metadata date: {exc}") from None
    parent = meta.get("parent_id")
    if parent is not None:
        parent = str(parent)
    return TinyPerformance(
        id=perf_id,
        performer=performer,
        instrument=instrument,
        date=date,
        parent_id=parent,
        events=tuple(events),
    )


def performance_from_events(
    events: Iterable[TouchEvent],
    instrument: str = "chirp",
    performer: str = "",
    perf_id: str = "",
    date: datetime | None = None,
    parent_id: str | None = None,
) -> TinyPerformance:
    """Wrap bare events in a performance with placeholder metadata."""
    if date is None:
        date = datetime(1970, 1, 1, tzinfo=timezone.utc)
    return TinyPerformance(
        id=perf_id,
        performer=performer,
        instrument=instrument,
        date=date,
        parent_id=parent_id,
        events=tuple(events),
    )

"""Tap/swipe segmentation and per-event / per-gesture statistics.

A gesture is a touch-down plus the touch-moved events that follow it: a
lone touch-down is a tap, a touch-down followed by one or more touch-moved
events is a swipe. Distances are in performance-area widths, speeds in
widths per second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .model import TinyPerformance, TouchEvent

__all__ = [
    "EventDelta",
    "Gesture",
    "SwipeStats",
    "SegmentationError",
    "NotASwipeError",
    "segment",
    "segment_events",
    "filter_valid_swipes",
    "swipe_stats",
    "event_deltas",
]


class SegmentationError(ValueError):
    """The event stream cannot be segmented (it begins mid-swipe)."""


class NotASwipeError(ValueError):
    """Swipe statistics were requested for something that is not a swipe."""


@dataclass(frozen=True)
class EventDelta:
    """Step from one event to the next within a performance.

    ``dt`` and ``dist`` are measured against the immediately preceding event
    regardless of gesture boundaries; ``moving`` is the current event's flag.
    """

    dt: float
    dist: float
    moving: int


@dataclass(frozen=True)
class SwipeStats:
    length_events: int
    time_s: float
    distance: float
    mean_velocity: float
    max_velocity: float


@dataclass(frozen=True)
class Gesture:
    """A tap or a swipe: a contiguous event slice starting at a touch-down."""

    kind: str  # "tap" | "swipe"
    events: tuple[TouchEvent, ...]

    @property
    def stats(self) -> SwipeStats | None:
        """Derived swipe statistics; None for taps."""
        if self.kind != "swipe":
            return None
        return swipe_stats(self)


def segment_events(events: Sequence[TouchEvent]) -> list[Gesture]:
    """Partition an event stream into gestures at each touch-down.

    The concatenation of all gesture slices reproduces the input exactly.
    Raises :class:`SegmentationError` when the stream opens with a
    touch-moved event, which no valid recording can produce.
    """
    if not events:
        return []
    if events[0].moving != 0:
        raise SegmentationError("event stream begins with a touch-moved event")
    gestures: list[Gesture] = []
    start = 0
    for i in range(1, len(events) + 1):
        if i == len(events) or events[i].moving == 0:
            chunk = tuple(events[start:i])
            kind = "tap" if len(chunk) == 1 else "swipe"
            gestures.append(Gesture(kind, chunk))
            start = i
    return gestures


def segment(perf: TinyPerformance) -> list[Gesture]:
    return segment_events(perf.events)


def filter_valid_swipes(
    gestures: Sequence[Gesture], max_time: float = 5.0
) -> tuple[list[Gesture], int]:
    """Keep swipes no longer than ``max_time`` seconds.

    Returns ``(swipes, n_excluded)`` where ``n_excluded`` counts the swipes
    dropped for exceeding the threshold. Taps are not part of the output and
    do not count as excluded.
    """
    swipes = [g for g in gestures if g.kind == "swipe"]
    kept = [g for g in swipes if g.events[-1].time - g.events[0].time <= max_time]
    return kept, len(swipes) - len(kept)


def swipe_stats(swipe: Gesture) -> SwipeStats:
    """Compute length, duration, path distance, and segment speeds of a swipe.

    The path distance is the sum of consecutive Euclidean segment lengths.
    Each segment's speed is its length over its time step; segments with a
    zero time step contribute speed 0 but still add to the distance. Mean
    velocity is the arithmetic mean of the per-segment speeds.
    """
    if swipe.kind != "swipe" or len(swipe.events) < 2:
        raise NotASwipeError("swipe statistics need a swipe with at least 2 events")
    ev = swipe.events
    distance = 0.0
    speeds: list[float] = []
    for a, b in zip(ev, ev[1:]):
        seg = math.hypot(b.x - a.x, b.y - a.y)
        distance += seg
        dt = b.time - a.time
        speeds.append(seg / dt if dt > 0 else 0.0)
    return SwipeStats(
        length_events=len(ev),
        time_s=ev[-1].time - ev[0].time,
        distance=distance,
        mean_velocity=sum(speeds) / len(speeds),
        max_velocity=max(speeds),
    )


def event_deltas(perf: TinyPerformance) -> list[EventDelta]:
    """Per-event time and distance steps, one per event after the first."""
    ev = perf.events
    out: list[EventDelta] = []
    for a, b in zip(ev, ev[1:]):
        out.append(
            EventDelta(
                dt=b.time - a.time,
                dist=math.hypot(b.x - a.x, b.y - a.y),
                moving=b.moving,
            )
        )
    return out

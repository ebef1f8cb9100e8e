"""Shared test helpers: seeded random-but-valid performance builders."""

from __future__ import annotations

import numpy as np

from tinyjam.model import TinyPerformance, TouchEvent, performance_from_events


def q6(value: float) -> float:
    """Quantize to the 6-decimal precision the CSV format carries."""
    return float(f"{value:.6f}")


def random_valid_performance(
    rng: np.random.Generator,
    max_events: int = 120,
    instrument: str = "chirp",
) -> TinyPerformance:
    """A uniformly random performance satisfying every format constraint."""
    n = int(rng.integers(0, max_events + 1))
    if n == 0:
        return performance_from_events((), instrument=instrument)
    times = np.sort(rng.uniform(0.0, 5.0, n))
    xs = rng.uniform(0.0, 1.0, n)
    ys = rng.uniform(0.0, 1.0, n)
    zs = rng.uniform(0.0, 80.0, n)
    moving = rng.integers(0, 2, n)
    moving[0] = 0
    events = tuple(
        TouchEvent(q6(times[i]), q6(xs[i]), q6(ys[i]), q6(zs[i]), int(moving[i]))
        for i in range(n)
    )
    return performance_from_events(events, instrument=instrument)


def make_events(rows) -> tuple[TouchEvent, ...]:
    return tuple(TouchEvent(*row) for row in rows)

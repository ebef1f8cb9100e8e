"""Corpus-level aggregation of performances.

Builds the full statistics report over a set of performances: event and
gesture counts, per-instrument distributions, swipe descriptive statistics,
touch-location density estimation, one-way ANOVA across instruments,
quartile sampling, normalized velocity curves, and reply-chain depths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import betainc

from .gestures import Gesture, event_deltas, filter_valid_swipes, segment
from .model import TinyPerformance, isoformat_utc

__all__ = [
    "AnovaResult",
    "KdeGrid",
    "CorpusReport",
    "AnovaUndefinedError",
    "SWIPE_MEASUREMENTS",
    "anova_oneway",
    "f_cdf",
    "kde2d",
    "sample_swipes_by_quartile",
    "velocity_curve",
    "classify_style",
    "build_report",
]

#: Columns of the swipe statistics table, in report order.
SWIPE_MEASUREMENTS = ("length_events", "time_s", "mean_velocity", "distance", "max_velocity")

#: Fixed recording window used as the denominator for the long-swipe label.
_PERFORMANCE_WINDOW_S = 5.0

#: Smallest usable kernel width for degenerate (zero-variance) axes.
_BANDWIDTH_FLOOR = 1e-3


class AnovaUndefinedError(ValueError):
    """The F statistic is undefined (no within-group variance)."""


@dataclass(frozen=True)
class AnovaResult:
    groups: tuple[str, ...]
    F: float
    df_between: int
    df_within: int
    p_value: float

    def to_dict(self) -> dict:
        return {
            "groups": list(self.groups),
            "F": self.F,
            "df_between": self.df_between,
            "df_within": self.df_within,
            "p_value": self.p_value,
        }


@dataclass(frozen=True)
class KdeGrid:
    """Density over the unit square on a ``resolution`` x ``resolution`` grid.

    ``densities[i, j]`` is the density at the center of the cell with
    y in ``[i/r, (i+1)/r)`` and x in ``[j/r, (j+1)/r)`` (rows follow y,
    matching the top-left screen origin).
    """

    resolution: int
    densities: np.ndarray
    bandwidth: tuple[float, float]  # (x, y) kernel widths

    def integrated_mass(self) -> float:
        cell_area = 1.0 / (self.resolution * self.resolution)
        return float(self.densities.sum() * cell_area)

    def to_dict(self) -> dict:
        return {
            "resolution": self.resolution,
            "bandwidth": list(self.bandwidth),
            "densities": self.densities.tolist(),
        }


def f_cdf(x: float, df1: int, df2: int) -> float:
    """CDF of the F distribution via the regularized incomplete beta function."""
    if x <= 0:
        return 0.0
    return float(1.0 - betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * x)))


def anova_oneway(groups: Sequence[Sequence[float]], labels: Sequence[str] | None = None) -> AnovaResult:
    """One-way fixed-effects ANOVA over ``groups`` of measurements.

    F is the ratio of between-group to within-group mean squares; the
    p-value is the F-distribution upper tail. Requires at least two groups
    of at least two values each and some within-group variance.
    """
    if len(groups) < 2:
        raise ValueError("ANOVA needs at least 2 groups")
    if any(len(g) < 2 for g in groups):
        raise ValueError("every ANOVA group needs at least 2 values")
    if labels is None:
        labels = tuple(f"group{i}" for i in range(len(groups)))
    elif len(labels) != len(groups):
        raise ValueError("labels/groups length mismatch")

    arrays = [np.asarray(g, dtype=float) for g in groups]
    all_values = np.concatenate(arrays)
    grand_mean = all_values.mean()
    ss_between = sum(len(a) * (a.mean() - grand_mean) ** 2 for a in arrays)
    ss_within = sum(float(((a - a.mean()) ** 2).sum()) for a in arrays)
    df_between = len(arrays) - 1
    df_within = len(all_values) - len(arrays)
    if ss_within <= 0.0:
        raise AnovaUndefinedError("zero within-group variance, F undefined")
    f_stat = (ss_between / df_between) / (ss_within / df_within)
    p_value = 1.0 - f_cdf(f_stat, df_between, df_within)
    return AnovaResult(tuple(labels), float(f_stat), df_between, df_within, float(p_value))


def kde2d(points: Sequence[tuple[float, float]], resolution: int = 100) -> KdeGrid:
    """Gaussian product-kernel density estimate on a uniform grid.

    Per-axis bandwidths follow Scott's rule for two dimensions,
    ``sigma * n**(-1/6)``, floored at a small constant when an axis has no
    spread. No boundary correction is applied, so mass leaks off the edges
    for points close to them.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
        raise ValueError("kde2d needs at least one (x, y) point")
    if resolution < 1:
        raise ValueError("resolution must be positive")
    n = pts.shape[0]
    factor = n ** (-1.0 / 6.0)
    sx = float(pts[:, 0].std(ddof=1)) if n > 1 else 0.0
    sy = float(pts[:, 1].std(ddof=1)) if n > 1 else 0.0
    hx = max(sx * factor, _BANDWIDTH_FLOOR)
    hy = max(sy * factor, _BANDWIDTH_FLOOR)

    centers = (np.arange(resolution) + 0.5) / resolution
    density = np.zeros((resolution, resolution))
    norm = 1.0 / (2.0 * math.pi * hx * hy * n)
    # Separable kernel: accumulate outer products in chunks to bound memory.
    for start in range(0, n, 65536):
        chunk = pts[start : start + 65536]
        kx = np.exp(-0.5 * ((centers[:, None] - chunk[None, :, 0]) / hx) ** 2)
        ky = np.exp(-0.5 * ((centers[:, None] - chunk[None, :, 1]) / hy) ** 2)
        density += ky @ kx.T
    density *= norm
    density.flags.writeable = False
    return KdeGrid(resolution=resolution, densities=density, bandwidth=(hx, hy))


def sample_swipes_by_quartile(
    swipes: Sequence[Gesture], per_quartile: int, seed: int
) -> list[list[Gesture]]:
    """Sample swipes from each duration quartile without replacement.

    Quartile boundaries are the linear-interpolation quantiles of swipe
    duration over all inputs; membership intervals are half-open with the
    last one closed. Quartiles smaller than ``per_quartile`` are returned
    whole. Deterministic for a fixed seed.
    """
    if len(swipes) < 4:
        raise ValueError("need at least 4 swipes to form quartiles")
    times = np.array([s.stats.time_s for s in swipes])
    q1, q2, q3 = np.quantile(times, [0.25, 0.5, 0.75])
    buckets: list[list[int]] = [[], [], [], []]
    for i, t in enumerate(times):
        if t < q1:
            buckets[0].append(i)
        elif t < q2:
            buckets[1].append(i)
        elif t < q3:
            buckets[2].append(i)
        else:
            buckets[3].append(i)
    rng = np.random.default_rng(seed)
    out: list[list[Gesture]] = []
    for bucket in buckets:
        if len(bucket) <= per_quartile:
            chosen = bucket
        else:
            chosen = sorted(rng.choice(len(bucket), size=per_quartile, replace=False))
            chosen = [bucket[i] for i in chosen]
        out.append([swipes[i] for i in chosen])
    return out


def velocity_curve(swipe: Gesture, n_points: int) -> np.ndarray:
    """Normalized speed profile of a swipe, resampled to ``n_points``.

    Per-segment speeds sit at their segment-start times mapped onto [0, 1];
    linear resampling fills the grid and the curve is scaled so its peak is
    1.0 (an all-zero profile stays zero).
    """
    if swipe.kind != "swipe" or len(swipe.events) < 2:
        raise ValueError("velocity curve needs a swipe with at least 2 events")
    if n_points < 1:
        raise ValueError("n_points must be positive")
    ev = swipe.events
    total = ev[-1].time - ev[0].time
    if total <= 0:
        raise ValueError("zero-duration swipe has no velocity curve")
    u = np.array([(a.time - ev[0].time) / total for a in ev[:-1]])
    v = np.array(
        [
            math.hypot(b.x - a.x, b.y - a.y) / (b.time - a.time) if b.time > a.time else 0.0
            for a, b in zip(ev, ev[1:])
        ]
    )
    # Collapse duplicate normalized times (zero-dt segments), keeping the last.
    keep = np.append(u[1:] != u[:-1], True)
    u, v = u[keep], v[keep]
    curve = np.interp(np.linspace(0.0, 1.0, n_points), u, v)
    peak = curve.max()
    if peak > 0:
        curve = curve / peak
    return curve


def classify_style(perf: TinyPerformance) -> str:
    """Heuristic gesture-composition label for a performance.

    Labels: "taps" (at least 90% taps), "long-swipe" (a single swipe
    spanning at least 80% of the five-second window), "swipes" (at least
    90% swipes), "mixture" otherwise, "empty" for no events.
    """
    gestures = segment(perf)
    if not gestures:
        return "empty"
    n = len(gestures)
    taps = sum(1 for g in gestures if g.kind == "tap")
    swipes = [g for g in gestures if g.kind == "swipe"]
    if taps / n >= 0.9:
        return "taps"
    if len(swipes) == 1:
        span = swipes[0].events[-1].time - swipes[0].events[0].time
        if span >= 0.8 * _PERFORMANCE_WINDOW_S:
            return "long-swipe"
    if len(swipes) / n >= 0.9:
        return "swipes"
    return "mixture"


@dataclass(frozen=True)
class CorpusReport:
    n_performances: int
    n_events: int
    n_moving: int
    n_nonmoving: int
    n_replies: int
    performances_by_instrument: dict[str, int]
    touch_count_quantiles: dict[str, dict[str, float]]
    moving_proportion_quantiles: dict[str, dict[str, float]]
    swipe_counts: dict[str, int]
    swipe_table: dict[str, dict[str, float]]
    delta_quantiles: dict[str, dict[str, dict[str, float]]]
    reply_depth_histogram: dict[int, int]
    reply_depth_unknown: int
    style_counts: dict[str, int]
    anova: dict[str, AnovaResult | None]
    kde: KdeGrid | None

    def to_dict(self) -> dict:
        return {
            "n_performances": self.n_performances,
            "n_events": self.n_events,
            "n_moving": self.n_moving,
            "n_nonmoving": self.n_nonmoving,
            "n_replies": self.n_replies,
            "performances_by_instrument": self.performances_by_instrument,
            "touch_count_quantiles": self.touch_count_quantiles,
            "moving_proportion_quantiles": self.moving_proportion_quantiles,
            "swipe_counts": self.swipe_counts,
            "swipe_table": self.swipe_table,
            "delta_quantiles": self.delta_quantiles,
            "reply_depth_histogram": {str(k): v for k, v in self.reply_depth_histogram.items()},
            "reply_depth_unknown": self.reply_depth_unknown,
            "style_counts": self.style_counts,
            "anova": {k: (v.to_dict() if v else None) for k, v in self.anova.items()},
            "kde": self.kde.to_dict() if self.kde else None,
        }


def _event_key(e) -> tuple:
    return (e.time, e.x, e.y, e.z, e.moving)


def _quantiles(values: Sequence[float]) -> dict[str, float]:
    arr = np.asarray(values, dtype=float)
    q25, q50, q75 = np.quantile(arr, [0.25, 0.5, 0.75])
    return {
        "min": float(arr.min()),
        "q25": float(q25),
        "q50": float(q50),
        "q75": float(q75),
        "max": float(arr.max()),
    }


def _table_column(values: Sequence[float]) -> dict[str, float]:
    arr = np.asarray(values, dtype=float)
    out = {"mean": float(arr.mean()), "std": float(arr.std(ddof=1)) if len(arr) > 1 else 0.0}
    out.update(_quantiles(arr))
    return out


def _reply_depths(corpus: Sequence[TinyPerformance]) -> tuple[dict[int, int], int]:
    by_id = {p.id: p for p in corpus if p.id}
    histogram: dict[int, int] = {}
    unknown = 0
    for perf in corpus:
        if perf.parent_id is None:
            continue
        depth = 1
        seen = {perf.id}
        cursor: str | None = perf.parent_id
        while cursor is not None:
            node = by_id.get(cursor)
            if node is None or node.id in seen:
                depth = -1  # dangling link or cycle in raw data
                break
            seen.add(node.id)
            depth += 1
            cursor = node.parent_id
        if depth < 0:
            unknown += 1
        else:
            histogram[depth] = histogram.get(depth, 0) + 1
    return dict(sorted(histogram.items())), unknown


def build_report(
    corpus: Sequence[TinyPerformance],
    kde_resolution: int = 100,
    max_swipe_time: float = 5.0,
) -> CorpusReport:
    """Aggregate a corpus into the full statistics report.

    Deterministic and independent of input order: performances are
    canonicalized by (id, date, events) before any accumulation.
    """
    corpus = sorted(
        corpus,
        key=lambda p: (p.id, isoformat_utc(p.date), tuple(_event_key(e) for e in p.events)),
    )

    n_events = sum(len(p.events) for p in corpus)
    n_moving = sum(1 for p in corpus for e in p.events if e.moving != 0)
    instruments = sorted({p.instrument for p in corpus})

    performances_by_instrument = {
        ins: sum(1 for p in corpus if p.instrument == ins) for ins in instruments
    }
    touch_count_quantiles = {}
    moving_proportion_quantiles = {}
    for ins in instruments:
        counts = [len(p.events) for p in corpus if p.instrument == ins]
        touch_count_quantiles[ins] = _quantiles(counts)
        proportions = [
            sum(1 for e in p.events if e.moving != 0) / len(p.events)
            for p in corpus
            if p.instrument == ins and p.events
        ]
        if proportions:
            moving_proportion_quantiles[ins] = _quantiles(proportions)

    # Gesture pass: swipes (with their instrument) and style labels.
    all_swipes: list[tuple[str, Gesture]] = []
    n_taps = 0
    style_counts: dict[str, int] = {}
    for perf in corpus:
        gestures = segment(perf)
        n_taps += sum(1 for g in gestures if g.kind == "tap")
        all_swipes.extend((perf.instrument, g) for g in gestures if g.kind == "swipe")
        label = classify_style(perf)
        style_counts[label] = style_counts.get(label, 0) + 1
    style_counts = dict(sorted(style_counts.items()))

    valid, n_excluded = filter_valid_swipes([g for _, g in all_swipes], max_time=max_swipe_time)
    valid_with_instrument = [
        (ins, g)
        for ins, g in all_swipes
        if g.events[-1].time - g.events[0].time <= max_swipe_time
    ]
    swipe_counts = {
        "total": len(all_swipes),
        "taps": n_taps,
        "excluded_over_max_time": n_excluded,
        "valid": len(valid),
    }

    swipe_table: dict[str, dict[str, float]] = {}
    if valid:
        stats = [g.stats for g in valid]
        for column in SWIPE_MEASUREMENTS:
            swipe_table[column] = _table_column([getattr(s, column) for s in stats])

    # Per-event deltas split by the moving flag of the arriving event.
    dts = {0: [], 1: []}
    dists = {0: [], 1: []}
    for perf in corpus:
        for d in event_deltas(perf):
            flag = 1 if d.moving != 0 else 0
            dts[flag].append(d.dt)
            dists[flag].append(d.dist)
    delta_quantiles: dict[str, dict[str, dict[str, float]]] = {}
    for name, source in (("dt", dts), ("dist", dists)):
        delta_quantiles[name] = {}
        for flag, key in ((1, "moving"), (0, "nonmoving")):
            if source[flag]:
                delta_quantiles[name][key] = _quantiles(source[flag])

    reply_depth_histogram, reply_depth_unknown = _reply_depths(corpus)

    anova: dict[str, AnovaResult | None] = {}
    by_instrument: dict[str, list] = {}
    for ins, g in valid_with_instrument:
        by_instrument.setdefault(ins, []).append(g.stats)
    group_labels = sorted(ins for ins, stats in by_instrument.items() if len(stats) >= 2)
    for column in SWIPE_MEASUREMENTS:
        if len(group_labels) < 2:
            anova[column] = None
            continue
        groups = [[getattr(s, column) for s in by_instrument[ins]] for ins in group_labels]
        try:
            anova[column] = anova_oneway(groups, labels=group_labels)
        except AnovaUndefinedError:
            anova[column] = None

    points = [(e.x, e.y) for p in corpus for e in p.events]
    kde = kde2d(points, resolution=kde_resolution) if points else None

    return CorpusReport(
        n_performances=len(corpus),
        n_events=n_events,
        n_moving=n_moving,
        n_nonmoving=n_events - n_moving,
        n_replies=sum(1 for p in corpus if p.parent_id is not None),
        performances_by_instrument=performances_by_instrument,
        touch_count_quantiles=touch_count_quantiles,
        moving_proportion_quantiles=moving_proportion_quantiles,
        swipe_counts=swipe_counts,
        swipe_table=swipe_table,
        delta_quantiles=delta_quantiles,
        reply_depth_histogram=reply_depth_histogram,
        reply_depth_unknown=reply_depth_unknown,
        style_counts=style_counts,
        anova=anova,
        kde=kde,
    )

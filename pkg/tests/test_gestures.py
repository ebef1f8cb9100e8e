import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_events, random_valid_performance
from tinyjam.gestures import (
    Gesture,
    NotASwipeError,
    SegmentationError,
    event_deltas,
    filter_valid_swipes,
    segment,
    segment_events,
    swipe_stats,
)
from tinyjam.model import performance_from_events


def naive_partition(events):
    """Reference segmentation: accumulate runs split at each touch-down."""
    out, cur = [], []
    for e in events:
        if e.moving == 0:
            if cur:
                out.append(cur)
            cur = [e]
        else:
            cur.append(e)
    if cur:
        out.append(cur)
    return out


def events_from_flags(flags, dt=0.02):
    return make_events(
        [(round(i * dt, 6), 0.1 + 0.001 * i, 0.2, 1.0, flag) for i, flag in enumerate(flags)]
    )


class TestSegment:
    def test_example_pattern(self):
        gestures = segment_events(events_from_flags([0, 1, 1, 0, 0, 1]))
        assert [(g.kind, len(g.events)) for g in gestures] == [
            ("swipe", 3),
            ("tap", 1),
            ("swipe", 2),
        ]

    def test_empty_performance(self):
        assert segment(performance_from_events(())) == []

    def test_begins_mid_swipe(self):
        with pytest.raises(SegmentationError):
            segment_events(events_from_flags([1, 0]))

    def test_single_tap(self):
        gestures = segment_events(events_from_flags([0]))
        assert [g.kind for g in gestures] == ["tap"]

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=60).map(lambda f: [0] + f))
    def test_matches_naive_partition(self, flags):
        events = events_from_flags(flags)
        got = segment_events(events)
        expected = naive_partition(events)
        assert [list(g.events) for g in got] == expected

    def test_partition_properties_on_random_performances(self):
        rng = np.random.default_rng(202)
        for _ in range(200):
            perf = random_valid_performance(rng)
            gestures = segment(perf)
            flat = tuple(e for g in gestures for e in g.events)
            assert flat == perf.events
            n_downs = sum(1 for e in perf.events if e.moving == 0)
            assert len(gestures) == n_downs
            assert all(g.kind in ("tap", "swipe") for g in gestures)
            assert all(
                (g.kind == "tap") == (len(g.events) == 1) for g in gestures
            )


class TestFilterValidSwipes:
    def _swipe(self, duration):
        return Gesture(
            "swipe",
            make_events([(0.0, 0.0, 0.0, 1.0, 0), (duration, 0.2, 0.2, 1.0, 1)]),
        )

    def test_excludes_over_threshold(self):
        kept, excluded = filter_valid_swipes([self._swipe(5.2), self._swipe(0.3)])
        assert len(kept) == 1 and excluded == 1
        assert kept[0].events[-1].time == 0.3

    def test_all_within_threshold_unchanged(self):
        swipes = [self._swipe(0.1), self._swipe(4.9)]
        kept, excluded = filter_valid_swipes(swipes)
        assert kept == swipes and excluded == 0

    def test_taps_pass_through_silently(self):
        tap = Gesture("tap", make_events([(0.0, 0.1, 0.1, 1.0, 0)]))
        kept, excluded = filter_valid_swipes([tap, self._swipe(1.0)])
        assert len(kept) == 1 and excluded == 0


class TestSwipeStats:
    def test_three_four_five_hand_example(self):
        swipe = Gesture(
            "swipe",
            make_events([(0.0, 0.0, 0.0, 1.0, 0), (0.1, 0.3, 0.4, 1.0, 1)]),
        )
        stats = swipe_stats(swipe)
        assert stats.length_events == 2
        assert stats.distance == 0.5
        assert stats.time_s == 0.1
        assert stats.mean_velocity == 5.0
        assert stats.max_velocity == 5.0

    def test_stationary_swipe(self):
        swipe = Gesture(
            "swipe",
            make_events(
                [(0.0, 0.4, 0.4, 1.0, 0), (0.1, 0.4, 0.4, 1.0, 1), (0.2, 0.4, 0.4, 1.0, 1)]
            ),
        )
        stats = swipe_stats(swipe)
        assert stats.distance == 0.0
        assert stats.mean_velocity == 0.0
        assert stats.max_velocity == 0.0

    def test_zero_dt_segment_contributes_distance_not_speed(self):
        swipe = Gesture(
            "swipe",
            make_events([(0.0, 0.0, 0.0, 1.0, 0), (0.0, 0.3, 0.4, 1.0, 1), (0.1, 0.3, 0.4, 1.0, 1)]),
        )
        stats = swipe_stats(swipe)
        assert stats.distance == 0.5
        assert stats.max_velocity == 0.0

    def test_tap_is_not_a_swipe(self):
        tap = Gesture("tap", make_events([(0.0, 0.1, 0.1, 1.0, 0)]))
        with pytest.raises(NotASwipeError):
            swipe_stats(tap)

    def test_gesture_stats_property(self):
        tap = Gesture("tap", make_events([(0.0, 0.1, 0.1, 1.0, 0)]))
        assert tap.stats is None

    def test_triangle_inequality_and_velocity_order(self):
        rng = np.random.default_rng(77)
        checked = 0
        for _ in range(300):
            perf = random_valid_performance(rng)
            for g in segment(perf):
                if g.kind != "swipe":
                    continue
                s = swipe_stats(g)
                a, b = g.events[0], g.events[-1]
                assert s.distance >= math.hypot(b.x - a.x, b.y - a.y) - 1e-12
                if any(
                    later.time > earlier.time
                    for earlier, later in zip(g.events, g.events[1:])
                ):
                    assert s.max_velocity >= s.mean_velocity
                checked += 1
        assert checked > 100


class TestEventDeltas:
    def test_two_events_same_point(self):
        perf = performance_from_events(
            make_events([(0.0, 0.5, 0.5, 1.0, 0), (0.1, 0.5, 0.5, 1.0, 1)])
        )
        deltas = event_deltas(perf)
        assert len(deltas) == 1
        assert deltas[0].dt == pytest.approx(0.1)
        assert deltas[0].dist == 0.0
        assert deltas[0].moving == 1

    def test_single_event_gives_empty(self):
        perf = performance_from_events(make_events([(0.0, 0.5, 0.5, 1.0, 0)]))
        assert event_deltas(perf) == []

    def test_deltas_cross_gesture_boundaries(self):
        perf = performance_from_events(
            make_events([(0.0, 0.0, 0.0, 1.0, 0), (1.0, 1.0, 1.0, 1.0, 0)])
        )
        deltas = event_deltas(perf)
        assert len(deltas) == 1
        assert deltas[0].dist == pytest.approx(math.sqrt(2.0))
        assert deltas[0].moving == 0

    def test_count_is_events_minus_one(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            perf = random_valid_performance(rng)
            assert len(event_deltas(perf)) == max(0, len(perf.events) - 1)

"""Tiny touchscreen performances: format, synthesis, analytics, and sharing."""

from .analytics import (
    AnovaResult,
    CorpusReport,
    KdeGrid,
    anova_oneway,
    build_report,
    classify_style,
    kde2d,
    sample_swipes_by_quartile,
    velocity_curve,
)
from .audio import DEFAULT_SAMPLE_RATE, AudioBuffer, to_wav_bytes, write_wav
from .gestures import (
    EventDelta,
    Gesture,
    SwipeStats,
    event_deltas,
    filter_valid_swipes,
    segment,
    swipe_stats,
)
from .instruments import INSTRUMENT_SPECS, ControlFrame, InstrumentSpec, SynthState, map_touch
from .model import (
    INSTRUMENTS,
    MAX_DURATION_S,
    LayeredPerformance,
    TinyPerformance,
    TouchEvent,
    Violation,
    parse_events_csv,
    serialize_events_csv,
    serialize_performance_csv,
    validate,
    validate_events,
)
from .store import JamStore
from .synth import ENGINE_VERSION, render, render_layers
from .trace import render_heatmap, render_layered, render_trace

__version__ = "0.1.0"

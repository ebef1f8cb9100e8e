"""Offline rendering of performances to PCM audio.

Every gesture becomes a note. The touch-down picks the pitch (or drum
voice) from its position; touch-moved events bend pitch and drive effect
sends from their offsets to the touch-down anchor. A note with no moved
event inside the sustain-decision window plays as a very short hit;
otherwise it sustains until the next touch-down or the end of the event
stream. Rendering is a pure function of (performance, sample rate).
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from .audio import DEFAULT_SAMPLE_RATE, AudioBuffer
from .gestures import Gesture, segment
from .instruments import (
    BEND_SEMITONES,
    InstrumentSpec,
    drum_voice_for_position,
    get_instrument,
    pitch_hz_for_x,
    volume_for_y,
)
from .model import (
    MAX_DURATION_S,
    InvalidPerformanceError,
    LayeredPerformance,
    TinyPerformance,
    validate,
)

__all__ = ["ENGINE_VERSION", "render", "render_layers", "render_mix"]

#: Bumped whenever rendered output changes; cached artifacts key off it.
ENGINE_VERSION = "1"

ATTACK_S = 0.005
RELEASE_S = 0.120
SUSTAIN_DECISION_S = 0.080  # a moved event this soon after the down sustains the note
TAIL_S = 1.0
NOTE_GAIN = 0.8
DELAY_TIME_S = 0.180
DELAY_FEEDBACK = 0.45
ROLL_INTERVAL_S = 0.050
FM_INDEX = 1.5
KS_DAMPING = 0.996
PAD_CUTOFF_HZ = 2000.0
TREMOLO_BASE_HZ = 4.0

_KS_SEED = 0x5EED
_DRUM_SEEDS = {"kick": 101, "snare": 202, "hihat": 303, "crash": 404}
_drum_cache: dict[tuple[str, int], np.ndarray] = {}


def render(perf: TinyPerformance, sample_rate: int = DEFAULT_SAMPLE_RATE) -> AudioBuffer:
    """Render one performance to a limiter-bounded buffer.

    The buffer covers the five-second performance window plus a one-second
    release/echo tail. Raises :class:`InvalidPerformanceError` when the
    performance breaks the format constraints.
    """
    violations = validate(perf)
    if violations:
        raise InvalidPerformanceError(violations)
    mix = render_mix(perf, sample_rate)
    return AudioBuffer(_limit(mix), sample_rate)


def render_layers(
    layers: LayeredPerformance | Sequence[TinyPerformance],
    sample_rate: int = DEFAULT_SAMPLE_RATE,
) -> AudioBuffer:
    """Render a reply chain: per-layer mixes summed, then soft-limited."""
    if not isinstance(layers, LayeredPerformance):
        layers = LayeredPerformance(tuple(layers))
    for layer in layers.layers:
        violations = validate(layer)
        if violations:
            raise InvalidPerformanceError(violations)
    mix = np.zeros(_buffer_len(sample_rate))
    for layer in layers.layers:
        mix += render_mix(layer, sample_rate)
    return AudioBuffer(_limit(mix), sample_rate)


def render_mix(perf: TinyPerformance, sample_rate: int) -> np.ndarray:
    """Pre-limiter mix of one performance (notes plus the echo return)."""
    n_total = _buffer_len(sample_rate)
    mix = np.zeros(n_total)
    if not perf.events:
        return mix
    send_bus = np.zeros(n_total)
    spec = get_instrument(perf.instrument)

    max_z = max(e.z for e in perf.events)
    gestures = segment(perf)
    last_event_time = perf.events[-1].time
    for index, gesture in enumerate(gestures):
        if index + 1 < len(gestures):
            gate = gestures[index + 1].events[0].time
        else:
            gate = last_event_time
        if spec.synthesis_method == "drum_kit":
            _render_drum_note(spec, gesture, gate, max_z, sample_rate, mix, send_bus)
        else:
            _render_pitched_note(spec, gesture, gate, max_z, sample_rate, index, mix, send_bus)

    mix += _feedback_delay(send_bus, sample_rate)
    return mix


def _limit(mix: np.ndarray) -> np.ndarray:
    return np.tanh(mix)


def _buffer_len(sample_rate: int) -> int:
    return int(round((MAX_DURATION_S + TAIL_S) * sample_rate))


def _gesture_tracks(gesture: Gesture, t_grid: np.ndarray, max_z: float):
    """Linear-interpolated x/y/z-factor tracks over the note's sample grid."""
    ev = gesture.events
    times = np.array([e.time for e in ev])
    keep = np.append(times[1:] != times[:-1], True)  # dedupe equal timestamps
    times = times[keep]
    xs = np.array([e.x for e in ev])[keep]
    ys = np.array([e.y for e in ev])[keep]
    zs = np.array([e.z for e in ev])[keep]
    x = np.interp(t_grid, times, xs)
    y = np.interp(t_grid, times, ys)
    zf = np.interp(t_grid, times, zs) / max_z if max_z > 0 else np.ones_like(t_grid)
    return x, y, zf


def _envelope(n: int, sample_rate: int) -> np.ndarray:
    env = np.ones(n)
    na = min(int(round(ATTACK_S * sample_rate)), n)
    if na > 0:
        env[:na] *= np.arange(1, na + 1) / na
    nr = min(int(round(RELEASE_S * sample_rate)), n)
    if nr > 0:
        env[-nr:] *= np.arange(nr - 1, -1, -1) / max(nr - 1, 1)
    return env


def _phase(freq: np.ndarray, sample_rate: int) -> np.ndarray:
    return 2.0 * math.pi * np.cumsum(freq) / sample_rate


def _one_pole_lowpass(x: np.ndarray, cutoff_hz: float, sample_rate: int, passes: int = 2) -> np.ndarray:
    a = 1.0 - math.exp(-2.0 * math.pi * cutoff_hz / sample_rate)
    for _ in range(passes):
        x = lfilter([a], [1.0, a - 1.0], x)
    return x


def _render_pitched_note(
    spec: InstrumentSpec,
    gesture: Gesture,
    gate: float,
    max_z: float,
    sample_rate: int,
    note_index: int,
    mix: np.ndarray,
    send_bus: np.ndarray,
) -> None:
    ev = gesture.events
    t_on = ev[0].time
    sustained = len(ev) > 1 and (ev[1].time - t_on) <= SUSTAIN_DECISION_S
    t_end = max(gate, t_on) if sustained else t_on + ATTACK_S
    i0 = int(round(t_on * sample_rate))
    i1 = min(int(round((t_end + RELEASE_S) * sample_rate)), len(mix))
    n = i1 - i0
    if n <= 0:
        return

    t_grid = (i0 + np.arange(n)) / sample_rate
    t_rel = t_grid - t_on
    x, y, zf = _gesture_tracks(gesture, t_grid, max_z)
    anchor_x, anchor_y = ev[0].x, ev[0].y
    dx = x - anchor_x
    dy = y - anchor_y

    base_hz = pitch_hz_for_x(spec, anchor_x)
    bend = 2.0 ** (dx * BEND_SEMITONES / 12.0)
    freq = base_hz * bend
    abs_dy = np.minimum(np.abs(dy), 1.0)

    method = spec.synthesis_method
    if method == "sine":
        phi = _phase(freq, sample_rate)
        low_mix = 0.4 * np.clip(y, 0.0, 1.0)
        dry = (1.0 - low_mix) * np.sin(phi) + low_mix * np.sin(0.5 * phi)
    elif method == "fm_2op":
        phi = _phase(freq, sample_rate)
        modulator = np.sin(2.0 * phi)  # 1:2 carrier-to-modulator ratio
        carrier = np.sin(phi + FM_INDEX * modulator)
        low_mix = 0.5 * abs_dy
        low = np.sin(0.5 * phi + FM_INDEX * np.sin(phi))
        dry = (1.0 - low_mix) * carrier + low_mix * low
    elif method == "phase_mod":
        phi = _phase(freq, sample_rate)
        index = 1.0 + 4.0 * abs_dy
        dry = np.sin(phi + index * np.sin(phi))
    elif method == "sawtooth_pad":
        phi = _phase(freq, sample_rate)
        saw = 2.0 * np.mod(phi / (2.0 * math.pi), 1.0) - 1.0
        dry = _one_pole_lowpass(saw, PAD_CUTOFF_HZ, sample_rate)
        depth = abs_dy
        dry *= 1.0 - depth * np.sin(2.0 * math.pi * TREMOLO_BASE_HZ * t_rel) ** 2
    elif method == "wave_packet":
        phi = _phase(freq, sample_rate)
        ratio = 1.5 + 4.5 * np.clip(y, 0.0, 1.0)
        window = (0.5 - 0.5 * np.cos(phi)) ** 2
        dry = np.sin(ratio * phi) * window
    elif method == "plucked_string":
        rng = np.random.default_rng(_KS_SEED + note_index)
        dry = _karplus_strong(base_hz, n, sample_rate, rng)
        if np.max(np.abs(dx)) > 1e-9:
            positions = np.cumsum(bend) - bend[0]
            dry = np.interp(positions, np.arange(n), dry)
    elif method == "tremolo_bass":
        phi = _phase(freq, sample_rate)
        saw = 2.0 * np.mod(phi / (2.0 * math.pi), 1.0) - 1.0
        timbre = np.clip(0.5 * (x + y), 0.0, 1.0)
        cutoff = 150.0 + 2500.0 * float(timbre.mean())
        dry = _one_pole_lowpass(saw, cutoff, sample_rate)
        rate = TREMOLO_BASE_HZ * 2.0 ** (2.0 * (np.clip(y, 0.0, 1.0) - 0.5))
        trem_phi = 2.0 * math.pi * np.cumsum(rate) / sample_rate
        dry *= 1.0 - 0.85 * np.sin(trem_phi) ** 2
    else:  # pragma: no cover - specs are fixed above
        raise ValueError(f"no synthesis method {method!r}")

    if "volume" in spec.y_targets:
        amplitude = 0.2 + 0.8 * (1.0 - np.clip(y, 0.0, 1.0))
    else:
        amplitude = np.ones(n)
    note = dry * _envelope(n, sample_rate) * NOTE_GAIN * amplitude * zf
    mix[i0:i1] += note
    if "reverb_delay_send" in spec.dy_targets:
        send_bus[i0:i1] += note * abs_dy


def _render_drum_note(
    spec: InstrumentSpec,
    gesture: Gesture,
    gate: float,
    max_z: float,
    sample_rate: int,
    mix: np.ndarray,
    send_bus: np.ndarray,
) -> None:
    ev = gesture.events
    t_on = ev[0].time
    sustained = len(ev) > 1 and (ev[1].time - t_on) <= SUSTAIN_DECISION_S

    trigger_times = [t_on]
    if sustained:
        k = 1
        while t_on + k * ROLL_INTERVAL_S < max(gate, t_on):
            trigger_times.append(t_on + k * ROLL_INTERVAL_S)
            k += 1

    times = np.array([e.time for e in ev])
    keep = np.append(times[1:] != times[:-1], True)
    times = times[keep]
    xs = np.array([e.x for e in ev])[keep]
    ys = np.array([e.y for e in ev])[keep]
    zs = np.array([e.z for e in ev])[keep]

    for t_hit in trigger_times:
        x = float(np.interp(t_hit, times, xs))
        y = float(np.interp(t_hit, times, ys))
        z = float(np.interp(t_hit, times, zs))
        zf = z / max_z if max_z > 0 else 1.0
        voice = drum_voice_for_position(x, y)
        rate = 2.0 ** ((x - ev[0].x) * BEND_SEMITONES / 12.0)
        hit = _drum_oneshot(voice, sample_rate)
        if abs(rate - 1.0) > 1e-9:
            out_len = int(math.floor((len(hit) - 1) / rate)) + 1
            hit = np.interp(np.arange(out_len) * rate, np.arange(len(hit)), hit)
        i0 = int(round(t_hit * sample_rate))
        if i0 >= len(mix):
            continue
        i1 = min(i0 + len(hit), len(mix))
        chunk = hit[: i1 - i0] * NOTE_GAIN * zf
        mix[i0:i1] += chunk
        send_level = min(abs(y - ev[0].y), 1.0)
        if send_level > 0:
            send_bus[i0:i1] += chunk * send_level


def _karplus_strong(f_hz: float, n: int, sample_rate: int, rng: np.random.Generator) -> np.ndarray:
    period = max(2, int(round(sample_rate / f_hz)))
    line = rng.uniform(-1.0, 1.0, period)
    out = np.empty(n)
    pos = 0
    while pos < n:
        take = min(period, n - pos)
        out[pos : pos + take] = line[:take]
        line = KS_DAMPING * 0.5 * (line + np.roll(line, 1))
        pos += take
    return out


def _drum_oneshot(voice: str, sample_rate: int) -> np.ndarray:
    key = (voice, sample_rate)
    cached = _drum_cache.get(key)
    if cached is not None:
        return cached
    rng = np.random.default_rng(_DRUM_SEEDS[voice])
    if voice == "kick":
        t = np.arange(int(0.35 * sample_rate)) / sample_rate
        freq = 45.0 + 65.0 * np.exp(-t / 0.06)
        sig = np.sin(_phase(freq, sample_rate)) * np.exp(-t / 0.12)
    elif voice == "snare":
        t = np.arange(int(0.25 * sample_rate)) / sample_rate
        noise = rng.uniform(-1.0, 1.0, len(t))
        sig = 0.5 * np.sin(2.0 * math.pi * 185.0 * t) * np.exp(-t / 0.04)
        sig += 0.8 * noise * np.exp(-t / 0.07)
    elif voice == "hihat":
        t = np.arange(int(0.15 * sample_rate)) / sample_rate
        noise = rng.uniform(-1.0, 1.0, len(t))
        sig = (noise - _one_pole_lowpass(noise, 3000.0, sample_rate, passes=1)) * np.exp(-t / 0.025)
    elif voice == "crash":
        t = np.arange(int(0.9 * sample_rate)) / sample_rate
        noise = rng.uniform(-1.0, 1.0, len(t))
        sig = (noise - _one_pole_lowpass(noise, 1500.0, sample_rate, passes=1)) * np.exp(-t / 0.25)
    else:  # pragma: no cover
        raise ValueError(f"no drum voice {voice!r}")
    peak = np.max(np.abs(sig))
    if peak > 0:
        sig = sig / peak
    sig.flags.writeable = False
    _drum_cache[key] = sig
    return sig


def _feedback_delay(send: np.ndarray, sample_rate: int) -> np.ndarray:
    """Echo return of the send bus: repeats only, the dry signal excluded."""
    if not np.any(send):
        return np.zeros_like(send)
    d = max(1, int(round(DELAY_TIME_S * sample_rate)))
    out = np.zeros_like(send)
    for start in range(0, len(send), d):
        end = min(start + d, len(send))
        out[start:end] = send[start:end]
        if start >= d:
            out[start:end] += DELAY_FEEDBACK * out[start - d : end - d]
    return out - send

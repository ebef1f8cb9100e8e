"""The eight instrument definitions and their touch-to-control mappings.

Each instrument declares which control targets its touch inputs drive:
the touch-down position (x, y) and, during a swipe, the signed offsets
(dx, dy) from that anchor. Control frames produced here are consumed by
the offline renderer and mirror what a live synth would receive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import TouchEvent

__all__ = [
    "InstrumentSpec",
    "SynthState",
    "ControlFrame",
    "UnknownInstrumentError",
    "INSTRUMENT_SPECS",
    "BEND_SEMITONES",
    "get_instrument",
    "semitone_for_x",
    "frequency_for_semitone",
    "pitch_hz_for_x",
    "bend_ratio",
    "drum_voice_for_position",
    "volume_for_y",
    "map_touch",
]

#: Full-scale pitch-bend width: dx = +-1 area width sweeps +-2 semitones.
BEND_SEMITONES = 2.0


class UnknownInstrumentError(ValueError):
    """No instrument with that name is configured."""


@dataclass(frozen=True)
class InstrumentSpec:
    """Declarative description of one instrument.

    ``pitch_register`` is a [low, high] semitone span (MIDI-style numbers);
    the mapping tuples name the control targets each input drives.
    """

    name: str
    pitch_register: tuple[int, int]
    synthesis_method: str
    x_targets: tuple[str, ...]
    y_targets: tuple[str, ...]
    dx_targets: tuple[str, ...] = ("pitch_bend",)
    dy_targets: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        low, high = self.pitch_register
        if low >= high:
            raise ValueError(f"{self.name}: register low must be below high")


INSTRUMENT_SPECS: dict[str, InstrumentSpec] = {
    spec.name: spec
    for spec in (
        InstrumentSpec(
            name="chirp",
            pitch_register=(48, 84),
            synthesis_method="sine",
            x_targets=("pitch",),
            y_targets=("lower_octave_mix",),
        ),
        InstrumentSpec(
            name="drums",
            pitch_register=(36, 60),
            synthesis_method="drum_kit",
            x_targets=("drum_quadrant",),
            y_targets=("drum_quadrant",),
            dy_targets=("reverb_delay_send",),
        ),
        InstrumentSpec(
            name="fmlead",
            pitch_register=(24, 48),
            synthesis_method="fm_2op",
            x_targets=("pitch",),
            y_targets=("volume",),
            dy_targets=("lower_octave_mix", "reverb_delay_send"),
        ),
        InstrumentSpec(
            name="keys",
            pitch_register=(48, 84),
            synthesis_method="phase_mod",
            x_targets=("pitch",),
            y_targets=("volume",),
            dy_targets=("modulation",),
        ),
        InstrumentSpec(
            name="pad",
            pitch_register=(36, 72),
            synthesis_method="sawtooth_pad",
            x_targets=("pitch",),
            y_targets=("volume",),
            dy_targets=("tremolo", "reverb_delay_send"),
        ),
        InstrumentSpec(
            name="quack",
            pitch_register=(48, 84),
            synthesis_method="wave_packet",
            x_targets=("pitch",),
            y_targets=("timbre",),
        ),
        InstrumentSpec(
            name="strings",
            pitch_register=(48, 84),
            synthesis_method="plucked_string",
            x_targets=("pitch",),
            y_targets=("volume",),
            dy_targets=("reverb_delay_send",),
        ),
        InstrumentSpec(
            name="wub",
            pitch_register=(24, 48),
            synthesis_method="tremolo_bass",
            x_targets=("pitch", "timbre"),
            y_targets=("tremolo", "timbre"),
        ),
    )
}


def get_instrument(name: str) -> InstrumentSpec:
    try:
        return INSTRUMENT_SPECS[name]
    except KeyError:
        raise UnknownInstrumentError(f"unknown instrument {name!r}") from None


def semitone_for_x(spec: InstrumentSpec, x: float) -> int:
    """Map x in [0, 1] linearly onto the register, rounded to a semitone.

    Rounding is half-up so the mapping is monotone non-decreasing in x.
    """
    low, high = spec.pitch_register
    return int(math.floor(low + x * (high - low) + 0.5))


def frequency_for_semitone(semitone: float) -> float:
    return 440.0 * 2.0 ** ((semitone - 69) / 12.0)


def pitch_hz_for_x(spec: InstrumentSpec, x: float) -> float:
    return frequency_for_semitone(semitone_for_x(spec, x))


def bend_ratio(dx: float) -> float:
    return 2.0 ** (dx * BEND_SEMITONES / 12.0)


def drum_voice_for_position(x: float, y: float) -> str:
    """Quadrant lookup for the drum kit; boundaries go to the right/lower side."""
    if y < 0.5:
        return "hihat" if x < 0.5 else "crash"
    return "kick" if x < 0.5 else "snare"


def volume_for_y(y: float) -> float:
    # Louder towards the top of the area, never fully silent.
    return 0.2 + 0.8 * (1.0 - min(max(y, 0.0), 1.0))


@dataclass(frozen=True)
class SynthState:
    """Per-gesture tracking: the touch-down anchor and the current offsets."""

    anchor_x: float = 0.0
    anchor_y: float = 0.0
    dx: float = 0.0
    dy: float = 0.0
    active: bool = False


@dataclass(frozen=True)
class ControlFrame:
    """Synth control values derived from one touch event.

    ``sends`` holds normalized control levels in [0, 1] keyed by target
    name ("reverb_delay_send", "tremolo", "modulation", "lower_octave_mix",
    "timbre"); the renderer interprets each per instrument (for "wub" the
    tremolo value is a rate control rather than a depth).
    """

    pitch_hz: float | None
    amplitude: float
    bend_ratio: float
    sends: dict[str, float] = field(default_factory=dict)
    drum_voice: str | None = None
    trigger: bool = False


def _clip01(v: float) -> float:
    return min(max(v, 0.0), 1.0)


def map_touch(
    instrument: InstrumentSpec | str,
    event: TouchEvent,
    state: SynthState | None = None,
) -> tuple[ControlFrame, SynthState]:
    """Turn one touch event into a control frame and the next gesture state.

    A touch-down resets the anchor and triggers a note-on; a touch-moved
    updates bend and effect sends from the offsets to the anchor. Raises
    :class:`UnknownInstrumentError` for an unconfigured instrument name and
    ``ValueError`` for a touch-moved with no preceding touch-down.
    """
    spec = get_instrument(instrument) if isinstance(instrument, str) else instrument

    if event.moving == 0:
        state = SynthState(anchor_x=event.x, anchor_y=event.y, dx=0.0, dy=0.0, active=True)
        trigger = True
    else:
        if state is None or not state.active:
            raise ValueError("touch-moved event with no active touch-down")
        state = SynthState(
            anchor_x=state.anchor_x,
            anchor_y=state.anchor_y,
            dx=event.x - state.anchor_x,
            dy=event.y - state.anchor_y,
            active=True,
        )
        trigger = False

    sends: dict[str, float] = {}
    if "lower_octave_mix" in spec.y_targets:
        sends["lower_octave_mix"] = 0.4 * _clip01(event.y)
    if "lower_octave_mix" in spec.dy_targets:
        sends["lower_octave_mix"] = 0.5 * _clip01(abs(state.dy))
    if "reverb_delay_send" in spec.dy_targets:
        sends["reverb_delay_send"] = _clip01(abs(state.dy))
    if "modulation" in spec.dy_targets:
        sends["modulation"] = _clip01(abs(state.dy))
    if "tremolo" in spec.dy_targets:
        sends["tremolo"] = _clip01(abs(state.dy))
    if "tremolo" in spec.y_targets:
        sends["tremolo"] = _clip01(event.y)
    if "timbre" in spec.y_targets and "timbre" in spec.x_targets:
        sends["timbre"] = _clip01(0.5 * (event.x + event.y))
    elif "timbre" in spec.y_targets:
        sends["timbre"] = _clip01(event.y)

    is_drum = "drum_quadrant" in spec.x_targets
    pitch = None if is_drum else pitch_hz_for_x(spec, state.anchor_x)
    frame = ControlFrame(
        pitch_hz=pitch,
        amplitude=volume_for_y(event.y) if "volume" in spec.y_targets else 1.0,
        bend_ratio=bend_ratio(state.dx) if "pitch_bend" in spec.dx_targets else 1.0,
        sends=sends,
        drum_voice=drum_voice_for_position(event.x, event.y) if is_drum else None,
        trigger=trigger,
    )
    return frame, state

"""PCM audio buffers and WAV (16-bit signed little-endian mono) encoding."""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["DEFAULT_SAMPLE_RATE", "AudioBuffer", "to_wav_bytes", "write_wav", "from_wav_bytes"]

DEFAULT_SAMPLE_RATE = 44100


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio: float samples in [-1, 1] at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def to_wav_bytes(buf: AudioBuffer) -> bytes:
    pcm = np.clip(buf.samples, -1.0, 1.0)
    pcm16 = np.rint(pcm * 32767.0).astype("<i2")
    out = io.BytesIO()
    with wave.open(out, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(buf.sample_rate)
        wav.writeframes(pcm16.tobytes())
    return out.getvalue()


def write_wav(buf: AudioBuffer, path: str | Path) -> None:
    Path(path).write_bytes(to_wav_bytes(buf))


def from_wav_bytes(data: bytes) -> AudioBuffer:
    with wave.open(io.BytesIO(data), "rb") as wav:
        if wav.getnchannels() != 1 or wav.getsampwidth() != 2:
            raise ValueError("expected mono 16-bit PCM")
        rate = wav.getframerate()
        raw = wav.readframes(wav.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32767.0
    return AudioBuffer(samples=samples, sample_rate=rate)

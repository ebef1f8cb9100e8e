// Touch-to-control arithmetic for the live preview synth. Mirrors the
// server's mapping so what you hear while recording matches the render.

import { Instrument } from "./model.js";

export const REGISTERS: Record<Instrument, [number, number]> = {
  chirp: [48, 84],
  drums: [36, 60],
  fmlead: [24, 48],
  keys: [48, 84],
  pad: [36, 72],
  quack: [48, 84],
  strings: [48, 84],
  wub: [24, 48],
};

export const BEND_SEMITONES = 2;

export function semitoneForX(instrument: Instrument, x: number): number {
  const [low, high] = REGISTERS[instrument];
  return Math.floor(low + x * (high - low) + 0.5);
}

export function frequencyForSemitone(semitone: number): number {
  return 440 * Math.pow(2, (semitone - 69) / 12);
}

export function pitchHzForX(instrument: Instrument, x: number): number {
  return frequencyForSemitone(semitoneForX(instrument, x));
}

export function bendRatio(dx: number): number {
  return Math.pow(2, (dx * BEND_SEMITONES) / 12);
}

export type DrumVoice = "hihat" | "crash" | "kick" | "snare";

/** Quadrant lookup; boundaries resolve to the right/lower side. */
export function drumVoice(x: number, y: number): DrumVoice {
  if (y < 0.5) {
    return x < 0.5 ? "hihat" : "crash";
  }
  return x < 0.5 ? "kick" : "snare";
}

export function volumeForY(y: number): number {
  return 0.2 + 0.8 * (1 - Math.min(Math.max(y, 0), 1));
}

// Lightweight WebAudio preview so performing feels immediate. The
// authoritative sound is always the server render fetched after submit;
// this only has to track pitch/volume/bend with the right mapping.

import { Instrument } from "./model.js";
import { bendRatio, drumVoice, pitchHzForX, volumeForY } from "./mapping.js";

const WAVEFORMS: Record<Instrument, OscillatorType> = {
  chirp: "sine",
  drums: "square",
  fmlead: "sawtooth",
  keys: "triangle",
  pad: "sawtooth",
  quack: "square",
  strings: "triangle",
  wub: "sawtooth",
};

const DRUM_HZ = { kick: 70, snare: 190, hihat: 900, crash: 500 };

const ATTACK_S = 0.005;
const RELEASE_S = 0.12;

export class PreviewSynth {
  private ctx: AudioContext | null = null;
  private osc: OscillatorNode | null = null;
  private gain: GainNode | null = null;
  private baseHz = 440;

  private ensureContext(): AudioContext | null {
    if (this.ctx) {
      return this.ctx;
    }
    const Ctor = (globalThis as any).AudioContext ?? (globalThis as any).webkitAudioContext;
    if (!Ctor) {
      return null; // not a browser; preview silently disabled
    }
    this.ctx = new Ctor();
    return this.ctx;
  }

  noteOn(instrument: Instrument, x: number, y: number): void {
    const ctx = this.ensureContext();
    if (!ctx) {
      return;
    }
    if (ctx.state === "suspended") {
      void ctx.resume();
    }
    this.noteOff();
    const osc = ctx.createOscillator();
    const gain = ctx.createGain();
    osc.type = WAVEFORMS[instrument];
    if (instrument === "drums") {
      this.baseHz = DRUM_HZ[drumVoice(x, y)];
    } else {
      this.baseHz = pitchHzForX(instrument, x);
    }
    osc.frequency.value = this.baseHz;
    const level = 0.25 * volumeForY(y);
    gain.gain.setValueAtTime(0, ctx.currentTime);
    gain.gain.linearRampToValueAtTime(level, ctx.currentTime + ATTACK_S);
    osc.connect(gain).connect(ctx.destination);
    osc.start();
    this.osc = osc;
    this.gain = gain;
    if (instrument === "drums") {
      // percussive preview: short blip instead of a held tone
      gain.gain.setTargetAtTime(0, ctx.currentTime + 0.03, 0.02);
    }
  }

  move(dx: number, _dy: number, y: number): void {
    if (!this.ctx || !this.osc || !this.gain) {
      return;
    }
    this.osc.frequency.setTargetAtTime(this.baseHz * bendRatio(dx), this.ctx.currentTime, 0.01);
    this.gain.gain.setTargetAtTime(0.25 * volumeForY(y), this.ctx.currentTime, 0.02);
  }

  noteOff(): void {
    if (!this.ctx || !this.osc || !this.gain) {
      return;
    }
    const { osc, gain, ctx } = { osc: this.osc, gain: this.gain, ctx: this.ctx };
    gain.gain.setTargetAtTime(0, ctx.currentTime, RELEASE_S / 4);
    osc.stop(ctx.currentTime + RELEASE_S);
    this.osc = null;
    this.gain = null;
  }
}

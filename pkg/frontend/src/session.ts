// Recording state machine. The clock anchors at the first touch-down and
// capture hard-stops once five seconds of event time have passed; only one
// pointer is tracked at a time (extra simultaneous touches are ignored).

import { Instrument, MAX_DURATION_S, TouchSample, q6, validateEvents } from "./model.js";

export type RecordingState = "idle" | "recording" | "done";

export interface PointerSample {
  kind: "down" | "move" | "up";
  pointerId: number;
  /** Position already normalized to the square area, [0, 1]. */
  x: number;
  y: number;
  /** Device pressure; pass 1.0 when the device reports none. */
  pressure: number;
  timeMs: number;
}

export class JamSession {
  instrument: Instrument = "chirp";
  parentId: string | null = null;
  state: RecordingState = "idle";
  readonly events: TouchSample[] = [];

  private startMs: number | null = null;
  private activePointer: number | null = null;

  /** Wall-clock moment recording will auto-stop, or null before it starts. */
  get deadlineMs(): number | null {
    return this.startMs === null ? null : this.startMs + MAX_DURATION_S * 1000;
  }

  get elapsedS(): number {
    return this.events.length === 0 ? 0 : this.events[this.events.length - 1].time;
  }

  reset(): void {
    this.state = "idle";
    this.events.length = 0;
    this.startMs = null;
    this.activePointer = null;
  }

  /** Close the recording (play/share time); no further events are captured. */
  finish(): void {
    if (this.state === "recording") {
      this.state = "done";
      this.activePointer = null;
    }
  }

  /**
   * Feed one pointer sample; returns the captured touch event, or null when
   * the sample is ignored (wrong pointer, out of area, or past the cutoff).
   */
  process(sample: PointerSample): TouchSample | null {
    if (sample.kind === "up") {
      if (sample.pointerId === this.activePointer) {
        this.activePointer = null;
      }
      return null;
    }
    if (this.state === "done") {
      return null;
    }
    if (sample.kind === "down") {
      if (sample.x < 0 || sample.x > 1 || sample.y < 0 || sample.y > 1) {
        return null; // outside the performance area
      }
      if (this.activePointer !== null) {
        return null; // a second simultaneous touch
      }
      if (this.state === "idle") {
        this.state = "recording";
        this.startMs = sample.timeMs;
      }
      const time = this.eventTime(sample.timeMs);
      if (time === null) {
        return null;
      }
      this.activePointer = sample.pointerId;
      return this.push(time, sample, 0);
    }
    // moved
    if (this.state !== "recording" || sample.pointerId !== this.activePointer) {
      return null;
    }
    const time = this.eventTime(sample.timeMs);
    if (time === null) {
      return null;
    }
    return this.push(time, sample, 1);
  }

  validate(): string[] {
    return validateEvents(this.events);
  }

  private eventTime(timeMs: number): number | null {
    const raw = (timeMs - (this.startMs as number)) / 1000;
    if (raw > MAX_DURATION_S) {
      this.state = "done";
      this.activePointer = null;
      return null;
    }
    let time = q6(Math.max(raw, 0));
    if (time > MAX_DURATION_S) {
      time = MAX_DURATION_S;
    }
    const last = this.events[this.events.length - 1];
    if (last && time < last.time) {
      time = last.time; // guards against non-monotonic event timestamps
    }
    return time;
  }

  private push(time: number, sample: PointerSample, moving: 0 | 1): TouchSample {
    const event: TouchSample = {
      time,
      x: q6(clamp01(sample.x)),
      y: q6(clamp01(sample.y)),
      z: q6(sample.pressure > 0 ? sample.pressure : 1.0),
      moving,
    };
    this.events.push(event);
    return event;
  }
}

function clamp01(v: number): number {
  return Math.min(Math.max(v, 0), 1);
}

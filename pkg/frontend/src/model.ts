// Client-side mirror of the server's interchange format and validation
// rules, so everything we submit is guaranteed to pass server validation.

export interface TouchSample {
  time: number;
  x: number;
  y: number;
  z: number;
  moving: 0 | 1;
}

export const MAX_DURATION_S = 5.0;
export const CSV_HEADER = "time,x,y,z,moving";

export const INSTRUMENTS = [
  "chirp",
  "drums",
  "fmlead",
  "keys",
  "pad",
  "quack",
  "strings",
  "wub",
] as const;

export type Instrument = (typeof INSTRUMENTS)[number];

/** Quantize to the 6-decimal precision the CSV format carries. */
export function q6(value: number): number {
  return Math.round(value * 1e6) / 1e6;
}

export function toCsv(events: readonly TouchSample[]): string {
  const lines = [CSV_HEADER];
  for (const e of events) {
    lines.push(
      `${e.time.toFixed(6)},${e.x.toFixed(6)},${e.y.toFixed(6)},${e.z.toFixed(6)},${e.moving}`,
    );
  }
  return lines.join("\n") + "\n";
}

/** Same checks the server applies; an empty list means the events are valid. */
export function validateEvents(events: readonly TouchSample[]): string[] {
  const out: string[] = [];
  events.forEach((e, i) => {
    if (!(Number.isFinite(e.time) && e.time >= 0 && e.time <= MAX_DURATION_S)) {
      out.push(`time out of range at index ${i}`);
    }
    if (!(Number.isFinite(e.x) && e.x >= 0 && e.x <= 1)) {
      out.push(`x out of range at index ${i}`);
    }
    if (!(Number.isFinite(e.y) && e.y >= 0 && e.y <= 1)) {
      out.push(`y out of range at index ${i}`);
    }
    if (!(Number.isFinite(e.z) && e.z >= 0)) {
      out.push(`z out of range at index ${i}`);
    }
    if (e.moving !== 0 && e.moving !== 1) {
      out.push(`moving flag not 0/1 at index ${i}`);
    }
  });
  if (events.length > 0) {
    if (events[0].moving !== 0) {
      out.push("performance begins mid-swipe");
    }
    for (let i = 1; i < events.length; i++) {
      if (events[i].time < events[i - 1].time) {
        out.push(`non-monotonic time at index ${i}`);
      }
    }
    const duration = events[events.length - 1].time - events[0].time;
    if (duration > MAX_DURATION_S) {
      out.push(`duration ${duration.toFixed(6)}s exceeds ${MAX_DURATION_S}s`);
    }
  }
  return out;
}

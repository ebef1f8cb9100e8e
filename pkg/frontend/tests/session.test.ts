import { describe, expect, test } from "vitest";

import { JamSession, PointerSample } from "../src/session.js";

function pointer(
  kind: PointerSample["kind"],
  timeMs: number,
  x = 0.5,
  y = 0.5,
  pointerId = 1,
  pressure = 1,
): PointerSample {
  return { kind, pointerId, x, y, pressure, timeMs };
}

/** Scripted scribble: wiggle for `seconds` at ~60 Hz starting at t0. */
function scribble(session: JamSession, seconds: number, t0 = 1000): void {
  session.process(pointer("down", t0, 0.5, 0.5));
  const steps = Math.round(seconds * 60);
  for (let i = 1; i <= steps; i++) {
    const t = t0 + (i * seconds * 1000) / steps;
    const x = 0.5 + 0.3 * Math.sin(i / 8);
    const y = 0.5 + 0.3 * Math.cos(i / 11);
    session.process(pointer("move", t, x, y));
  }
  session.process(pointer("up", t0 + seconds * 1000 + 1));
}

describe("recording clock", () => {
  test("clock anchors at the first touch", () => {
    const session = new JamSession();
    expect(session.state).toBe("idle");
    const first = session.process(pointer("down", 5000));
    expect(session.state).toBe("recording");
    expect(first).toMatchObject({ time: 0, x: 0.5, y: 0.5, moving: 0 });
    const moved = session.process(pointer("move", 5100, 0.6, 0.5));
    expect(moved).toMatchObject({ time: 0.1, moving: 1 });
  });

  test("a three-second scribble spans three seconds of event time", () => {
    const session = new JamSession();
    scribble(session, 3.0);
    expect(session.state).toBe("recording");
    expect(session.elapsedS).toBeCloseTo(3.0, 2);
    expect(session.validate()).toEqual([]);
  });

  test("six seconds of swiping is cut at 5.000 s", () => {
    const session = new JamSession();
    scribble(session, 6.0);
    expect(session.state).toBe("done");
    expect(session.elapsedS).toBeLessThanOrEqual(5.0);
    expect(session.events.length).toBeGreaterThan(250);
    expect(session.validate()).toEqual([]);
  });

  test("no events captured after done", () => {
    const session = new JamSession();
    scribble(session, 6.0);
    const extra = session.process(pointer("down", 20000));
    expect(extra).toBeNull();
    expect(session.elapsedS).toBeLessThanOrEqual(5.0);
  });
});

describe("single-touch rule", () => {
  test("second simultaneous pointer is ignored", () => {
    const session = new JamSession();
    session.process(pointer("down", 1000, 0.5, 0.5, 1));
    const second = session.process(pointer("down", 1050, 0.2, 0.2, 2));
    expect(second).toBeNull();
    const secondMove = session.process(pointer("move", 1080, 0.25, 0.2, 2));
    expect(secondMove).toBeNull();
    const firstMove = session.process(pointer("move", 1100, 0.6, 0.5, 1));
    expect(firstMove).not.toBeNull();
    expect(session.events).toHaveLength(2);
  });

  test("after lift the next pointer becomes the tracked one", () => {
    const session = new JamSession();
    session.process(pointer("down", 1000, 0.5, 0.5, 1));
    session.process(pointer("up", 1200, 0.5, 0.5, 1));
    const next = session.process(pointer("down", 1400, 0.3, 0.3, 2));
    expect(next).toMatchObject({ moving: 0, time: 0.4 });
  });
});

describe("coordinates", () => {
  test("downs outside the area are ignored", () => {
    const session = new JamSession();
    expect(session.process(pointer("down", 1000, 1.2, 0.5))).toBeNull();
    expect(session.state).toBe("idle");
  });

  test("moves that drift outside are clamped to the edge", () => {
    const session = new JamSession();
    session.process(pointer("down", 1000, 0.9, 0.9));
    const moved = session.process(pointer("move", 1050, 1.4, -0.2));
    expect(moved).toMatchObject({ x: 1, y: 0 });
    expect(session.validate()).toEqual([]);
  });

  test("mouse pressure defaults to 1.0", () => {
    const session = new JamSession();
    const event = session.process(pointer("down", 1000, 0.5, 0.5, 1, 0));
    expect(event?.z).toBe(1.0);
  });
});

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { KeyState, startInputLoop } from "../src/input.js";

describe("KeyState", () => {
  it("maps WASD to thrust and rudder", () => {
    const k = new KeyState();
    k.press("W");
    expect(k.thrust()).toBe(1);
    k.press("s");
    expect(k.thrust()).toBe(0); // both held cancel
    k.release("W");
    expect(k.thrust()).toBe(-1);
    k.press("a");
    expect(k.rudder()).toBe(1);
    k.press("d");
    expect(k.rudder()).toBe(0);
  });

  it("builds protocol messages", () => {
    const k = new KeyState();
    k.press("w");
    k.press("d");
    expect(k.message(2)).toEqual({ type: "input", id: 2, thrust: 1, rudder: -1 });
  });
});

describe("startInputLoop", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("sends one message per poll interval while keys are held", () => {
    const k = new KeyState();
    const sent: unknown[] = [];
    const loop = startInputLoop(k, (m) => sent.push(m), 0, 100);
    k.press("w");
    vi.advanceTimersByTime(350);
    expect(sent.length).toBe(3);
    expect(sent[0]).toEqual({ type: "input", id: 0, thrust: 1, rudder: 0 });
    loop.stop();
  });

  it("sends a single zero message on release, then goes quiet", () => {
    const k = new KeyState();
    const sent: { thrust: number }[] = [];
    const loop = startInputLoop(k, (m) => sent.push(m), 0, 100);
    k.press("w");
    vi.advanceTimersByTime(200);
    k.release("w");
    vi.advanceTimersByTime(400);
    const zeros = sent.filter((m) => m.thrust === 0);
    expect(zeros.length).toBe(1);
    loop.stop();
  });
});

import { describe, expect, it } from "vitest";

import {
  InputPump,
  KeyboardSource,
  PointerDragSource,
  PointerLockHead,
  clampAxis,
  gamepadSnapshot,
  inputGauges,
  neutralSnapshot,
  pedalFromAxis,
  wheelSnapshot,
  type InputMsg,
} from "../src/inputs.js";

describe("clampAxis", () => {
  it("clamps into the axis range and zeroes non-finite values", () => {
    expect(clampAxis(0.5)).toBe(0.5);
    expect(clampAxis(2)).toBe(1);
    expect(clampAxis(-2)).toBe(-1);
    expect(clampAxis(Number.NaN)).toBe(0);
    expect(clampAxis(Number.POSITIVE_INFINITY)).toBe(0);
    expect(clampAxis(0.9, 0, 1)).toBe(0.9);
    expect(clampAxis(-0.2, 0, 1)).toBe(0);
  });
});

describe("KeyboardSource", () => {
  it("maps bound codes to channels and ignores the rest", () => {
    const kb = new KeyboardSource();
    expect(kb.keydown("KeyW")).toBe(true);
    expect(kb.keydown("ArrowLeft")).toBe(true);
    expect(kb.keydown("KeyQ")).toBe(false);
    expect(kb.snapshot().buttons).toEqual({
      steer_left: true,
      steer_right: false,
      throttle: true,
      brake: false,
    });
    expect(kb.keyup("KeyW")).toBe(true);
    expect(kb.snapshot().buttons.throttle).toBe(false);
  });

  it("treats space as brake and releaseAll as full neutral", () => {
    const kb = new KeyboardSource();
    kb.keydown("Space");
    expect(kb.snapshot().buttons.brake).toBe(true);
    kb.keydown("KeyD");
    kb.releaseAll();
    expect(kb.snapshot().buttons).toEqual({
      steer_left: false,
      steer_right: false,
      throttle: false,
      brake: false,
    });
  });
});

describe("PointerDragSource", () => {
  it("normalizes drag offsets against the half span", () => {
    const src = new PointerDragSource(100);
    expect(src.snapshot().axes).toEqual({ drag_x: 0, drag_y: 0 });
    src.press(200, 200);
    src.move(250, 200);
    expect(src.snapshot().axes).toEqual({ drag_x: 0.5, drag_y: 0 });
    src.move(200, 280);
    expect(src.snapshot().axes).toEqual({ drag_x: 0, drag_y: 0.8 });
    src.move(200, -200);
    expect(src.snapshot().axes.drag_y).toBe(-1);
  });

  it("returns to neutral on release", () => {
    const src = new PointerDragSource(100);
    src.press(0, 0);
    src.move(70, 0);
    expect(src.dragging).toBe(true);
    src.release();
    expect(src.dragging).toBe(false);
    expect(src.snapshot().axes).toEqual({ drag_x: 0, drag_y: 0 });
  });
});

describe("device snapshots", () => {
  it("keeps gamepad stick sign and clamps triggers to 0..1", () => {
    expect(gamepadSnapshot(0.5, 1.0, 0.0).axes).toEqual({
      stick_x: 0.5,
      trigger_throttle: 1,
      trigger_brake: 0,
    });
    expect(gamepadSnapshot(-2, -0.5, 1.5).axes).toEqual({
      stick_x: -1,
      trigger_throttle: 0,
      trigger_brake: 1,
    });
  });

  it("converts the wheel axis to counterclockwise-positive degrees", () => {
    expect(wheelSnapshot(0.5, 0.3, 0).axes).toEqual({
      angle_deg: -225,
      pedal_throttle: 0.3,
      pedal_brake: 0,
    });
    expect(wheelSnapshot(-1, 0, 1).axes.angle_deg).toBe(450);
  });

  it("folds released-high pedal hardware into 0..1", () => {
    expect(pedalFromAxis(1)).toBe(0);
    expect(pedalFromAxis(-1)).toBe(1);
    expect(pedalFromAxis(0)).toBe(0.5);
  });
});

describe("inputGauges", () => {
  it("shows keyboard channels as binary extents", () => {
    const snap = { axes: {}, buttons: { steer_left: true, throttle: true, brake: false } };
    expect(inputGauges(snap, "keyboard")).toEqual({ steer: 1, throttle: 1, brake: 0 });
  });

  it("negates right-positive axes into the left-positive display", () => {
    expect(inputGauges({ axes: { stick_x: 0.4 }, buttons: {} }, "gamepad").steer).toBeCloseTo(-0.4);
    expect(inputGauges({ axes: { drag_x: -1, drag_y: 0.6 }, buttons: {} }, "mouse")).toEqual({
      steer: 1,
      throttle: 0,
      brake: 0.6,
    });
    expect(inputGauges({ axes: { angle_deg: -225 }, buttons: {} }, "wheel").steer).toBe(-0.5);
  });
});

describe("PointerLockHead", () => {
  it("accumulates yaw opposite the drag and clamps pitch", () => {
    const head = new PointerLockHead(0.003);
    head.addMovement(100, 0);
    expect(head.pose().yaw).toBeCloseTo(-0.3);
    head.addMovement(0, -1000);
    expect(head.pose().pitch).toBe(1.2);
    head.reset();
    expect(head.pose()).toEqual({ yaw: 0, pitch: 0 });
  });
});

describe("InputPump", () => {
  function pump(): { pump: InputPump; sent: InputMsg[] } {
    const sent: InputMsg[] = [];
    return { pump: new InputPump("gamepad", "s1", (m) => sent.push(m)), sent };
  }

  it("sends one message per tick with strictly increasing seq", () => {
    const { pump: p, sent } = pump();
    const snap = gamepadSnapshot(0.1, 0.5, 0);
    p.tick(snap, 16.7);
    p.tick(snap, 33.4);
    expect(sent.map((m) => m.seq)).toEqual([1, 2]);
    expect(sent[0]).toMatchObject({
      type: "input",
      session_id: "s1",
      device: "gamepad",
      t_us: 16700,
    });
    expect(p.lastSeq).toBe(2);
    expect(p.sentCount).toBe(2);
  });

  it("emits exactly one neutral after device loss, then goes quiet", () => {
    const { pump: p, sent } = pump();
    p.tick(gamepadSnapshot(0.8, 1, 0), 10);
    expect(p.tick(null, 20)).toBeNull();
    expect(sent).toHaveLength(1);
    p.deviceLost();
    const neutral = p.tick(null, 30);
    expect(neutral).not.toBeNull();
    expect(neutral!.axes).toEqual(neutralSnapshot().axes);
    expect(neutral!.buttons).toEqual({});
    expect(p.tick(null, 40)).toBeNull();
    expect(p.tick(null, 50)).toBeNull();
    expect(sent).toHaveLength(2);
    expect(sent[1]!.seq).toBe(2);
  });

  it("attaches the head pose only when one is given", () => {
    const { pump: p, sent } = pump();
    p.tick(gamepadSnapshot(0, 0, 0), 10, { yaw: 0.2, pitch: -0.1 });
    p.tick(gamepadSnapshot(0, 0, 0), 20);
    expect(sent[0]!.head).toEqual({ yaw: 0.2, pitch: -0.1 });
    expect(sent[1]!.head).toBeUndefined();
  });

  it("never sends negative timestamps", () => {
    const { pump: p, sent } = pump();
    p.tick(gamepadSnapshot(0, 0, 0), -5);
    expect(sent[0]!.t_us).toBe(0);
  });
});

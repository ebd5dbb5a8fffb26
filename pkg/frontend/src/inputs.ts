/** Device capture for the driver session.
 *
 * The cockpit sends raw, normalized device snapshots; every gain, deadzone,
 * ramp, and decay lives server-side so a run is reproducible from its logged
 * input events alone. Steering convention downstream is +1 = full left, with
 * right-positive device axes negated by the server, so values here keep the
 * device's native sign.
 */

import type { Modality } from "./config.js";

export interface InputSnapshot {
  axes: Record<string, number>;
  buttons: Record<string, boolean>;
}

export interface HeadPose {
  yaw: number;
  pitch: number;
}

export interface InputMsg {
  type: "input";
  session_id: string;
  seq: number;
  t_us: number;
  device: Modality;
  axes: Record<string, number>;
  buttons: Record<string, boolean>;
  head?: HeadPose;
}

export const WHEEL_FULL_SCALE_DEG = 450;

/** Clamp to [lo, hi]; NaN and infinities become 0 so nothing non-finite ever
 * reaches the wire, whose codec rejects such values. */
export function clampAxis(value: number, lo = -1, hi = 1): number {
  if (!Number.isFinite(value)) return 0;
  return Math.min(hi, Math.max(lo, value));
}

/** Empty snapshot: the server treats absent channels as released/centered. */
export function neutralSnapshot(): InputSnapshot {
  return { axes: {}, buttons: {} };
}

const KEY_BINDINGS: Record<string, string> = {
  ArrowLeft: "steer_left",
  KeyA: "steer_left",
  ArrowRight: "steer_right",
  KeyD: "steer_right",
  ArrowUp: "throttle",
  KeyW: "throttle",
  ArrowDown: "brake",
  KeyS: "brake",
  Space: "brake",
};

/** Held-key state; the server integrates these booleans into ramped channels. */
export class KeyboardSource {
  private down = new Set<string>();

  /** Returns true when the code is a cockpit binding (caller preventDefaults). */
  keydown(code: string): boolean {
    const channel = KEY_BINDINGS[code];
    if (channel === undefined) return false;
    this.down.add(channel);
    return true;
  }

  keyup(code: string): boolean {
    const channel = KEY_BINDINGS[code];
    if (channel === undefined) return false;
    this.down.delete(channel);
    return true;
  }

  releaseAll(): void {
    this.down.clear();
  }

  snapshot(): InputSnapshot {
    return {
      axes: {},
      buttons: {
        steer_left: this.down.has("steer_left"),
        steer_right: this.down.has("steer_right"),
        throttle: this.down.has("throttle"),
        brake: this.down.has("brake"),
      },
    };
  }
}

/** Drag vector from the button-press anchor, right/down positive, normalized
 * by `halfSpanPx` (the pixel distance that means full deflection). */
export class PointerDragSource {
  private anchor: [number, number] | null = null;
  private current: [number, number] | null = null;

  constructor(private halfSpanPx: number) {
    if (!(halfSpanPx > 0)) throw new Error("halfSpanPx must be > 0");
  }

  press(x: number, y: number): void {
    this.anchor = [x, y];
    this.current = [x, y];
  }

  move(x: number, y: number): void {
    if (this.anchor !== null) this.current = [x, y];
  }

  release(): void {
    this.anchor = null;
    this.current = null;
  }

  get dragging(): boolean {
    return this.anchor !== null;
  }

  snapshot(): InputSnapshot {
    if (this.anchor === null || this.current === null) {
      return { axes: { drag_x: 0, drag_y: 0 }, buttons: {} };
    }
    return {
      axes: {
        drag_x: clampAxis((this.current[0] - this.anchor[0]) / this.halfSpanPx),
        drag_y: clampAxis((this.current[1] - this.anchor[1]) / this.halfSpanPx),
      },
      buttons: {},
    };
  }
}

/** Normalize a Gamepad API sample: stick x stays signed (right positive),
 * triggers map to [0, 1]. */
export function gamepadSnapshot(
  stickX: number,
  triggerThrottle: number,
  triggerBrake: number,
): InputSnapshot {
  return {
    axes: {
      stick_x: clampAxis(stickX),
      trigger_throttle: clampAxis(triggerThrottle, 0, 1),
      trigger_brake: clampAxis(triggerBrake, 0, 1),
    },
    buttons: {},
  };
}

/** Racing wheels report their steering axis in [-1, 1] with clockwise (a
 * right turn) positive; the wire format wants degrees, counterclockwise
 * positive, so the sign flips here. */
export function wheelSnapshot(
  steeringAxis: number,
  pedalThrottle: number,
  pedalBrake: number,
  fullScaleDeg = WHEEL_FULL_SCALE_DEG,
): InputSnapshot {
  return {
    axes: {
      angle_deg: -clampAxis(steeringAxis) * fullScaleDeg,
      pedal_throttle: clampAxis(pedalThrottle, 0, 1),
      pedal_brake: clampAxis(pedalBrake, 0, 1),
    },
    buttons: {},
  };
}

/** Pedal hardware reports 1.0 released down to -1.0 floored; fold to 0..1. */
export function pedalFromAxis(raw: number): number {
  return clampAxis((1 - raw) / 2, 0, 1);
}

/** Raw-input gauges for the HUD, in the gateway's sign convention (steering
 * left-positive, pedals 0..1). Display only; command mapping stays server
 * side. */
export function inputGauges(
  snapshot: InputSnapshot,
  device: Modality,
  fullScaleDeg = WHEEL_FULL_SCALE_DEG,
): { steer: number; throttle: number; brake: number } {
  const a = snapshot.axes;
  const b = snapshot.buttons;
  switch (device) {
    case "keyboard":
      return {
        steer: (b.steer_left ? 1 : 0) - (b.steer_right ? 1 : 0),
        throttle: b.throttle ? 1 : 0,
        brake: b.brake ? 1 : 0,
      };
    case "mouse":
      return {
        steer: -(a.drag_x ?? 0),
        throttle: Math.max(0, -(a.drag_y ?? 0)),
        brake: Math.max(0, a.drag_y ?? 0),
      };
    case "gamepad":
      return {
        steer: -(a.stick_x ?? 0),
        throttle: a.trigger_throttle ?? 0,
        brake: a.trigger_brake ?? 0,
      };
    case "wheel":
      return {
        steer: clampAxis((a.angle_deg ?? 0) / fullScaleDeg),
        throttle: a.pedal_throttle ?? 0,
        brake: a.pedal_brake ?? 0,
      };
  }
}

/** Accumulated pointer-lock head pose for the hmd_dynamic view. */
export class PointerLockHead {
  private yawRad = 0;
  private pitchRad = 0;

  constructor(private radPerPx = 0.003) {}

  addMovement(dxPx: number, dyPx: number): void {
    this.yawRad -= dxPx * this.radPerPx; // drag right looks right (yaw negative)
    this.pitchRad = clampAxis(this.pitchRad - dyPx * this.radPerPx, -1.2, 1.2);
  }

  reset(): void {
    this.yawRad = 0;
    this.pitchRad = 0;
  }

  pose(): HeadPose {
    return { yaw: this.yawRad, pitch: this.pitchRad };
  }
}

/** Serializes driver snapshots, at most one message per animation frame,
 * with a strictly increasing seq the gateway echoes back as frame ack_seq. */
export class InputPump {
  private seq = 0;
  private neutralPending = false;
  sentCount = 0;

  constructor(
    private device: Modality,
    private sessionId: string,
    private send: (msg: InputMsg) => void,
  ) {}

  get lastSeq(): number {
    return this.seq;
  }

  /** Queue a one-shot neutral event (device unplugged, window blurred). */
  deviceLost(): void {
    this.neutralPending = true;
  }

  /** Emit this animation frame's event. Pass null when the device is gone:
   * exactly one neutral event goes out, then silence until it returns. */
  tick(snapshot: InputSnapshot | null, tMs: number, head?: HeadPose): InputMsg | null {
    let body: InputSnapshot;
    if (snapshot !== null) {
      this.neutralPending = false;
      body = snapshot;
    } else if (this.neutralPending) {
      this.neutralPending = false;
      body = neutralSnapshot();
    } else {
      return null;
    }
    this.seq += 1;
    const msg: InputMsg = {
      type: "input",
      session_id: this.sessionId,
      seq: this.seq,
      t_us: Math.max(0, Math.round(tMs * 1000)),
      device: this.device,
      axes: body.axes,
      buttons: body.buttons,
    };
    if (head !== undefined) msg.head = head;
    this.sentCount += 1;
    this.send(msg);
    return msg;
  }
}

import { describe, expect, it } from "vitest";

import { parseMessage } from "../src/protocol.js";

const frame = {
  type: "frame",
  tick: 12,
  t: 0.4,
  phase: "running",
  vehicles: [
    {
      vehicle_id: "ego",
      pose: { x: 1.0, y: 2.0, heading: 0.5 },
      speed: 3.0,
      accel: -1.0,
      origin: "digital",
    },
  ],
  warnings: ["peer"],
};

describe("parseMessage", () => {
  it("accepts a well-formed frame", () => {
    const msg = parseMessage(JSON.stringify(frame));
    expect(msg).not.toBeNull();
    if (msg?.type !== "frame") throw new Error("wrong type");
    expect(msg.tick).toBe(12);
    expect(msg.vehicles[0]!.pose.x).toBe(1.0);
    expect(msg.warnings).toEqual(["peer"]);
    expect(msg.ack_seq).toBeUndefined();
  });

  it("accepts a frame with a numeric ack_seq", () => {
    const msg = parseMessage(JSON.stringify({ ...frame, ack_seq: 41 }));
    if (msg?.type !== "frame") throw new Error("wrong type");
    expect(msg.ack_seq).toBe(41);
  });

  it("accepts a scene message", () => {
    const scene = {
      type: "scene",
      name: "crossing",
      mode: "cav",
      map: {
        lanes: [{ points: [[0, 0], [200, 0]], width: 3.7 }],
        intersections: [[[110, -10], [130, -10], [130, 10], [110, 10]]],
      },
    };
    const msg = parseMessage(JSON.stringify(scene));
    if (msg?.type !== "scene") throw new Error("wrong type");
    expect(msg.map.lanes[0]!.width).toBe(3.7);
    expect(msg.map.intersections[0]!.length).toBe(4);
  });

  it("accepts ack, warning, and result messages", () => {
    expect(
      parseMessage(JSON.stringify({ type: "ack", accepted: true, session_id: "s1", role: "driver" })),
    ).toMatchObject({ type: "ack", accepted: true });
    expect(
      parseMessage(JSON.stringify({ type: "ack", accepted: false, errors: ["missing: 4"] })),
    ).toMatchObject({ accepted: false, errors: ["missing: 4"] });
    expect(
      parseMessage(JSON.stringify({ type: "warning", t: 1.5, source_id: "peer", active: true })),
    ).toMatchObject({ type: "warning", source_id: "peer" });
    expect(
      parseMessage(JSON.stringify({ type: "result", report: { completed: true } })),
    ).toMatchObject({ type: "result" });
  });

  it("returns null for malformed payloads", () => {
    expect(parseMessage("{nope")).toBeNull();
    expect(parseMessage("3")).toBeNull();
    expect(parseMessage(JSON.stringify({ type: "mystery" }))).toBeNull();
    expect(parseMessage(JSON.stringify({ ...frame, tick: "12" }))).toBeNull();
    expect(parseMessage(JSON.stringify({ ...frame, vehicles: {} }))).toBeNull();
    expect(parseMessage(JSON.stringify({ ...frame, warnings: [7] }))).toBeNull();
  });

  it("rejects frames with non-numeric vehicle fields", () => {
    const bad = {
      ...frame,
      vehicles: [{ ...frame.vehicles[0], speed: "fast" }],
    };
    expect(parseMessage(JSON.stringify(bad))).toBeNull();
  });

  it("rejects scenes with malformed lane points", () => {
    const bad = {
      type: "scene",
      name: "x",
      mode: "av",
      map: { lanes: [{ points: [[0]], width: 3.7 }], intersections: [] },
    };
    expect(parseMessage(JSON.stringify(bad))).toBeNull();
  });
});

import { describe, expect, it } from "vitest";

import { FrameBuffer } from "../src/frames.js";
import type { FrameMsg } from "../src/protocol.js";

function frame(tick: number): FrameMsg {
  return { type: "frame", tick, t: tick * 0.02, phase: "running", vehicles: [], warnings: [] };
}

describe("FrameBuffer", () => {
  it("hands over the frame exactly once", () => {
    const buf = new FrameBuffer();
    expect(buf.take()).toBeNull();
    buf.push(frame(1));
    expect(buf.take()?.tick).toBe(1);
    expect(buf.take()).toBeNull();
  });

  it("keeps only the newest frame and counts the drops", () => {
    const buf = new FrameBuffer();
    buf.push(frame(1));
    buf.push(frame(2));
    buf.push(frame(3));
    expect(buf.take()?.tick).toBe(3);
    expect(buf.dropped).toBe(2);
    buf.push(frame(4));
    expect(buf.dropped).toBe(2);
    expect(buf.take()?.tick).toBe(4);
  });
});

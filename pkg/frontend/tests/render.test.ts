import { describe, expect, it } from "vitest";

import type { FrameMsg } from "../src/protocol.js";
import {
  cameraFor,
  findEgo,
  formatSpeed,
  vehicleCorners,
  viewFovScale,
  worldToScreen,
  type Camera,
} from "../src/render.js";

describe("viewFovScale", () => {
  it("widens only the triple view", () => {
    expect(viewFovScale("single")).toBe(1);
    expect(viewFovScale("hmd_static")).toBe(1);
    expect(viewFovScale("hmd_dynamic")).toBe(1);
    expect(viewFovScale("triple")).toBe(3);
  });
});

describe("cameraFor", () => {
  const ego = { x: 50, y: -3, heading: 0.4 };

  it("follows the ego heading-up", () => {
    const cam = cameraFor("single", ego, 0.25, 6);
    expect(cam).toEqual({ x: 50, y: -3, yaw: 0.4, pxPerM: 6 });
  });

  it("adds the head yaw only in the dynamic hmd view", () => {
    expect(cameraFor("hmd_static", ego, 0.25, 6).yaw).toBeCloseTo(0.4);
    expect(cameraFor("hmd_dynamic", ego, 0.25, 6).yaw).toBeCloseTo(0.65);
  });

  it("zooms out threefold for the triple view", () => {
    expect(cameraFor("triple", ego, 0, 6).pxPerM).toBe(2);
  });

  it("falls back to a north-up overview with no ego", () => {
    const cam = cameraFor("single", null, 0.5, 6, [120, 10]);
    expect(cam.x).toBe(120);
    expect(cam.y).toBe(10);
    expect(cam.yaw).toBeCloseTo(Math.PI / 2);
  });
});

describe("worldToScreen", () => {
  const cam: Camera = { x: 0, y: 0, yaw: Math.PI / 2, pxPerM: 2 };

  it("puts the camera position at the screen center", () => {
    expect(worldToScreen(0, 0, cam, 400, 300)).toEqual([200, 150]);
  });

  it("maps forward to up and left to left", () => {
    const [fx, fy] = worldToScreen(0, 10, cam, 400, 300);
    expect(fx).toBeCloseTo(200);
    expect(fy).toBeCloseTo(130);
    const [lx, ly] = worldToScreen(-10, 0, cam, 400, 300);
    expect(lx).toBeCloseTo(180);
    expect(ly).toBeCloseTo(150);
  });

  it("respects a rotated camera", () => {
    const east: Camera = { x: 100, y: 0, yaw: 0, pxPerM: 1 };
    const [x, y] = worldToScreen(110, 0, east, 200, 200);
    expect(x).toBeCloseTo(100);
    expect(y).toBeCloseTo(90);
    const [lx2] = worldToScreen(100, 5, east, 200, 200);
    expect(lx2).toBeCloseTo(95);
  });
});

describe("vehicleCorners", () => {
  it("builds an axis-aligned footprint at heading zero", () => {
    const corners = vehicleCorners(0, 0, 0, 4, 2);
    expect(corners).toEqual([
      [2, 1],
      [2, -1],
      [-2, -1],
      [-2, 1],
    ]);
  });

  it("rotates the footprint with the heading", () => {
    const corners = vehicleCorners(10, 20, Math.PI / 2, 4, 2);
    const expected = [
      [9, 22],
      [11, 22],
      [11, 18],
      [9, 18],
    ];
    corners.forEach(([x, y], i) => {
      expect(x).toBeCloseTo(expected[i]![0]!);
      expect(y).toBeCloseTo(expected[i]![1]!);
    });
  });
});

describe("hud helpers", () => {
  it("formats speed in km/h", () => {
    expect(formatSpeed(10)).toBe("36.0 km/h");
    expect(formatSpeed(0)).toBe("0.0 km/h");
  });

  it("finds the ego vehicle in a frame", () => {
    const frame: FrameMsg = {
      type: "frame",
      tick: 1,
      t: 0.02,
      phase: "running",
      vehicles: [
        {
          vehicle_id: "peer",
          pose: { x: 0, y: 0, heading: 0 },
          speed: 1,
          accel: 0,
          origin: "digital",
        },
        {
          vehicle_id: "ego",
          pose: { x: 5, y: 0, heading: 0 },
          speed: 2,
          accel: 0,
          origin: "digital",
        },
      ],
      warnings: [],
    };
    expect(findEgo(frame)?.speed).toBe(2);
    expect(findEgo({ ...frame, vehicles: [] })).toBeNull();
  });
});

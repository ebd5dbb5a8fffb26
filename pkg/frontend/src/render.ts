/** Top-down canvas rendering. Every pose, speed, and warning drawn here comes
 * straight out of a gateway frame; the client computes projection only. */

import type { View } from "./config.js";
import type { FrameMsg, SceneMsg, VehicleSummary } from "./protocol.js";

export const EGO_ID = "ego";

export interface Camera {
  x: number;
  y: number;
  /** world heading that points toward the top of the screen */
  yaw: number;
  pxPerM: number;
}

/** The triple view trades magnification for width; HMD views stay 1:1. */
export function viewFovScale(view: View): number {
  return view === "triple" ? 3 : 1;
}

export function cameraFor(
  view: View,
  ego: { x: number; y: number; heading: number } | null,
  headYaw: number,
  zoomPxPerM: number,
  fallbackCenter: [number, number] = [0, 0],
): Camera {
  const pxPerM = zoomPxPerM / viewFovScale(view);
  if (ego === null) {
    return { x: fallbackCenter[0], y: fallbackCenter[1], yaw: Math.PI / 2, pxPerM };
  }
  const yaw = view === "hmd_dynamic" ? ego.heading + headYaw : ego.heading;
  return { x: ego.x, y: ego.y, yaw, pxPerM };
}

/** World (x up-east, y up-north, CCW headings) to screen (y down), camera
 * forward rendered upward. */
export function worldToScreen(
  px: number,
  py: number,
  cam: Camera,
  width: number,
  height: number,
): [number, number] {
  const dx = px - cam.x;
  const dy = py - cam.y;
  const forward = dx * Math.cos(cam.yaw) + dy * Math.sin(cam.yaw);
  const left = -dx * Math.sin(cam.yaw) + dy * Math.cos(cam.yaw);
  return [width / 2 - left * cam.pxPerM, height / 2 - forward * cam.pxPerM];
}

export function vehicleCorners(
  x: number,
  y: number,
  heading: number,
  length: number,
  width: number,
): [number, number][] {
  const hl = length / 2;
  const hw = width / 2;
  const c = Math.cos(heading);
  const s = Math.sin(heading);
  const local: [number, number][] = [
    [hl, hw],
    [hl, -hw],
    [-hl, -hw],
    [-hl, hw],
  ];
  return local.map(([lx, ly]) => [x + lx * c - ly * s, y + lx * s + ly * c]);
}

export function formatSpeed(mps: number): string {
  return `${(mps * 3.6).toFixed(1)} km/h`;
}

export function findEgo(frame: FrameMsg): VehicleSummary | null {
  return frame.vehicles.find((v) => v.vehicle_id === EGO_ID) ?? null;
}

const COLORS = {
  background: "#101418",
  lane: "#2a323c",
  laneEdge: "#3d4854",
  intersection: "#22303a",
  ego: "#4cc9f0",
  egoPhysical: "#80ed99",
  peer: "#f4a259",
  warningVehicle: "#e63946",
  label: "#c9d4de",
};

function tracePolygon(
  ctx: CanvasRenderingContext2D,
  points: [number, number][],
  cam: Camera,
  w: number,
  h: number,
): void {
  ctx.beginPath();
  points.forEach(([px, py], i) => {
    const [sx, sy] = worldToScreen(px, py, cam, w, h);
    if (i === 0) ctx.moveTo(sx, sy);
    else ctx.lineTo(sx, sy);
  });
  ctx.closePath();
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  scene: SceneMsg | null,
  frame: FrameMsg | null,
  cam: Camera,
  w: number,
  h: number,
): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, w, h);
  if (scene !== null) {
    for (const lane of scene.map.lanes) {
      ctx.strokeStyle = COLORS.lane;
      ctx.lineWidth = lane.width * cam.pxPerM;
      ctx.lineCap = "butt";
      ctx.beginPath();
      lane.points.forEach(([px, py], i) => {
        const [sx, sy] = worldToScreen(px, py, cam, w, h);
        if (i === 0) ctx.moveTo(sx, sy);
        else ctx.lineTo(sx, sy);
      });
      ctx.stroke();
      ctx.strokeStyle = COLORS.laneEdge;
      ctx.lineWidth = 1;
      ctx.stroke();
    }
    for (const poly of scene.map.intersections) {
      tracePolygon(ctx, poly, cam, w, h);
      ctx.fillStyle = COLORS.intersection;
      ctx.fill();
    }
  }
  if (frame !== null) {
    const warned = new Set(frame.warnings);
    for (const v of frame.vehicles) {
      // footprint size is not in the frame; draw the default footprint
      const corners = vehicleCorners(v.pose.x, v.pose.y, v.pose.heading, 5.2, 2.0);
      tracePolygon(ctx, corners, cam, w, h);
      ctx.fillStyle = warned.has(v.vehicle_id)
        ? COLORS.warningVehicle
        : v.vehicle_id === EGO_ID
          ? v.origin === "physical"
            ? COLORS.egoPhysical
            : COLORS.ego
          : COLORS.peer;
      ctx.fill();
      const [lx, ly] = worldToScreen(v.pose.x, v.pose.y, cam, w, h);
      ctx.fillStyle = COLORS.label;
      ctx.font = "11px system-ui, sans-serif";
      ctx.fillText(v.vehicle_id, lx + 8, ly - 8);
    }
  }
}

/** Gateway wire messages, one JSON object per websocket text frame, and the
 * validation applied before anything reaches rendering or input handling.
 * A message that fails validation is skipped and counted by the caller, the
 * same policy the server applies to inbound traffic. */

export interface Pose {
  x: number;
  y: number;
  heading: number;
}

export interface VehicleSummary {
  vehicle_id: string;
  pose: Pose;
  speed: number;
  accel: number;
  origin: string;
}

export interface FrameMsg {
  type: "frame";
  tick: number;
  t: number;
  phase: string;
  vehicles: VehicleSummary[];
  warnings: string[];
  ack_seq?: number;
}

export interface SceneLane {
  points: [number, number][];
  width: number;
}

export interface SceneMap {
  lanes: SceneLane[];
  intersections: [number, number][][];
}

export interface SceneMsg {
  type: "scene";
  name: string;
  mode: string;
  map: SceneMap;
}

export interface AckMsg {
  type: "ack";
  accepted: boolean;
  reason?: string;
  session_id?: string;
  role?: string;
  errors?: string[];
  scores?: Record<string, number>;
  overall?: number;
}

export interface WarningMsg {
  type: "warning";
  t: number;
  source_id: string;
  active: boolean;
}

export interface ResultMsg {
  type: "result";
  report: Record<string, unknown>;
}

export type GatewayMsg = FrameMsg | SceneMsg | AckMsg | WarningMsg | ResultMsg;

const isNum = (v: unknown): v is number =>
  typeof v === "number" && Number.isFinite(v);
const isStr = (v: unknown): v is string => typeof v === "string";
const isObj = (v: unknown): v is Record<string, unknown> =>
  typeof v === "object" && v !== null && !Array.isArray(v);

function isPose(v: unknown): v is Pose {
  return isObj(v) && isNum(v.x) && isNum(v.y) && isNum(v.heading);
}

function isVehicle(v: unknown): v is VehicleSummary {
  return (
    isObj(v) &&
    isStr(v.vehicle_id) &&
    isPose(v.pose) &&
    isNum(v.speed) &&
    isNum(v.accel) &&
    isStr(v.origin)
  );
}

function isPoint(v: unknown): v is [number, number] {
  return Array.isArray(v) && v.length === 2 && isNum(v[0]) && isNum(v[1]);
}

function isFrame(m: Record<string, unknown>): m is Record<string, unknown> & FrameMsg {
  return (
    isNum(m.tick) &&
    isNum(m.t) &&
    isStr(m.phase) &&
    Array.isArray(m.vehicles) &&
    m.vehicles.every(isVehicle) &&
    Array.isArray(m.warnings) &&
    m.warnings.every(isStr) &&
    (m.ack_seq === undefined || isNum(m.ack_seq))
  );
}

function isScene(m: Record<string, unknown>): m is Record<string, unknown> & SceneMsg {
  if (!isStr(m.name) || !isStr(m.mode) || !isObj(m.map)) return false;
  const map = m.map;
  return (
    Array.isArray(map.lanes) &&
    map.lanes.every(
      (lane: unknown) =>
        isObj(lane) &&
        Array.isArray(lane.points) &&
        lane.points.every(isPoint) &&
        isNum(lane.width),
    ) &&
    Array.isArray(map.intersections) &&
    map.intersections.every(
      (poly: unknown) => Array.isArray(poly) && poly.every(isPoint),
    )
  );
}

function isAck(m: Record<string, unknown>): m is Record<string, unknown> & AckMsg {
  return typeof m.accepted === "boolean";
}

function isWarning(m: Record<string, unknown>): m is Record<string, unknown> & WarningMsg {
  return isNum(m.t) && isStr(m.source_id);
}

/** Decode and validate one gateway message; null means malformed. */
export function parseMessage(raw: string): GatewayMsg | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (!isObj(data)) return null;
  switch (data.type) {
    case "frame":
      return isFrame(data) ? data : null;
    case "scene":
      return isScene(data) ? data : null;
    case "ack":
      return isAck(data) ? data : null;
    case "warning":
      return isWarning(data) ? data : null;
    case "result":
      return isObj(data.report) ? (data as Record<string, unknown> & ResultMsg) : null;
    default:
      return null;
  }
}

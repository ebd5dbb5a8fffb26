"""Behavior layer: perception, conflict prediction, and the three ego drivers
used in the crossing-conflict case study.

Three ways to meet the same scripted threat:

* AvController    sees only what its forward frustum catches, then slams the
                  panic brake (worst-case late reaction, hardest stop)
* CavController   additionally consumes V2X safety messages, so it schedules a
                  gentle stop long before the threat is visible
* PeerScript      the scripted antagonist: holds at its spawn until the ego
                  crosses a trigger arc length, then drives through the
                  intersection without yielding

Controllers are deterministic per-tick state machines over (own state, events,
params); they never touch wall clocks or shared globals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .scene import (
    ControlCommand,
    Point,
    Pose2D,
    VehicleConfig,
    VehicleState,
    arc_length_along,
    clamp_command,
    path_length,
    point_at_arc_length,
    project_onto_path,
    wrap_angle,
)
from .v2x import BasicSafetyMsg

# Perception frustum sized so that first sight of a crossing target forces a
# near-panic stop; the V2X radio (150 m) dwarfs it by design.
DEFAULT_FRUSTUM_RANGE_M = 25.0
DEFAULT_FRUSTUM_HALF_ANGLE_RAD = 1.05  # ~60 deg

# Conflict model shared by both controllers.
CORRIDOR_HALFWIDTH_M = 2.5  # lateral reach of the ego lane corridor
CONFLICT_HORIZON_S = 30.0  # how far ahead V2X awareness projects targets
PREDICTION_STEP_S = 0.05
COMFORT_TRIGGER_FRACTION = 0.9  # start braking once required decel reaches this
# fraction of the comfort ceiling

# Cruise regulation / path tracking.
THROTTLE_KP = 0.6  # per m/s of speed error
PURE_PURSUIT_MIN_LOOKAHEAD_M = 4.0
PURE_PURSUIT_GAIN_S = 0.8  # lookahead seconds per m/s
HOLD_BRAKE = 0.3  # parking brake once a planned stop completes


@dataclass(frozen=True, slots=True)
class SensorFrustum:
    range_m: float = DEFAULT_FRUSTUM_RANGE_M
    half_angle_rad: float = DEFAULT_FRUSTUM_HALF_ANGLE_RAD

    def __post_init__(self) -> None:
        if self.range_m <= 0:
            raise ValueError("range_m must be > 0")
        if not (0 < self.half_angle_rad <= math.pi):
            raise ValueError("half_angle_rad must be in (0, pi]")


@dataclass(frozen=True, slots=True)
class DetectionEvent:
    target_id: str
    pose: Pose2D
    speed: float
    via: str  # "perception" | "v2v"
    t_us: int


@dataclass(frozen=True, slots=True)
class ControllerParams:
    v_cruise: float = 9.5
    comfort_decel: float = 1.3  # m/s^2, planned-stop ceiling
    panic_brake: float = 1.0  # brake channel value for emergency stops
    conflict_margin: float = 3.0  # stop at least this far before the conflict point
    ttc_threshold: float = 3.0  # s, perception-triggered panic gate

    def __post_init__(self) -> None:
        if self.v_cruise <= 0:
            raise ValueError("v_cruise must be > 0")
        if self.comfort_decel <= 0:
            raise ValueError("comfort_decel must be > 0")
        if not (0.0 <= self.panic_brake <= 1.0):
            raise ValueError("panic_brake must be in [0, 1]")
        if self.conflict_margin < 0:
            raise ValueError("conflict_margin must be >= 0")
        if self.ttc_threshold <= 0:
            raise ValueError("ttc_threshold must be > 0")


def perceive(
    ego: VehicleState,
    targets: Iterable[VehicleState],
    frustum: SensorFrustum,
    now_us: int,
) -> list[DetectionEvent]:
    """Range-and-bearing gate: a target is detected iff it lies within the
    closed frustum boundary (dist <= range and |bearing| <= half angle)."""
    out: list[DetectionEvent] = []
    for target in targets:
        if target.vehicle_id == ego.vehicle_id:
            continue
        dx = target.pose.x - ego.pose.x
        dy = target.pose.y - ego.pose.y
        dist = math.hypot(dx, dy)
        if dist > frustum.range_m:
            continue
        if dist > 0.0:
            bearing = wrap_angle(math.atan2(dy, dx) - ego.pose.heading)
            if abs(bearing) > frustum.half_angle_rad:
                continue
        out.append(
            DetectionEvent(
                target_id=target.vehicle_id,
                pose=target.pose,
                speed=target.speed,
                via="perception",
                t_us=now_us,
            )
        )
    return out


def predict_corridor_entry(
    pose: Pose2D,
    speed: float,
    ego_path: Sequence[Point],
    min_s: float,
    horizon_s: float,
    halfwidth: float = CORRIDOR_HALFWIDTH_M,
) -> float | None:
    """Seconds until a constant-velocity target enters the ego lane corridor
    ahead of arc length min_s, or None if it never does within the horizon.

    The corridor is the set of points within `halfwidth` lateral meters of the
    ego path. A target already inside (and ahead) returns 0.0.
    """
    vx = speed * math.cos(pose.heading)
    vy = speed * math.sin(pose.heading)
    if speed < 0.05:
        s, d = project_onto_path(ego_path, (pose.x, pose.y))
        return 0.0 if (d <= halfwidth and s >= min_s) else None
    t = 0.0
    while t <= horizon_s:
        px = pose.x + vx * t
        py = pose.y + vy * t
        s, d = project_onto_path(ego_path, (px, py))
        if d <= halfwidth and s >= min_s:
            return t
        t += PREDICTION_STEP_S
    return None


def _pure_pursuit_steering(state: VehicleState, path: Sequence[Point], config: VehicleConfig) -> float:
    s_ego = arc_length_along(path, (state.pose.x, state.pose.y))
    lookahead = max(PURE_PURSUIT_MIN_LOOKAHEAD_M, PURE_PURSUIT_GAIN_S * state.speed)
    tx, ty = point_at_arc_length(path, s_ego + lookahead)
    alpha = wrap_angle(math.atan2(ty - state.pose.y, tx - state.pose.x) - state.pose.heading)
    delta = math.atan2(2.0 * config.wheelbase * math.sin(alpha), lookahead)
    return max(-1.0, min(1.0, delta / config.max_steer_angle))


def _cruise_throttle(speed: float, v_cruise: float) -> float:
    return max(0.0, min(1.0, THROTTLE_KP * (v_cruise - speed)))


class AvController:
    """Perception-only ego. Cruises on its path; a detected target whose
    projected motion crosses the lane corridor within ttc_threshold commits an
    unrecoverable panic stop (brake held until the vehicle is at rest)."""

    def __init__(
        self,
        params: ControllerParams,
        config: VehicleConfig,
        ego_path: Sequence[Point],
        conflict_point_s: float | None = None,
    ) -> None:
        self.params = params
        self.config = config
        self.ego_path = list(ego_path)
        self.conflict_point_s = conflict_point_s
        self.committed = False
        self.first_conflict_t_us: int | None = None
        path_length(self.ego_path)  # validates

    def step(
        self,
        ego: VehicleState,
        detections: Sequence[DetectionEvent],
        now_us: int,
        v2v_msgs: Iterable[BasicSafetyMsg] = (),  # unused: this driver is not connected
    ) -> ControlCommand:
        if not self.committed:
            s_ego = arc_length_along(self.ego_path, (ego.pose.x, ego.pose.y))
            for det in detections:
                entry = predict_corridor_entry(
                    det.pose, det.speed, self.ego_path, s_ego, horizon_s=self.params.ttc_threshold
                )
                if entry is not None:
                    self.committed = True
                    if self.first_conflict_t_us is None:
                        self.first_conflict_t_us = now_us
                    break
        if self.committed:
            if ego.speed <= 0.0:
                return clamp_command(0.0, 0.0, max(HOLD_BRAKE, self.params.panic_brake), now_us)
            return clamp_command(
                _pure_pursuit_steering(ego, self.ego_path, self.config),
                0.0,
                self.params.panic_brake,
                now_us,
            )
        return clamp_command(
            _pure_pursuit_steering(ego, self.ego_path, self.config),
            _cruise_throttle(ego.speed, self.params.v_cruise),
            0.0,
            now_us,
        )


class CavController:
    """Connected ego. Keeps a max-seq track per V2X sender, treats tracks and
    perception detections alike, and on first awareness of a conflicting
    target plans a stop conflict_margin short of the conflict point:

        required_decel = v^2 / (2 * (s_conflict - s_ego - margin))

    Braking starts once required_decel reaches a comfort-trigger fraction of
    comfort_decel and is recomputed every tick, so the commanded level only
    exceeds the comfort ceiling when geometry forces it. Once committed the
    stop completes even if the threat clears first. A conflict first noticed
    past the conflict point falls back to the panic stop.
    """

    def __init__(
        self,
        params: ControllerParams,
        config: VehicleConfig,
        ego_path: Sequence[Point],
        conflict_point_s: float,
    ) -> None:
        self.params = params
        self.config = config
        self.ego_path = list(ego_path)
        self.conflict_point_s = float(conflict_point_s)
        self.tracks: dict[str, BasicSafetyMsg] = {}
        self.committed = False
        self.panic = False
        self.first_conflict_t_us: int | None = None
        path_length(self.ego_path)

    def ingest_v2v(self, msgs: Iterable[BasicSafetyMsg]) -> None:
        for msg in msgs:
            held = self.tracks.get(msg.sender_id)
            if held is None or msg.seq > held.seq:
                self.tracks[msg.sender_id] = msg

    def _conflicting(self, ego_id: str, s_ego: float, detections: Sequence[DetectionEvent]) -> bool:
        sources: list[tuple[str, Pose2D, float]] = [
            (t.sender_id, t.pose, t.speed) for t in self.tracks.values()
        ]
        sources.extend((d.target_id, d.pose, d.speed) for d in detections)
        for target_id, pose, speed in sources:
            if target_id == ego_id:
                continue
            entry = predict_corridor_entry(
                pose, speed, self.ego_path, s_ego, horizon_s=CONFLICT_HORIZON_S
            )
            if entry is not None:
                return True
        return False

    def step(
        self,
        ego: VehicleState,
        detections: Sequence[DetectionEvent],
        now_us: int,
        v2v_msgs: Iterable[BasicSafetyMsg] = (),
    ) -> ControlCommand:
        self.ingest_v2v(v2v_msgs)
        s_ego = arc_length_along(self.ego_path, (ego.pose.x, ego.pose.y))

        if not self.committed and self._conflicting(ego.vehicle_id, s_ego, detections):
            remaining = self.conflict_point_s - s_ego - self.params.conflict_margin
            if remaining <= 0.0:
                self.committed = True
                self.panic = True
                if self.first_conflict_t_us is None:
                    self.first_conflict_t_us = now_us
            else:
                required = ego.speed * ego.speed / (2.0 * remaining)
                if self.first_conflict_t_us is None:
                    self.first_conflict_t_us = now_us
                if required >= COMFORT_TRIGGER_FRACTION * self.params.comfort_decel:
                    self.committed = True

        if self.committed:
            if ego.speed <= 0.0:
                return clamp_command(0.0, 0.0, HOLD_BRAKE, now_us)
            if self.panic:
                brake = self.params.panic_brake
            else:
                remaining = self.conflict_point_s - s_ego - self.params.conflict_margin
                if remaining <= 0.0:
                    brake = self.params.panic_brake
                else:
                    required = ego.speed * ego.speed / (2.0 * remaining)
                    brake = min(1.0, required / self.config.b_max)
            return clamp_command(
                _pure_pursuit_steering(ego, self.ego_path, self.config), 0.0, brake, now_us
            )
        return clamp_command(
            _pure_pursuit_steering(ego, self.ego_path, self.config),
            _cruise_throttle(ego.speed, self.params.v_cruise),
            0.0,
            now_us,
        )


class PeerScript:
    """Scripted crossing traffic. Holds at spawn until the ego's arc length
    reaches trigger_s (closed boundary), then accelerates along its own path
    toward target_speed and never yields."""

    def __init__(
        self,
        peer_path: Sequence[Point],
        trigger_s: float,
        target_speed: float,
        config: VehicleConfig,
    ) -> None:
        self.peer_path = list(peer_path)
        self.trigger_s = float(trigger_s)
        self.target_speed = float(target_speed)
        self.config = config
        self.launched = False
        self.launch_t_us: int | None = None
        path_length(self.peer_path)
        if target_speed <= 0:
            raise ValueError("target_speed must be > 0")

    def step(self, peer: VehicleState, ego_progress_s: float, now_us: int) -> ControlCommand:
        if not self.launched and ego_progress_s >= self.trigger_s:
            self.launched = True
            self.launch_t_us = now_us
        if not self.launched:
            return clamp_command(0.0, 0.0, 1.0, now_us)
        return clamp_command(
            _pure_pursuit_steering(peer, self.peer_path, self.config),
            _cruise_throttle(peer.speed, self.target_speed),
            0.0,
            now_us,
        )


__all__ = [
    "SensorFrustum",
    "DetectionEvent",
    "ControllerParams",
    "perceive",
    "predict_corridor_entry",
    "AvController",
    "CavController",
    "PeerScript",
    "DEFAULT_FRUSTUM_RANGE_M",
    "DEFAULT_FRUSTUM_HALF_ANGLE_RAD",
    "CORRIDOR_HALFWIDTH_M",
    "CONFLICT_HORIZON_S",
    "COMFORT_TRIGGER_FRACTION",
]

"""Core scene types and planar geometry shared by every other module.

Conventions used throughout the package:

* world frame is a right-handed plane, x east, y north, heading in radians
  counter-clockwise from +x, always normalized to (-pi, pi]
* distances are meters, speeds m/s, timestamps integer microseconds
* steering command +1 means full left (counter-clockwise yaw for forward motion)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

TAU = math.tau

Point = tuple[float, float]

VALID_ORIGINS = ("physical", "virtual")


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.remainder(a, TAU)
    if a <= -math.pi:
        a += TAU
    return a


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Pose2D:
    x: float
    y: float
    heading: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.heading)):
            raise ValueError("non-finite pose")
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    def forward(self) -> Point:
        return (math.cos(self.heading), math.sin(self.heading))

    def distance_to(self, other: "Pose2D") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)


@dataclass(frozen=True, slots=True)
class VehicleState:
    """Snapshot of one vehicle, either measured (physical) or simulated (virtual)."""

    vehicle_id: str
    pose: Pose2D
    speed: float
    yaw_rate: float
    accel: float
    timestamp: int  # microseconds
    origin: str = "virtual"

    def __post_init__(self) -> None:
        if not self.vehicle_id:
            raise ValueError("empty vehicle_id")
        if self.speed < 0 or not math.isfinite(self.speed):
            raise ValueError("speed must be finite and >= 0")
        if not (math.isfinite(self.yaw_rate) and math.isfinite(self.accel)):
            raise ValueError("non-finite state")
        if self.timestamp < 0:
            raise ValueError("negative timestamp")
        if self.origin not in VALID_ORIGINS:
            raise ValueError(f"origin must be one of {VALID_ORIGINS}")


@dataclass(frozen=True, slots=True)
class ControlCommand:
    """Actuation request. Construction enforces ranges; use clamp_command to sanitize."""

    steering: float  # [-1, 1], +1 = full left
    throttle: float  # [0, 1]
    brake: float  # [0, 1]
    timestamp: int = 0
    seq: int = 0

    def __post_init__(self) -> None:
        if not (-1.0 <= self.steering <= 1.0):
            raise ValueError("steering out of range")
        if not (0.0 <= self.throttle <= 1.0):
            raise ValueError("throttle out of range")
        if not (0.0 <= self.brake <= 1.0):
            raise ValueError("brake out of range")
        if self.timestamp < 0 or self.seq < 0:
            raise ValueError("timestamp and seq must be non-negative")


def _clamp_channel(value: float, lo: float, hi: float) -> float:
    # NaN compares false everywhere, map it to neutral
    if math.isnan(value):
        return 0.0
    return min(hi, max(lo, value))


def clamp_command(
    steering: float,
    throttle: float,
    brake: float,
    timestamp: int = 0,
    seq: int = 0,
) -> ControlCommand:
    """Coerce raw channel values into a valid ControlCommand.

    Out-of-range values saturate, NaN maps to neutral 0. Idempotent.
    """
    return ControlCommand(
        steering=_clamp_channel(steering, -1.0, 1.0),
        throttle=_clamp_channel(throttle, 0.0, 1.0),
        brake=_clamp_channel(brake, 0.0, 1.0),
        timestamp=timestamp,
        seq=seq,
    )


@dataclass(frozen=True, slots=True)
class VehicleConfig:
    """Physical parameters of one vehicle. Footprint is a length x width rectangle
    centered on the pose; length must exceed wheelbase."""

    wheelbase: float = 3.0
    max_steer_angle: float = 0.55  # rad, road wheel angle at full steering command
    a_max: float = 2.4  # m/s^2, full-throttle acceleration floor
    b_max: float = 7.6  # m/s^2, full-brake deceleration
    drag_coeff: float = 0.0005  # 1/m, speed^2 drag term
    length: float = 5.2
    width: float = 2.0

    def __post_init__(self) -> None:
        for name in ("wheelbase", "max_steer_angle", "a_max", "b_max", "length", "width"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.drag_coeff < 0:
            raise ValueError("drag_coeff must be >= 0")
        if self.length <= self.wheelbase:
            raise ValueError("length must exceed wheelbase")


# ---------------------------------------------------------------------------
# road network
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lane:
    points: tuple[Point, ...]
    width: float = 3.7

    def __post_init__(self) -> None:
        pts = tuple((float(x), float(y)) for x, y in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError("lane polyline needs >= 2 points")
        if _polyline_length(pts) <= 0.0:
            raise ValueError("degenerate path")
        if self.width <= 0:
            raise ValueError("lane width must be > 0")


@dataclass(frozen=True)
class RoadNetwork:
    """Lane centerline polylines plus convex intersection (conflict) polygons."""

    lanes: tuple[Lane, ...] = ()
    intersections: tuple[tuple[Point, ...], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "lanes", tuple(self.lanes))
        polys = []
        for poly in self.intersections:
            pts = tuple((float(x), float(y)) for x, y in poly)
            if len(pts) < 3:
                raise ValueError("intersection polygon needs >= 3 points")
            if not _is_convex(pts):
                raise ValueError("intersection polygon must be convex")
            polys.append(pts)
        object.__setattr__(self, "intersections", tuple(polys))

    def to_dict(self) -> dict:
        return {
            "lanes": [{"points": [list(p) for p in ln.points], "width": ln.width} for ln in self.lanes],
            "intersections": [[list(p) for p in poly] for poly in self.intersections],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RoadNetwork":
        lanes = tuple(
            Lane(points=tuple((p[0], p[1]) for p in ln["points"]), width=ln.get("width", 3.7))
            for ln in data.get("lanes", [])
        )
        intersections = tuple(
            tuple((p[0], p[1]) for p in poly) for poly in data.get("intersections", [])
        )
        return cls(lanes=lanes, intersections=intersections)

    @classmethod
    def from_json(cls, text: str) -> "RoadNetwork":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# polyline geometry
# ---------------------------------------------------------------------------


def _polyline_length(points: Sequence[Point]) -> float:
    return sum(
        math.hypot(points[i + 1][0] - points[i][0], points[i + 1][1] - points[i][1])
        for i in range(len(points) - 1)
    )


def path_length(path: Sequence[Point]) -> float:
    if len(path) < 2:
        raise ValueError("degenerate path")
    return _polyline_length(path)


def project_onto_path(path: Sequence[Point], point: Point) -> tuple[float, float]:
    """Project a point onto a polyline.

    Returns (arc length of the nearest point, Euclidean distance to it).
    Ties resolve to the smallest arc length. Degenerate paths (under two
    points, or zero total length) raise ValueError.
    """
    if len(path) < 2 or _polyline_length(path) <= 0.0:
        raise ValueError("degenerate path")
    px, py = float(point[0]), float(point[1])
    best_d2 = math.inf
    best_s = 0.0
    s_base = 0.0
    for i in range(len(path) - 1):
        ax, ay = path[i]
        bx, by = path[i + 1]
        dx, dy = bx - ax, by - ay
        seg_len2 = dx * dx + dy * dy
        if seg_len2 == 0.0:
            t = 0.0
        else:
            t = (px - ax) * dx + (py - ay) * dy
            t = min(1.0, max(0.0, t / seg_len2))
        cx, cy = ax + t * dx, ay + t * dy
        d2 = (px - cx) ** 2 + (py - cy) ** 2
        if d2 < best_d2 - 1e-12:
            best_d2 = d2
            best_s = s_base + t * math.sqrt(seg_len2)
        s_base += math.sqrt(seg_len2)
    return best_s, math.sqrt(best_d2)


def arc_length_along(path: Sequence[Point], point: Point) -> float:
    """Arc length of the nearest point on the polyline to `point`."""
    return project_onto_path(path, point)[0]


def point_at_arc_length(path: Sequence[Point], s: float) -> Point:
    """Point on the polyline at arc length s, clamped to [0, total length]."""
    if len(path) < 2:
        raise ValueError("degenerate path")
    if s <= 0:
        return (float(path[0][0]), float(path[0][1]))
    remaining = s
    for i in range(len(path) - 1):
        ax, ay = path[i]
        bx, by = path[i + 1]
        seg = math.hypot(bx - ax, by - ay)
        if remaining <= seg and seg > 0:
            t = remaining / seg
            return (ax + t * (bx - ax), ay + t * (by - ay))
        remaining -= seg
    return (float(path[-1][0]), float(path[-1][1]))


def heading_at_arc_length(path: Sequence[Point], s: float) -> float:
    """Tangent heading of the polyline segment containing arc length s."""
    if len(path) < 2:
        raise ValueError("degenerate path")
    remaining = max(0.0, s)
    for i in range(len(path) - 1):
        ax, ay = path[i]
        bx, by = path[i + 1]
        seg = math.hypot(bx - ax, by - ay)
        if (remaining <= seg or i == len(path) - 2) and seg > 0:
            return math.atan2(by - ay, bx - ax)
        remaining -= seg
    raise ValueError("degenerate path")


# ---------------------------------------------------------------------------
# oriented rectangles
# ---------------------------------------------------------------------------


def rect_corners(pose: Pose2D, config: VehicleConfig) -> list[Point]:
    """Corners of the footprint rectangle, counter-clockwise."""
    hl, hw = config.length / 2.0, config.width / 2.0
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    out: list[Point] = []
    for lx, ly in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)):
        out.append((pose.x + lx * c - ly * s, pose.y + lx * s + ly * c))
    return out


def _axis_gap(corners_a: Sequence[Point], corners_b: Sequence[Point], axis: Point) -> float:
    """Signed gap between projections onto axis; > 0 means separated along it."""
    pa = [c[0] * axis[0] + c[1] * axis[1] for c in corners_a]
    pb = [c[0] * axis[0] + c[1] * axis[1] for c in corners_b]
    return max(min(pb) - max(pa), min(pa) - max(pb))


def _rect_axes(pose_a: Pose2D, pose_b: Pose2D) -> list[Point]:
    axes = []
    for h in (pose_a.heading, pose_b.heading):
        c, s = math.cos(h), math.sin(h)
        axes.append((c, s))
        axes.append((-s, c))
    return axes


def collision_check(
    pose_a: Pose2D, config_a: VehicleConfig, pose_b: Pose2D, config_b: VehicleConfig
) -> bool:
    """Overlap test between two oriented footprint rectangles.

    Separating-axis test over the four edge normals. Touching boundaries
    count as contact (closed sets). Symmetric in its arguments.
    """
    ca = rect_corners(pose_a, config_a)
    cb = rect_corners(pose_b, config_b)
    for axis in _rect_axes(pose_a, pose_b):
        if _axis_gap(ca, cb, axis) > 0.0:
            return False
    return True


def _point_segment_distance(p: Point, a: Point, b: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = min(1.0, max(0.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / seg_len2))
    return math.hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))


def rect_gap(
    pose_a: Pose2D, config_a: VehicleConfig, pose_b: Pose2D, config_b: VehicleConfig
) -> float:
    """Signed clearance between two footprint rectangles.

    Positive: minimum boundary-to-boundary distance. Zero: touching.
    Negative: penetration depth along the least-overlapped edge normal.
    """
    ca = rect_corners(pose_a, config_a)
    cb = rect_corners(pose_b, config_b)
    gaps = [_axis_gap(ca, cb, axis) for axis in _rect_axes(pose_a, pose_b)]
    if max(gaps) <= 0.0:
        # overlapping: penetration is the smallest translation that separates
        return max(gaps)
    best = math.inf
    for i in range(4):
        a0, a1 = ca[i], ca[(i + 1) % 4]
        for j in range(4):
            b0, b1 = cb[j], cb[(j + 1) % 4]
            best = min(best, _point_segment_distance(a0, b0, b1))
            best = min(best, _point_segment_distance(b0, a0, a1))
    return best


# ---------------------------------------------------------------------------
# convex polygons
# ---------------------------------------------------------------------------


def _is_convex(poly: Sequence[Point]) -> bool:
    n = len(poly)
    sign = 0
    area2 = 0.0
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        cx, cy = poly[(i + 2) % n]
        cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
        area2 += ax * by - bx * ay
        if abs(cross) > 1e-12:
            s = 1 if cross > 0 else -1
            if sign == 0:
                sign = s
            elif s != sign:
                return False
    return sign != 0 and abs(area2) > 1e-12


def point_in_convex_polygon(point: Point, poly: Sequence[Point]) -> bool:
    """Closed-boundary containment test for a convex polygon (either winding)."""
    n = len(poly)
    px, py = point
    sign = 0
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        if abs(cross) <= 1e-9:
            continue
        s = 1 if cross > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return True


def path_entry_arc_length(path: Sequence[Point], poly: Sequence[Point]) -> float | None:
    """Arc length at which the polyline first enters a convex polygon.

    Returns None when the path never touches the polygon. A path starting
    inside returns 0.0.
    """
    if len(path) < 2:
        raise ValueError("degenerate path")
    if point_in_convex_polygon(path[0], poly):
        return 0.0
    s_base = 0.0
    for i in range(len(path) - 1):
        a, b = path[i], path[i + 1]
        seg = math.hypot(b[0] - a[0], b[1] - a[1])
        if seg == 0.0:
            continue
        t_enter = _segment_polygon_entry(a, b, poly)
        if t_enter is not None:
            return s_base + t_enter * seg
        s_base += seg
    return None


def _segment_polygon_entry(a: Point, b: Point, poly: Sequence[Point]) -> float | None:
    """Parametric t in [0,1] where segment a->b enters the convex polygon."""
    # half-plane clipping; orient polygon counter-clockwise first
    n = len(poly)
    area2 = sum(poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1] for i in range(n))
    pts = list(poly) if area2 > 0 else list(reversed(poly))
    t0, t1 = 0.0, 1.0
    dx, dy = b[0] - a[0], b[1] - a[1]
    for i in range(n):
        ex, ey = pts[(i + 1) % n][0] - pts[i][0], pts[(i + 1) % n][1] - pts[i][1]
        # inside is to the left of each CCW edge
        nx, ny = -ey, ex
        denom = nx * dx + ny * dy
        num = nx * (pts[i][0] - a[0]) + ny * (pts[i][1] - a[1])
        if abs(denom) < 1e-15:
            if num > 0:
                return None  # parallel and fully outside this half-plane
            continue
        t = num / denom
        if denom > 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    return t0


__all__ = [
    "Pose2D",
    "VehicleState",
    "ControlCommand",
    "VehicleConfig",
    "Lane",
    "RoadNetwork",
    "wrap_angle",
    "clamp_command",
    "arc_length_along",
    "project_onto_path",
    "path_length",
    "point_at_arc_length",
    "heading_at_arc_length",
    "rect_corners",
    "collision_check",
    "rect_gap",
    "point_in_convex_polygon",
    "path_entry_arc_length",
]

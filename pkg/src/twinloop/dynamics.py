"""Kinematic bicycle dynamics with a fixed-step semi-implicit Euler integrator.

The longitudinal model is

    a = a_max * throttle - b_max * brake - drag_coeff * speed^2

with speed clamped at zero (no reverse). Steering command scales linearly to a
road wheel angle delta, and yaw follows the kinematic bicycle relation

    yaw_rate = speed * tan(delta) / wheelbase

Semi-implicit: speed is advanced first, then the pose moves using the mean of
the old and new speed (exact for piecewise-constant acceleration, which keeps
stopping distances within 1% of v^2/(2b) at the default 10 ms step even for
hard braking from low speed). The same step() drives the virtual twin, the
physical-twin emulator, and the scripted peer, so every party integrates
identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .scene import ControlCommand, Pose2D, VehicleConfig, VehicleState, wrap_angle

DEFAULT_DT = 0.01  # s
MAX_DT = 0.05  # s, stability ceiling for the fixed step

INTEGRATION_SCHEMES = ("semi_implicit_euler",)


@dataclass(frozen=True, slots=True)
class IntegratorSettings:
    dt: float = DEFAULT_DT
    scheme: str = "semi_implicit_euler"

    def __post_init__(self) -> None:
        if not (0.0 < self.dt <= MAX_DT):
            raise ValueError(f"dt must be in (0, {MAX_DT}]")
        if self.scheme not in INTEGRATION_SCHEMES:
            raise ValueError(f"unknown integration scheme {self.scheme!r}")


def step(
    state: VehicleState,
    command: ControlCommand,
    config: VehicleConfig,
    settings: IntegratorSettings = IntegratorSettings(),
) -> VehicleState:
    """Advance one vehicle by one fixed step.

    The reported accel is the effective value (speed delta over dt), which
    differs from the commanded net force term only when the speed clamps at 0.
    Raises ValueError("non-finite state") if any input or output is non-finite.
    """
    dt = settings.dt
    speed = state.speed
    a_cmd = (
        config.a_max * command.throttle
        - config.b_max * command.brake
        - config.drag_coeff * speed * speed
    )
    if not math.isfinite(a_cmd):
        raise ValueError("non-finite state")

    new_speed = speed + a_cmd * dt
    if new_speed < 0.0:
        new_speed = 0.0
    accel = (new_speed - speed) / dt

    delta = command.steering * config.max_steer_angle
    yaw_rate = new_speed * math.tan(delta) / config.wheelbase

    travel = 0.5 * (speed + new_speed) * dt
    heading = state.pose.heading
    x = state.pose.x + travel * math.cos(heading)
    y = state.pose.y + travel * math.sin(heading)
    heading = wrap_angle(heading + yaw_rate * dt)

    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(new_speed)):
        raise ValueError("non-finite state")

    return VehicleState(
        vehicle_id=state.vehicle_id,
        pose=Pose2D(x, y, heading),
        speed=new_speed,
        yaw_rate=yaw_rate,
        accel=accel,
        timestamp=state.timestamp + round(dt * 1e6),
        origin=state.origin,
    )


def stopping_distance(speed: float, decel: float) -> float:
    """Closed-form distance to rest from `speed` under constant deceleration."""
    if decel <= 0.0:
        raise ValueError("decel must be > 0")
    if speed < 0.0:
        raise ValueError("speed must be >= 0")
    return speed * speed / (2.0 * decel)


__all__ = ["IntegratorSettings", "step", "stopping_distance", "DEFAULT_DT", "MAX_DT"]

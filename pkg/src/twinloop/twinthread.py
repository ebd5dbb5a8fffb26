"""Bi-directional twin synchronization: the digital thread.

State updates flow from whichever party is authoritative for a vehicle
(physical rig or simulator) into a registry; commands flow back out over a
channel. Message reordering and duplication are survived by keeping only the
highest seq per vehicle, so replaying a trace in any order converges to the
same estimate. Staleness and bounded dead-reckoning extrapolation are policy,
not hardcoded.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Protocol

from .scene import ControlCommand, Pose2D, VehicleState

EXTRAPOLATION_MODES = ("hold", "constant_velocity")

DEFAULT_STALENESS_MS = 250.0
DEFAULT_MAX_EXTRAPOLATION_MS = 200.0


@dataclass(frozen=True, slots=True)
class StateUpdate:
    """One state sample crossing the thread, ordered by per-vehicle seq."""

    state: VehicleState
    seq: int

    def __post_init__(self) -> None:
        if self.seq < 0:
            raise ValueError("seq must be >= 0")


@dataclass(frozen=True, slots=True)
class SyncPolicy:
    staleness_threshold_ms: float = DEFAULT_STALENESS_MS
    extrapolation: str = "constant_velocity"
    max_extrapolation_ms: float = DEFAULT_MAX_EXTRAPOLATION_MS

    def __post_init__(self) -> None:
        if self.staleness_threshold_ms <= 0:
            raise ValueError("staleness_threshold_ms must be > 0")
        if self.extrapolation not in EXTRAPOLATION_MODES:
            raise ValueError(f"extrapolation must be one of {EXTRAPOLATION_MODES}")
        if self.max_extrapolation_ms < 0:
            raise ValueError("max_extrapolation_ms must be >= 0")


@dataclass(frozen=True, slots=True)
class TwinEstimate:
    state: VehicleState
    stale: bool
    age_ms: float


@dataclass(frozen=True, slots=True)
class CommandReceipt:
    vehicle_id: str
    seq: int
    t_us: int


class Channel(Protocol):
    """Anything that can carry one protocol line toward the other twin."""

    @property
    def closed(self) -> bool: ...

    def send_line(self, line: str) -> None: ...


class ThreadSevered(ConnectionError):
    pass


@dataclass
class _Slot:
    update: StateUpdate
    received_us: int
    rejected: int = 0


class TwinRegistry:
    """Latest-wins store of per-vehicle state, one logical writer at a time.

    Reads return snapshots; a lock serializes mutation so a socket reader
    thread and the tick loop can share one registry.
    """

    def __init__(self) -> None:
        self._slots: dict[str, _Slot] = {}
        self._lock = threading.Lock()

    def ingest_state(self, update: StateUpdate, now_us: int) -> bool:
        """Accept the update iff its seq is strictly newer. Returns acceptance."""
        vid = update.state.vehicle_id
        with self._lock:
            slot = self._slots.get(vid)
            if slot is None:
                self._slots[vid] = _Slot(update=update, received_us=now_us)
                return True
            if update.seq > slot.update.seq:
                slot.update = update
                slot.received_us = now_us
                return True
            slot.rejected += 1
            return False

    def vehicles(self) -> list[str]:
        with self._lock:
            return sorted(self._slots)

    def latest_seq(self, vehicle_id: str) -> int:
        with self._lock:
            return self._slots[vehicle_id].update.seq

    def latest_estimate(
        self, vehicle_id: str, now_us: int, policy: SyncPolicy = SyncPolicy()
    ) -> TwinEstimate:
        """Freshest estimate for one vehicle.

        Within the staleness threshold the stored state is dead-reckoned
        forward (bounded by max_extrapolation_ms); beyond it the stored state
        is returned untouched with the stale flag raised. Unknown ids raise
        KeyError.
        """
        with self._lock:
            slot = self._slots.get(vehicle_id)
            if slot is None:
                raise KeyError(f"unknown vehicle {vehicle_id!r}")
            update = slot.update
            received_us = slot.received_us

        age_ms = max(0.0, (now_us - received_us) / 1000.0)
        state = update.state
        if age_ms > policy.staleness_threshold_ms:
            return TwinEstimate(state=state, stale=True, age_ms=age_ms)

        if policy.extrapolation == "constant_velocity":
            horizon_s = min(age_ms, policy.max_extrapolation_ms) / 1000.0
            if horizon_s > 0.0 and state.speed > 0.0:
                dx = state.speed * horizon_s * math.cos(state.pose.heading)
                dy = state.speed * horizon_s * math.sin(state.pose.heading)
                state = VehicleState(
                    vehicle_id=state.vehicle_id,
                    pose=Pose2D(state.pose.x + dx, state.pose.y + dy, state.pose.heading),
                    speed=state.speed,
                    yaw_rate=state.yaw_rate,
                    accel=state.accel,
                    timestamp=state.timestamp,
                    origin=state.origin,
                )
        return TwinEstimate(state=state, stale=False, age_ms=age_ms)

    def health(self, now_us: int, policy: SyncPolicy = SyncPolicy()) -> dict[str, dict]:
        with self._lock:
            snapshot = {vid: (slot.received_us, slot.rejected) for vid, slot in self._slots.items()}
        out = {}
        for vid, (received_us, rejected) in sorted(snapshot.items()):
            age_ms = max(0.0, (now_us - received_us) / 1000.0)
            out[vid] = {
                "age_ms": age_ms,
                "stale": age_ms > policy.staleness_threshold_ms,
                "rejected_count": rejected,
            }
        return out


def dispatch_command(vehicle_id: str, command: ControlCommand, channel: Channel) -> CommandReceipt:
    """Send one command over the thread; raises ThreadSevered on a closed channel."""
    from .protocol import command_message, encode_message

    if channel.closed:
        raise ThreadSevered("thread severed")
    line = encode_message(command_message(vehicle_id, command))
    try:
        channel.send_line(line)
    except (OSError, ConnectionError) as exc:
        raise ThreadSevered("thread severed") from exc
    return CommandReceipt(vehicle_id=vehicle_id, seq=command.seq, t_us=command.timestamp)


__all__ = [
    "StateUpdate",
    "SyncPolicy",
    "TwinEstimate",
    "CommandReceipt",
    "Channel",
    "ThreadSevered",
    "TwinRegistry",
    "dispatch_command",
]

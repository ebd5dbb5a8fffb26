"""Seeded broadcast channel for basic safety messages (V2V/V2X).

The bus is a discrete-event queue driven entirely by the simulation clock:
broadcast() schedules deliveries, poll() collects whatever has arrived by
`now`. All randomness (loss, latency jitter) comes from one per-bus generator
seeded by the channel model, and draws happen in sorted-receiver-id order so
adding an observer or reordering dict insertion cannot perturb anyone else's
deliveries. Receivers beyond radio range are never delivered to and consume
no randomness.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping

from .scene import Point, Pose2D

BSM_RATE_HZ = 10.0  # nominal safety-message cadence

DEFAULT_RANGE_M = 150.0
DEFAULT_LATENCY_BASE_MS = 20.0
DEFAULT_LATENCY_JITTER_MS = 10.0


@dataclass(frozen=True, slots=True)
class BasicSafetyMsg:
    sender_id: str
    pose: Pose2D
    speed: float
    accel: float
    timestamp: int  # microseconds, sender clock
    seq: int

    def __post_init__(self) -> None:
        if not self.sender_id:
            raise ValueError("empty sender_id")
        if self.speed < 0:
            raise ValueError("speed must be >= 0")
        if self.seq < 0:
            raise ValueError("seq must be >= 0")


@dataclass(frozen=True, slots=True)
class ChannelModel:
    range_m: float = DEFAULT_RANGE_M
    latency_base_ms: float = DEFAULT_LATENCY_BASE_MS
    latency_jitter_ms: float = DEFAULT_LATENCY_JITTER_MS  # uniform half-width
    loss_prob: float = 0.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.range_m <= 0:
            raise ValueError("range_m must be > 0")
        if self.latency_base_ms < 0 or self.latency_jitter_ms < 0:
            raise ValueError("latencies must be >= 0")
        if not (0.0 <= self.loss_prob < 1.0):
            raise ValueError("loss_prob must be in [0, 1)")


@dataclass(frozen=True, slots=True)
class _Pending:
    deliver_at_us: int
    order: int
    msg: BasicSafetyMsg


class V2xBus:
    """One radio neighborhood. Register receivers, broadcast, poll."""

    def __init__(self, channel: ChannelModel = ChannelModel()) -> None:
        self.channel = channel
        self._rng = random.Random(channel.rng_seed)
        self._queues: dict[str, list[_Pending]] = {}
        self._order = 0
        self.sent_count = 0
        self.delivered_count = 0  # scheduled deliveries (survived loss draw)
        self.lost_count = 0
        self.out_of_range_count = 0

    def register(self, receiver_id: str) -> None:
        self._queues.setdefault(receiver_id, [])

    def receivers(self) -> list[str]:
        return sorted(self._queues)

    def broadcast(
        self,
        msg: BasicSafetyMsg,
        positions: Mapping[str, Point],
        now_us: int,
    ) -> int:
        """Schedule deliveries of one message to every in-range registered receiver.

        `positions` maps participant id to world position and must include the
        sender. Returns the number of deliveries scheduled.
        """
        try:
            sx, sy = positions[msg.sender_id]
        except KeyError:
            raise KeyError(f"sender {msg.sender_id!r} missing from positions") from None
        self.sent_count += 1
        scheduled = 0
        for rid in sorted(self._queues):
            if rid == msg.sender_id or rid not in positions:
                continue
            rx, ry = positions[rid]
            if math.hypot(rx - sx, ry - sy) > self.channel.range_m:
                self.out_of_range_count += 1
                continue
            # fixed draw order per in-range receiver: loss first, then jitter
            u_loss = self._rng.random()
            jitter = self._rng.uniform(
                -self.channel.latency_jitter_ms, self.channel.latency_jitter_ms
            )
            if u_loss < self.channel.loss_prob:
                self.lost_count += 1
                continue
            delay_ms = max(0.0, self.channel.latency_base_ms + jitter)
            self._queues[rid].append(
                _Pending(deliver_at_us=now_us + round(delay_ms * 1000), order=self._order, msg=msg)
            )
            self._order += 1
            self.delivered_count += 1
            scheduled += 1
        return scheduled

    def poll(self, receiver_id: str, now_us: int) -> list[BasicSafetyMsg]:
        """Remove and return everything delivered to `receiver_id` by `now_us`,
        in delivery-time order (ties by scheduling order)."""
        if receiver_id not in self._queues:
            raise KeyError(f"unknown receiver {receiver_id!r}")
        queue = self._queues[receiver_id]
        ready = [p for p in queue if p.deliver_at_us <= now_us]
        if not ready:
            return []
        ready.sort(key=lambda p: (p.deliver_at_us, p.order))
        remaining = [p for p in queue if p.deliver_at_us > now_us]
        self._queues[receiver_id] = remaining
        return [p.msg for p in ready]


def bsm_message(msg: BasicSafetyMsg) -> dict:
    """Wire form of a safety message (protocol type "bsm")."""
    from .protocol import pose_to_dict

    return {
        "type": "bsm",
        "vehicle_id": msg.sender_id,
        "seq": msg.seq,
        "t_us": msg.timestamp,
        "pose": pose_to_dict(msg.pose),
        "speed": msg.speed,
        "accel": msg.accel,
    }


def bsm_from_message(msg: dict) -> BasicSafetyMsg:
    from .protocol import ProtocolError, pose_from_dict

    try:
        return BasicSafetyMsg(
            sender_id=str(msg["vehicle_id"]),
            pose=pose_from_dict(msg["pose"]),
            speed=float(msg["speed"]),
            accel=float(msg["accel"]),
            timestamp=int(msg["t_us"]),
            seq=int(msg["seq"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"bad bsm message: {exc}") from exc


__all__ = [
    "BasicSafetyMsg",
    "ChannelModel",
    "V2xBus",
    "BSM_RATE_HZ",
    "bsm_message",
    "bsm_from_message",
]

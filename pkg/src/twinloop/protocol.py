"""Wire schema shared by the twin link, the V2X feed, the physical-twin
emulator, and the HMI gateway.

One JSON object per message. Over TCP, messages are newline-delimited UTF-8
lines. Over the gateway's RFC 6455 connection the identical JSON payload rides
one-per-text-frame. docs/protocol.md is the normative field list.
"""

from __future__ import annotations

import json
from typing import Any, Callable, Iterator

from .scene import ControlCommand, Pose2D, VehicleState

MESSAGE_TYPES = frozenset(
    {
        "hello",
        "bye",
        "state",
        "command",
        "bsm",
        "input",
        "frame",
        "scene",
        "warning",
        "result",
        "pq_submit",
        "ack",
    }
)


class ProtocolError(ValueError):
    pass


def encode_message(msg: dict[str, Any]) -> str:
    """Serialize one message to a single line (no trailing newline)."""
    if "type" not in msg:
        raise ProtocolError("message missing 'type'")
    return json.dumps(msg, separators=(",", ":"), sort_keys=True, allow_nan=False)


def decode_message(line: str | bytes) -> dict[str, Any]:
    if isinstance(line, bytes):
        line = line.decode("utf-8")
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"bad JSON: {exc}") from exc
    if not isinstance(msg, dict):
        raise ProtocolError("message must be a JSON object")
    mtype = msg.get("type")
    if mtype not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {mtype!r}")
    return msg


class LineAssembler:
    """Reassemble newline-delimited messages from arbitrary TCP chunks."""

    def __init__(self) -> None:
        self._buf = bytearray()

    def feed(self, chunk: bytes) -> Iterator[dict[str, Any]]:
        self._buf.extend(chunk)
        while True:
            idx = self._buf.find(b"\n")
            if idx < 0:
                return
            line = bytes(self._buf[:idx])
            del self._buf[: idx + 1]
            if line.strip():
                yield decode_message(line)


# ---------------------------------------------------------------------------
# payload converters
# ---------------------------------------------------------------------------


def pose_to_dict(pose: Pose2D) -> dict[str, float]:
    return {"x": pose.x, "y": pose.y, "heading": pose.heading}


def pose_from_dict(d: dict[str, Any]) -> Pose2D:
    return Pose2D(float(d["x"]), float(d["y"]), float(d.get("heading", 0.0)))


def state_message(state: VehicleState, seq: int) -> dict[str, Any]:
    return {
        "type": "state",
        "vehicle_id": state.vehicle_id,
        "seq": seq,
        "t_us": state.timestamp,
        "pose": pose_to_dict(state.pose),
        "speed": state.speed,
        "yaw_rate": state.yaw_rate,
        "accel": state.accel,
        "origin": state.origin,
    }


def state_from_message(msg: dict[str, Any]) -> VehicleState:
    try:
        return VehicleState(
            vehicle_id=str(msg["vehicle_id"]),
            pose=pose_from_dict(msg["pose"]),
            speed=float(msg["speed"]),
            yaw_rate=float(msg["yaw_rate"]),
            accel=float(msg["accel"]),
            timestamp=int(msg["t_us"]),
            origin=str(msg.get("origin", "virtual")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"bad state message: {exc}") from exc


def command_message(vehicle_id: str, cmd: ControlCommand) -> dict[str, Any]:
    return {
        "type": "command",
        "vehicle_id": vehicle_id,
        "seq": cmd.seq,
        "t_us": cmd.timestamp,
        "steering": cmd.steering,
        "throttle": cmd.throttle,
        "brake": cmd.brake,
    }


def command_from_message(msg: dict[str, Any]) -> ControlCommand:
    try:
        return ControlCommand(
            steering=float(msg["steering"]),
            throttle=float(msg["throttle"]),
            brake=float(msg["brake"]),
            timestamp=int(msg["t_us"]),
            seq=int(msg["seq"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"bad command message: {exc}") from exc


__all__ = [
    "MESSAGE_TYPES",
    "ProtocolError",
    "encode_message",
    "decode_message",
    "LineAssembler",
    "pose_to_dict",
    "pose_from_dict",
    "state_message",
    "state_from_message",
    "command_message",
    "command_from_message",
]

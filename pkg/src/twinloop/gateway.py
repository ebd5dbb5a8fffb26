"""Human-interface gateway: sessions, device-input mapping, view transforms,
outbound state streaming, and the websocket server that connects browser
cockpits to a live run.

Inputs and frames travel independent queues so a slow display can never stall
or reorder driving commands. The engine drains the driver mailbox once per
tick; mapping raw device events into ControlCommands happens server-side so an
hv run is reproducible from its logged event trace alone.
"""

from __future__ import annotations

import asyncio
import itertools
import math
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from .protocol import ProtocolError, decode_message, encode_message, pose_to_dict
from .pq import PqResponse, score, validate_response
from .scene import ControlCommand, VehicleState, clamp_command

ROLES = ("driver", "spectator")
MODALITIES = ("keyboard", "mouse", "gamepad", "wheel")
VIEWS = ("single", "triple", "hmd_static", "hmd_dynamic")

DEFAULT_STREAM_RATE_HZ = 30.0
TRIPLE_FOV_SCALE = 3.0  # three aligned panels side by side
FRAME_QUEUE_CAPACITY = 8
INPUT_QUEUE_CAPACITY = 1024


def _sanitize(value: float, lo: float = -1.0, hi: float = 1.0) -> float:
    v = float(value)
    if math.isnan(v):
        return 0.0
    return min(hi, max(lo, v))


@dataclass(frozen=True, slots=True)
class InputEvent:
    """One raw device snapshot from a cockpit, already normalized client-side.

    Axis conventions: stick_x and drag_x are right-positive, drag_y is
    down-positive, angle_deg is counterclockwise (left) positive; pedal and
    trigger axes are 0..1. Unknown axes are carried but ignored by mapping.
    """

    device: str
    axes: Mapping[str, float] = field(default_factory=dict)
    buttons: Mapping[str, bool] = field(default_factory=dict)
    t: int = 0

    def __post_init__(self) -> None:
        if self.device not in MODALITIES:
            raise ValueError(f"unknown device {self.device!r}")
        lo = {"angle_deg": -3600.0}
        hi = {"angle_deg": 3600.0}
        axes = {
            str(k): _sanitize(v, lo.get(str(k), -1.0), hi.get(str(k), 1.0))
            for k, v in self.axes.items()
        }
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "buttons", {str(k): bool(v) for k, v in self.buttons.items()})
        object.__setattr__(self, "t", max(0, int(self.t)))


NEUTRAL_EVENTS = {m: InputEvent(device=m) for m in MODALITIES}


@dataclass(frozen=True, slots=True)
class MappingProfile:
    """Per-modality calibration. Gains scale the normalized device value;
    ramp/decay rates govern how keyboard channels integrate over time."""

    deadzone: float = 0.05
    steer_gain: float = 1.0
    throttle_gain: float = 1.0
    key_ramp_rate: float = 2.0
    key_decay_rate: float = 3.0
    wheel_full_scale_deg: float = 450.0
    modality: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.deadzone <= 0.2:
            raise ValueError("deadzone must be in [0, 0.2]")
        if self.key_ramp_rate <= 0 or self.key_decay_rate <= 0:
            raise ValueError("ramp/decay rates must be > 0")
        if self.wheel_full_scale_deg <= 0:
            raise ValueError("wheel_full_scale_deg must be > 0")
        if self.modality is not None and self.modality not in MODALITIES:
            raise ValueError(f"unknown modality {self.modality!r}")


@dataclass(frozen=True, slots=True)
class HeadPose:
    yaw: float = 0.0
    pitch: float = 0.0
    t: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.yaw) and math.isfinite(self.pitch)):
            raise ValueError("non-finite head pose")


@dataclass(frozen=True, slots=True)
class ViewTransform:
    camera_yaw: float
    camera_pitch: float
    fov_scale: float


def _decay_toward_zero(value: float, rate: float, dt: float) -> float:
    step = rate * dt
    if value > 0:
        return max(0.0, value - step)
    return min(0.0, value + step)


def _deadzone(value: float, deadzone: float) -> float:
    if abs(value) <= deadzone:
        return 0.0
    scaled = (abs(value) - deadzone) / (1.0 - deadzone)
    return math.copysign(scaled, value)


def map_input(
    prev_cmd: ControlCommand,
    event: InputEvent,
    profile: MappingProfile,
    dt: float,
) -> ControlCommand:
    """Turn one device snapshot into the next ControlCommand.

    Keyboard channels integrate (ramp while held, decay when released); the
    other modalities map absolutely from their current axis values. Steering
    +1 is a left turn, so right-positive stick/drag axes are negated.
    """
    if profile.modality is not None and profile.modality != event.device:
        raise ValueError(f"device/profile mismatch: {event.device} vs {profile.modality}")
    axes, buttons = event.axes, event.buttons

    if event.device == "keyboard":
        direction = (1 if buttons.get("steer_left") else 0) - (
            1 if buttons.get("steer_right") else 0
        )
        if direction:
            steering = prev_cmd.steering + direction * profile.key_ramp_rate * dt
        else:
            steering = _decay_toward_zero(prev_cmd.steering, profile.key_decay_rate, dt)
        if buttons.get("throttle"):
            throttle = prev_cmd.throttle + profile.key_ramp_rate * dt
        else:
            throttle = _decay_toward_zero(prev_cmd.throttle, profile.key_decay_rate, dt)
        if buttons.get("brake"):
            brake = prev_cmd.brake + profile.key_ramp_rate * dt
        else:
            brake = _decay_toward_zero(prev_cmd.brake, profile.key_decay_rate, dt)
    elif event.device == "mouse":
        steering = -axes.get("drag_x", 0.0) * profile.steer_gain
        dy = axes.get("drag_y", 0.0)
        throttle = max(0.0, -dy) * profile.throttle_gain
        brake = max(0.0, dy) * profile.throttle_gain
    elif event.device == "gamepad":
        steering = -_deadzone(axes.get("stick_x", 0.0), profile.deadzone) * profile.steer_gain
        throttle = max(0.0, axes.get("trigger_throttle", 0.0)) * profile.throttle_gain
        brake = max(0.0, axes.get("trigger_brake", 0.0)) * profile.throttle_gain
    elif event.device == "wheel":
        steering = axes.get("angle_deg", 0.0) / profile.wheel_full_scale_deg * profile.steer_gain
        throttle = max(0.0, axes.get("pedal_throttle", 0.0)) * profile.throttle_gain
        brake = max(0.0, axes.get("pedal_brake", 0.0)) * profile.throttle_gain
    else:  # unreachable: InputEvent validates device
        raise ValueError(f"device/profile mismatch: {event.device}")

    return clamp_command(steering, throttle, brake, timestamp=event.t, seq=prev_cmd.seq)


def replay_commands(
    events: Iterable[InputEvent | None],
    profile: MappingProfile,
    dt: float,
    initial: ControlCommand | None = None,
) -> list[ControlCommand]:
    """Fold a per-tick event trace through map_input; None holds the previous
    snapshot (device silent that tick). Reproduces a live run's command log."""
    cmd = initial if initial is not None else clamp_command(0.0, 0.0, 0.0)
    held: InputEvent | None = None
    out = []
    for event in events:
        if event is not None:
            held = event
        if held is not None:
            cmd = map_input(cmd, held, profile, dt)
        out.append(cmd)
    return out


def apply_view(view: str, head: HeadPose | None = None) -> ViewTransform:
    """Camera transform for a session's view mode. Only the dynamic headset
    view follows the head pose; the triple view widens the field 3x."""
    if view not in VIEWS:
        raise ValueError(f"unknown view {view!r}")
    if view == "hmd_dynamic" and head is not None:
        return ViewTransform(camera_yaw=head.yaw, camera_pitch=head.pitch, fov_scale=1.0)
    return ViewTransform(
        camera_yaw=0.0,
        camera_pitch=0.0,
        fov_scale=TRIPLE_FOV_SCALE if view == "triple" else 1.0,
    )


# ---------------------------------------------------------------------------
# sessions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Session:
    session_id: str
    role: str
    modality: str
    view: str
    stream_rate: float = DEFAULT_STREAM_RATE_HZ

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.modality not in MODALITIES:
            raise ValueError(f"unknown modality {self.modality!r}")
        if self.view not in VIEWS:
            raise ValueError(f"unknown view {self.view!r}")
        if self.stream_rate <= 0:
            raise ValueError("stream_rate must be > 0")


class SessionBook:
    """Session registry enforcing the one-driver rule."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._driver_id: str | None = None
        self._counter = itertools.count(1)
        self.driver_event = threading.Event()

    def hello(self, msg: dict[str, Any]) -> tuple[Session | None, dict[str, Any]]:
        """Register a session from a hello message; returns (session, reply).
        Rejections return (None, reply-with-reason)."""
        try:
            session = Session(
                session_id=f"sess-{next(self._counter)}",
                role=str(msg.get("role", "")),
                modality=str(msg.get("modality", "keyboard")),
                view=str(msg.get("view", "single")),
                stream_rate=float(msg.get("stream_rate", DEFAULT_STREAM_RATE_HZ)),
            )
        except (TypeError, ValueError) as exc:
            return None, {"type": "ack", "accepted": False, "reason": str(exc)}
        with self._lock:
            if session.role == "driver":
                if self._driver_id is not None:
                    return None, {
                        "type": "ack",
                        "accepted": False,
                        "reason": "driver slot occupied",
                    }
                self._driver_id = session.session_id
            self._sessions[session.session_id] = session
        if session.role == "driver":
            self.driver_event.set()
        return session, {
            "type": "ack",
            "accepted": True,
            "session_id": session.session_id,
            "role": session.role,
        }

    def close(self, session_id: str) -> None:
        with self._lock:
            self._sessions.pop(session_id, None)
            if self._driver_id == session_id:
                self._driver_id = None
                self.driver_event.clear()

    @property
    def driver(self) -> Session | None:
        with self._lock:
            return self._sessions.get(self._driver_id) if self._driver_id else None

    def sessions(self) -> list[Session]:
        with self._lock:
            return list(self._sessions.values())


# ---------------------------------------------------------------------------
# streaming
# ---------------------------------------------------------------------------


def vehicle_summary(state: VehicleState) -> dict[str, Any]:
    return {
        "vehicle_id": state.vehicle_id,
        "pose": pose_to_dict(state.pose),
        "speed": state.speed,
        "accel": state.accel,
        "origin": state.origin,
    }


def build_frame(
    tick: int,
    t: float,
    phase: str,
    vehicles: Sequence[VehicleState],
    warnings: Sequence[str],
    ack_seq: int | None = None,
) -> dict[str, Any]:
    """One outbound display frame. ack_seq (the last input seq folded into a
    command) appears only on driver frames."""
    frame: dict[str, Any] = {
        "type": "frame",
        "tick": tick,
        "t": t,
        "phase": phase,
        "vehicles": [vehicle_summary(v) for v in vehicles],
        "warnings": sorted(warnings),
    }
    if ack_seq is not None:
        frame["ack_seq"] = ack_seq
    return frame


class StreamBuffer:
    """Bounded per-session outbound queue; overflow drops the oldest frame."""

    def __init__(self, capacity: int = FRAME_QUEUE_CAPACITY) -> None:
        self._queue: deque[dict[str, Any]] = deque(maxlen=capacity)
        self._lock = threading.Lock()
        self.dropped = 0

    def push(self, frame: dict[str, Any]) -> None:
        with self._lock:
            if len(self._queue) == self._queue.maxlen:
                self.dropped += 1
            self._queue.append(frame)

    def pop(self) -> dict[str, Any] | None:
        with self._lock:
            return self._queue.popleft() if self._queue else None

    def __len__(self) -> int:
        with self._lock:
            return len(self._queue)


class DriverSource:
    """Engine-side command source fed by the driver session's input mailbox.

    Each tick drains the mailbox, keeps the newest snapshot as the held device
    state, and maps it through the driver's profile. The per-tick event trace
    and command log are kept so the run is exactly replayable."""

    def __init__(self, hub: "GatewayHub", profile: MappingProfile, dt: float) -> None:
        self.hub = hub
        self.profile = profile
        self.dt = dt
        self._cmd = clamp_command(0.0, 0.0, 0.0)
        self._held: InputEvent | None = None
        self.event_trace: list[InputEvent | None] = []
        self.command_log: list[ControlCommand] = []
        self.last_input_seq: int | None = None

    @property
    def session_id(self) -> str | None:
        driver = self.hub.book.driver
        return driver.session_id if driver else None

    def step(
        self,
        ego: VehicleState,
        detections: Sequence[Any],
        now_us: int,
        v2v_msgs: Iterable[Any] = (),
    ) -> ControlCommand:
        newest: InputEvent | None = None
        while True:
            item = self.hub.pop_input()
            if item is None:
                break
            newest, seq = item
            self.last_input_seq = seq
        if newest is not None:
            self._held = newest
        self.event_trace.append(newest)
        if self._held is not None:
            self._cmd = map_input(self._cmd, self._held, self.profile, self.dt)
        self.command_log.append(self._cmd)
        return self._cmd


class GatewayHub:
    """Thread-safe middle layer between the tick loop and session handlers.

    The engine calls observer() each tick; the hub fans display frames out to
    every session at its stream cadence and latches V2H warnings. Session
    handlers push InputEvents in; the driver source drains them next tick.
    """

    def __init__(
        self,
        book: SessionBook | None = None,
        profiles: Mapping[str, MappingProfile] | None = None,
        stream_rate: float = DEFAULT_STREAM_RATE_HZ,
    ) -> None:
        self.book = book if book is not None else SessionBook()
        self.profiles = dict(profiles or {})
        self.stream_rate = float(stream_rate)
        self._inputs: deque[tuple[InputEvent, int]] = deque(maxlen=INPUT_QUEUE_CAPACITY)
        self._buffers: dict[str, StreamBuffer] = {}
        self._buffers_lock = threading.Lock()
        self._next_emit_t = 0.0
        self._last_warnings: tuple[str, ...] = ()
        self._driver_source: DriverSource | None = None
        self.result: dict[str, Any] | None = None
        self.malformed_count = 0

    def profile_for(self, modality: str) -> MappingProfile:
        return self.profiles.get(modality, MappingProfile(modality=modality))

    # --- session handler side ---

    def register_session(self, session: Session) -> StreamBuffer:
        buf = StreamBuffer()
        with self._buffers_lock:
            self._buffers[session.session_id] = buf
        return buf

    def drop_session(self, session_id: str) -> None:
        with self._buffers_lock:
            self._buffers.pop(session_id, None)
        driver = self.book.driver
        if driver is None:
            # departed driver: hold the vehicle with a neutral snapshot
            if self._driver_source is not None and self._driver_source._held is not None:
                self.push_input(NEUTRAL_EVENTS[self._driver_source._held.device], -1)

    def push_input(self, event: InputEvent, seq: int) -> None:
        self._inputs.append((event, seq))

    def pop_input(self) -> tuple[InputEvent, int] | None:
        try:
            return self._inputs.popleft()
        except IndexError:
            return None

    # --- engine side ---

    def driver_source(self, dt: float) -> DriverSource:
        driver = self.book.driver
        modality = driver.modality if driver else "keyboard"
        self._driver_source = DriverSource(self, self.profile_for(modality), dt)
        return self._driver_source

    def observer(self, event: dict[str, Any]) -> None:
        if event.get("phase") == "complete":
            report = event["report"]
            self.result = {"type": "result", "report": report.to_dict()}
            self._broadcast(self.result)
            return
        t = float(event["t"])
        warnings = tuple(event.get("warnings", ()))
        if warnings != self._last_warnings:
            for w in sorted(set(warnings) - set(self._last_warnings)):
                self._broadcast({"type": "warning", "t": t, "source_id": w, "active": True})
            self._last_warnings = warnings
        if t + 1e-9 < self._next_emit_t:
            return
        self._next_emit_t += 1.0 / self.stream_rate
        ack = self._driver_source.last_input_seq if self._driver_source else None
        vehicles = [event["ego"], event["peer"]]
        with self._buffers_lock:
            items = list(self._buffers.items())
        driver = self.book.driver
        driver_id = driver.session_id if driver else None
        for session_id, buf in items:
            frame = build_frame(
                tick=int(event["tick"]),
                t=t,
                phase="running",
                vehicles=vehicles,
                warnings=warnings,
                ack_seq=ack if session_id == driver_id else None,
            )
            buf.push(frame)

    def _broadcast(self, msg: dict[str, Any]) -> None:
        with self._buffers_lock:
            for buf in self._buffers.values():
                buf.push(msg)


# ---------------------------------------------------------------------------
# websocket server
# ---------------------------------------------------------------------------


class GatewayServer:
    """RFC 6455 endpoint serving cockpit sessions for one scenario process.

    Messages ride one JSON object per text frame using the shared wire schema.
    The server owns an asyncio loop on a background thread; the tick loop
    talks to it only through the hub's lock-guarded queues.
    """

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        stream_rate: float = DEFAULT_STREAM_RATE_HZ,
        profiles: Mapping[str, MappingProfile] | None = None,
        scene_info: dict[str, Any] | None = None,
    ) -> None:
        self.host = host
        self.port = port
        self.hub = GatewayHub(profiles=profiles, stream_rate=stream_rate)
        self.scene_info = scene_info
        self.pq_responses: list[PqResponse] = []
        self._loop: asyncio.AbstractEventLoop | None = None
        self._thread: threading.Thread | None = None
        self._server: Any = None

    @property
    def book(self) -> SessionBook:
        return self.hub.book

    def start(self) -> "GatewayServer":
        from websockets.asyncio.server import serve

        self._loop = asyncio.new_event_loop()
        self._thread = threading.Thread(target=self._loop.run_forever, daemon=True)
        self._thread.start()

        async def _bind():
            self._server = await serve(self._handler, self.host, self.port)
            return self._server.sockets[0].getsockname()[1]

        fut = asyncio.run_coroutine_threadsafe(_bind(), self._loop)
        self.port = fut.result(timeout=10)
        return self

    def stop(self) -> None:
        if self._loop is None:
            return

        async def _close():
            self._server.close()
            await self._server.wait_closed()

        asyncio.run_coroutine_threadsafe(_close(), self._loop).result(timeout=10)
        self._loop.call_soon_threadsafe(self._loop.stop)
        if self._thread:
            self._thread.join(timeout=10)
        self._loop.close()
        self._loop = None

    def wait_for_driver(self, timeout: float | None = None) -> bool:
        return self.book.driver_event.wait(timeout)

    # --- connection handling ---

    async def _handler(self, connection) -> None:
        session: Session | None = None
        pump_task: asyncio.Task | None = None
        try:
            raw = await connection.recv()
            try:
                hello = decode_message(raw)
                if hello.get("type") != "hello":
                    raise ProtocolError("first message must be hello")
            except ProtocolError as exc:
                await connection.send(
                    encode_message({"type": "ack", "accepted": False, "reason": str(exc)})
                )
                return
            session, reply = self.book.hello(hello)
            await connection.send(encode_message(reply))
            if session is None:
                return
            buf = self.hub.register_session(session)
            if self.scene_info is not None:
                await connection.send(encode_message({"type": "scene", **self.scene_info}))
            if self.hub.result is not None:
                buf.push(self.hub.result)
            send_lock = asyncio.Lock()  # pump and reply paths share the socket
            pump_task = asyncio.create_task(self._pump(connection, buf, send_lock))
            async for raw in connection:
                try:
                    msg = decode_message(raw)
                except ProtocolError:
                    self.hub.malformed_count += 1
                    continue
                if msg["type"] == "input" and session.role == "driver":
                    try:
                        event = input_event_from_message(msg)
                        seq = int(msg.get("seq", 0))
                    except (ProtocolError, TypeError, ValueError):
                        self.hub.malformed_count += 1
                        continue
                    self.hub.push_input(event, seq)
                elif msg["type"] == "pq_submit":
                    reply = self._handle_pq(msg)
                    async with send_lock:
                        await connection.send(encode_message(reply))
                elif msg["type"] == "bye":
                    break
        except Exception:
            pass
        finally:
            if pump_task is not None:
                pump_task.cancel()
            if session is not None:
                self.book.close(session.session_id)
                self.hub.drop_session(session.session_id)

    async def _pump(self, connection, buf: StreamBuffer, send_lock: asyncio.Lock) -> None:
        while True:
            frame = buf.pop()
            if frame is None:
                await asyncio.sleep(0.005)
                continue
            async with send_lock:
                await connection.send(encode_message(frame))

    def _handle_pq(self, msg: dict[str, Any]) -> dict[str, Any]:
        set_name = str(msg.get("set", ""))
        if set_name not in ("observation", "interaction"):
            return {"type": "ack", "accepted": False, "errors": [f"unknown set: {set_name}"]}
        try:
            ratings = {int(k): int(v) for k, v in dict(msg.get("ratings", {})).items()}
        except (TypeError, ValueError):
            return {"type": "ack", "accepted": False, "errors": ["malformed ratings"]}
        errors = validate_response(ratings, set_name)
        if errors:
            return {"type": "ack", "accepted": False, "errors": errors}
        response = PqResponse(
            participant_id=str(msg.get("participant", "anonymous")),
            configuration=str(msg.get("configuration", "unspecified")),
            set_name=set_name,
            ratings=ratings,
        )
        self.pq_responses.append(response)
        scores = score(response)
        return {
            "type": "ack",
            "accepted": True,
            "scores": {f: s for f, s, _ in scores.entries},
            "overall": scores.overall,
        }


def input_event_from_message(msg: dict[str, Any]) -> InputEvent:
    return InputEvent(
        device=str(msg.get("device", "")),
        axes={str(k): float(v) for k, v in dict(msg.get("axes", {})).items()},
        buttons={str(k): bool(v) for k, v in dict(msg.get("buttons", {})).items()},
        t=int(msg.get("t_us", 0)),
    )


def input_event_message(event: InputEvent, session_id: str, seq: int) -> dict[str, Any]:
    return {
        "type": "input",
        "session_id": session_id,
        "seq": seq,
        "t_us": event.t,
        "device": event.device,
        "axes": dict(event.axes),
        "buttons": dict(event.buttons),
    }


__all__ = [
    "ROLES",
    "MODALITIES",
    "VIEWS",
    "DEFAULT_STREAM_RATE_HZ",
    "TRIPLE_FOV_SCALE",
    "InputEvent",
    "MappingProfile",
    "HeadPose",
    "ViewTransform",
    "Session",
    "SessionBook",
    "StreamBuffer",
    "DriverSource",
    "GatewayHub",
    "GatewayServer",
    "map_input",
    "replay_commands",
    "apply_view",
    "build_frame",
    "vehicle_summary",
    "input_event_from_message",
    "input_event_message",
]

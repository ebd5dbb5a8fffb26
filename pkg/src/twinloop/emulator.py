"""Physical-twin endpoint and the client link that attaches it to a run.

PhysicalEmulator is a standalone TCP process standing in for a drive-by-wire
vehicle: it integrates the shared motion model under the latest received
command and streams timestamped state back. TcpTwinLink is the engine-side
counterpart; it keeps a TwinRegistry fresh from the socket and dispatches
commands, so the tick loop sees the remote vehicle through the same
latest_estimate interface as any twin.

Both ends speak one JSON object per newline-terminated UTF-8 line. A lockstep
mode (one integration step per command, acknowledged by its state message)
exists for deterministic tests and CI; real attachments run wall-clock.
"""

from __future__ import annotations

import json
import socket
import threading
import time
from pathlib import Path
from typing import Any

from .dynamics import IntegratorSettings, step
from .protocol import (
    LineAssembler,
    ProtocolError,
    command_from_message,
    encode_message,
    state_from_message,
    state_message,
)
from .scene import ControlCommand, Pose2D, VehicleConfig, VehicleState, clamp_command
from .twinthread import (
    StateUpdate,
    SyncPolicy,
    ThreadSevered,
    TwinEstimate,
    TwinRegistry,
    dispatch_command,
)

DEFAULT_STATE_RATE_HZ = 50.0
LOCKSTEP_ACK_TIMEOUT_S = 5.0
CONNECT_TIMEOUT_S = 5.0


def _now_us() -> int:
    return time.monotonic_ns() // 1000


def _drain(assembler: LineAssembler, chunk: bytes) -> list[dict[str, Any]]:
    """Parse every well-formed message in chunk, skipping garbled lines.

    The assembler consumes a bad line before raising, so re-feeding nothing
    resumes at the next line."""
    out: list[dict[str, Any]] = []
    while True:
        try:
            out.extend(assembler.feed(chunk))
            return out
        except ProtocolError:
            chunk = b""


def parse_address(addr: str) -> tuple[str, int]:
    """Split "host:port" (or bare ":port" for all interfaces)."""
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must be host:port, got {addr!r}")
    return host or "127.0.0.1", int(port)


def load_vehicle_file(path: str | Path) -> dict[str, Any]:
    """Read an emulator vehicle file; returns PhysicalEmulator kwargs.

    Recognized keys (all optional): vehicle_id, dt, state_rate_hz, lockstep,
    spawn {x, y, heading}, config {VehicleConfig fields}.
    """
    data = json.loads(Path(path).read_text())
    spawn = data.get("spawn", {})
    return {
        "vehicle_id": str(data.get("vehicle_id", "ego")),
        "dt": float(data.get("dt", 0.01)),
        "state_rate_hz": float(data.get("state_rate_hz", DEFAULT_STATE_RATE_HZ)),
        "lockstep": bool(data.get("lockstep", False)),
        "spawn": Pose2D(
            float(spawn.get("x", 0.0)),
            float(spawn.get("y", 0.0)),
            float(spawn.get("heading", 0.0)),
        ),
        "config": VehicleConfig(**data.get("config", {})),
    }


class PhysicalEmulator:
    """TCP vehicle endpoint. One client drives it at a time; the vehicle's
    state persists across connections."""

    def __init__(
        self,
        config: VehicleConfig = VehicleConfig(),
        spawn: Pose2D = Pose2D(0.0, 0.0, 0.0),
        vehicle_id: str = "ego",
        host: str = "127.0.0.1",
        port: int = 0,
        dt: float = 0.01,
        state_rate_hz: float = DEFAULT_STATE_RATE_HZ,
        lockstep: bool = False,
    ) -> None:
        if state_rate_hz <= 0:
            raise ValueError("state_rate_hz must be > 0")
        self.config = config
        self.vehicle_id = vehicle_id
        self.host = host
        self.port = port
        self.settings = IntegratorSettings(dt=dt)
        self.state_rate_hz = state_rate_hz
        self.lockstep = lockstep

        self._state = VehicleState(
            vehicle_id=vehicle_id,
            pose=spawn,
            speed=0.0,
            yaw_rate=0.0,
            accel=0.0,
            timestamp=0,
            origin="physical",
        )
        self._held_cmd = clamp_command(0.0, 0.0, 0.0)
        self._last_cmd_seq = -1
        self._state_seq = 0
        self._lock = threading.Lock()

        self._listener: socket.socket | None = None
        self._conn: socket.socket | None = None
        self._send_lock = threading.Lock()
        self._alive = False
        self._threads: list[threading.Thread] = []

    # --- lifecycle ---

    def start(self) -> "PhysicalEmulator":
        self._listener = socket.create_server((self.host, self.port), reuse_port=False)
        self._listener.settimeout(0.2)
        self.port = self._listener.getsockname()[1]
        self._alive = True
        accept = threading.Thread(target=self._accept_loop, daemon=True)
        accept.start()
        self._threads.append(accept)
        if not self.lockstep:
            ticker = threading.Thread(target=self._tick_loop, daemon=True)
            ticker.start()
            self._threads.append(ticker)
        return self

    def stop(self) -> None:
        self._alive = False
        conn, self._conn = self._conn, None
        if conn is not None:
            try:
                conn.close()
            except OSError:
                pass
        if self._listener is not None:
            self._listener.close()
        for t in self._threads:
            t.join(timeout=5)
        self._threads.clear()

    def snapshot(self) -> VehicleState:
        with self._lock:
            return self._state

    # --- serving ---

    def _accept_loop(self) -> None:
        while self._alive:
            try:
                conn, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            self._conn = conn
            try:
                self._serve(conn)
            finally:
                if self._conn is conn:
                    self._conn = None
                try:
                    conn.close()
                except OSError:
                    pass

    def _serve(self, conn: socket.socket) -> None:
        assembler = LineAssembler()
        while self._alive:
            try:
                chunk = conn.recv(4096)
            except OSError:
                return
            if not chunk:
                return
            for msg in _drain(assembler, chunk):
                if msg["type"] == "hello":
                    self._send(conn, self._hello())
                    self._send(conn, self._state_msg())
                elif msg["type"] == "command":
                    self._on_command(conn, msg)
                elif msg["type"] == "bye":
                    return

    def _on_command(self, conn: socket.socket, msg: dict[str, Any]) -> None:
        try:
            cmd = command_from_message(msg)
        except ProtocolError:
            return
        with self._lock:
            if cmd.seq <= self._last_cmd_seq:
                return  # stale or duplicate; the thread only moves forward
            self._last_cmd_seq = cmd.seq
            self._held_cmd = cmd
        if self.lockstep:
            self._advance()
            self._send(conn, self._state_msg())

    def _advance(self) -> None:
        with self._lock:
            self._state = step(self._state, self._held_cmd, self.config, self.settings)

    def _tick_loop(self) -> None:
        dt = self.settings.dt
        every = max(1, round(1.0 / (self.state_rate_hz * dt)))
        next_deadline = time.monotonic() + dt
        tick = 0
        while self._alive:
            lag = next_deadline - time.monotonic()
            if lag > 0:
                time.sleep(lag)
            next_deadline += dt
            self._advance()
            tick += 1
            conn = self._conn
            if conn is not None and tick % every == 0:
                self._send(conn, self._state_msg())

    def _hello(self) -> dict[str, Any]:
        return {
            "type": "hello",
            "vehicle_id": self.vehicle_id,
            "seq": 0,
            "t_us": self.snapshot().timestamp,
            "role": "physical-twin",
            "dt": self.settings.dt,
        }

    def _state_msg(self) -> dict[str, Any]:
        with self._lock:
            self._state_seq += 1
            return state_message(self._state, seq=self._state_seq)

    def _send(self, conn: socket.socket, msg: dict[str, Any]) -> None:
        data = (encode_message(msg) + "\n").encode("utf-8")
        with self._send_lock:
            try:
                conn.sendall(data)
            except OSError:
                pass  # client gone; the accept loop will notice


class TcpTwinLink:
    """Client side of the digital thread over TCP.

    Feeds received states into a TwinRegistry on a reader thread and sends
    commands with dispatch_command; implements the Channel protocol itself.
    Construction blocks until the remote vehicle's first state arrives. In
    lockstep mode send() also blocks until the state acknowledging that
    command has been ingested.
    """

    def __init__(
        self,
        host: str,
        port: int,
        vehicle_id: str = "ego",
        lockstep: bool = False,
        timeout: float = CONNECT_TIMEOUT_S,
    ) -> None:
        self.vehicle_id = vehicle_id
        self.lockstep = lockstep
        self.registry = TwinRegistry()
        self._closed = False
        self._cond = threading.Condition()
        self._last_ingest_seq = -1

        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._sock.settimeout(None)
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self.send_line(
            encode_message(
                {
                    "type": "hello",
                    "vehicle_id": vehicle_id,
                    "seq": 0,
                    "t_us": 0,
                    "role": "twin-client",
                }
            )
        )
        with self._cond:
            if not self._cond.wait_for(
                lambda: self._last_ingest_seq >= 0 or self._closed, timeout=timeout
            ):
                self.close()
                raise TimeoutError(f"no state from {host}:{port} within {timeout}s")
            if self._closed:
                raise ThreadSevered("thread severed")

    # --- Channel protocol ---

    @property
    def closed(self) -> bool:
        return self._closed

    def send_line(self, line: str) -> None:
        self._sock.sendall((line + "\n").encode("utf-8"))

    # --- PhysicalLink protocol ---

    def refresh(self, policy: SyncPolicy = SyncPolicy()) -> TwinEstimate:
        return self.registry.latest_estimate(self.vehicle_id, _now_us(), policy)

    def send(self, command: ControlCommand) -> None:
        with self._cond:
            before = self._last_ingest_seq
        dispatch_command(self.vehicle_id, command, self)
        if not self.lockstep:
            return
        with self._cond:
            ok = self._cond.wait_for(
                lambda: self._last_ingest_seq > before or self._closed,
                timeout=LOCKSTEP_ACK_TIMEOUT_S,
            )
        if self._closed or not ok:
            raise ThreadSevered("thread severed")

    def close(self) -> None:
        if not self._closed:
            try:
                self.send_line(
                    encode_message(
                        {"type": "bye", "vehicle_id": self.vehicle_id, "seq": 0, "t_us": 0}
                    )
                )
            except OSError:
                pass
        self._mark_closed()
        try:
            self._sock.close()
        except OSError:
            pass
        if self._reader is not threading.current_thread():
            self._reader.join(timeout=5)

    # --- internals ---

    def _mark_closed(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def _read_loop(self) -> None:
        assembler = LineAssembler()
        while True:
            try:
                chunk = self._sock.recv(4096)
            except OSError:
                break
            if not chunk:
                break
            for msg in _drain(assembler, chunk):
                if msg["type"] != "state":
                    continue
                try:
                    state = state_from_message(msg)
                    seq = int(msg["seq"])
                except (ProtocolError, KeyError, TypeError, ValueError):
                    continue
                self.registry.ingest_state(StateUpdate(state=state, seq=seq), _now_us())
                with self._cond:
                    if seq > self._last_ingest_seq:
                        self._last_ingest_seq = seq
                    self._cond.notify_all()
        self._mark_closed()


__all__ = [
    "DEFAULT_STATE_RATE_HZ",
    "PhysicalEmulator",
    "TcpTwinLink",
    "load_vehicle_file",
    "parse_address",
]

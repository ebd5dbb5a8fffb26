"""Deterministic scenario engine: spec, tick loop, KPIs, reports, comparison.

One run is a single-threaded fixed-step loop; every stochastic element draws
from generators seeded by the spec, so two runs of the same spec produce
byte-identical exports. Wall time only enters when a physical twin or a human
driver is attached (realtime pacing), and even then it never steers the av or
cav policies.

Tick order (one iteration):
  1. refresh the ego estimate (twin thread when physical, else local state)
  2. advance the scripted peer
  3. exchange safety messages over the V2X bus (connected modes)
  4. ask the command source (controller or driver) for the ego command
  5. apply the command: local integration or dispatch over the thread
  6. log the KPI sample and stream to observers
  7. evaluate termination
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Protocol, Sequence

from .autonomy import (
    AvController,
    CavController,
    ControllerParams,
    PeerScript,
    SensorFrustum,
    CONFLICT_HORIZON_S,
    perceive,
    predict_corridor_entry,
)
from .dynamics import IntegratorSettings, step
from .scene import (
    ControlCommand,
    Lane,
    Point,
    Pose2D,
    RoadNetwork,
    VehicleConfig,
    VehicleState,
    arc_length_along,
    collision_check,
    path_entry_arc_length,
    path_length,
    rect_gap,
)
from .twinthread import SyncPolicy, ThreadSevered, TwinEstimate
from .v2x import BSM_RATE_HZ, BasicSafetyMsg, ChannelModel, V2xBus

MODES = ("av", "cav", "hv")

EGO_ID = "ego"
PEER_ID = "peer"

KPI_CSV_HEADER = "t,s,speed,throttle,brake,accel,peer_gap"

# a run whose twin estimate ages past this many staleness thresholds aborts
THREAD_LOSS_FACTOR = 3.0

PATH_END_SLACK_M = 0.5


class ThreadLostError(RuntimeError):
    """Raised when the digital thread to an attached physical twin decays."""


# ---------------------------------------------------------------------------
# spec
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    map: RoadNetwork
    ego_spawn: Pose2D
    ego_config: VehicleConfig
    ego_path: tuple[Point, ...]
    peer_spawn: Pose2D
    peer_config: VehicleConfig
    peer_path: tuple[Point, ...]
    peer_target_speed: float
    trigger_s: float
    mode: str
    controller: ControllerParams
    frustum: SensorFrustum
    channel: ChannelModel
    duration_max_s: float = 40.0
    dt: float = 0.01
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        object.__setattr__(self, "ego_path", tuple((float(x), float(y)) for x, y in self.ego_path))
        object.__setattr__(self, "peer_path", tuple((float(x), float(y)) for x, y in self.peer_path))
        path_length(self.peer_path)
        if not 0 <= self.trigger_s < path_length(self.ego_path):
            raise ValueError("trigger_s must lie within the ego path")
        if self.duration_max_s <= 0:
            raise ValueError("duration_max_s must be > 0")
        IntegratorSettings(dt=self.dt)  # validates dt

    def conflict_point_s(self) -> float:
        """Arc length where the ego path enters the first conflict polygon."""
        for poly in self.map.intersections:
            s = path_entry_arc_length(self.ego_path, poly)
            if s is not None:
                return s
        raise ValueError("ego path never enters a conflict polygon")

    def geometry_fingerprint(self) -> str:
        payload = {
            "map": self.map.to_dict(),
            "ego_spawn": [self.ego_spawn.x, self.ego_spawn.y, self.ego_spawn.heading],
            "ego_path": [list(p) for p in self.ego_path],
            "peer_spawn": [self.peer_spawn.x, self.peer_spawn.y, self.peer_spawn.heading],
            "peer_path": [list(p) for p in self.peer_path],
            "trigger_s": self.trigger_s,
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "map": self.map.to_dict(),
            "ego": {
                "spawn": _pose_dict(self.ego_spawn),
                "config": _config_dict(self.ego_config),
                "path": [list(p) for p in self.ego_path],
            },
            "peer": {
                "spawn": _pose_dict(self.peer_spawn),
                "config": _config_dict(self.peer_config),
                "path": [list(p) for p in self.peer_path],
                "target_speed": self.peer_target_speed,
                "trigger_s": self.trigger_s,
            },
            "mode": self.mode,
            "controller": {
                "v_cruise": self.controller.v_cruise,
                "comfort_decel": self.controller.comfort_decel,
                "panic_brake": self.controller.panic_brake,
                "conflict_margin": self.controller.conflict_margin,
                "ttc_threshold": self.controller.ttc_threshold,
            },
            "frustum": {
                "range_m": self.frustum.range_m,
                "half_angle_rad": self.frustum.half_angle_rad,
            },
            "channel": {
                "range_m": self.channel.range_m,
                "latency_base_ms": self.channel.latency_base_ms,
                "latency_jitter_ms": self.channel.latency_jitter_ms,
                "loss_prob": self.channel.loss_prob,
                "rng_seed": self.channel.rng_seed,
            },
            "duration_max_s": self.duration_max_s,
            "dt": self.dt,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioSpec":
        ego = data["ego"]
        peer = data["peer"]
        return cls(
            name=data.get("name", "scenario"),
            map=RoadNetwork.from_dict(data["map"]),
            ego_spawn=_pose_from(ego["spawn"]),
            ego_config=VehicleConfig(**ego.get("config", {})),
            ego_path=tuple((p[0], p[1]) for p in ego["path"]),
            peer_spawn=_pose_from(peer["spawn"]),
            peer_config=VehicleConfig(**peer.get("config", {})),
            peer_path=tuple((p[0], p[1]) for p in peer["path"]),
            peer_target_speed=float(peer.get("target_speed", 9.0)),
            trigger_s=float(peer.get("trigger_s", 70.0)),
            mode=data.get("mode", "av"),
            controller=ControllerParams(**data.get("controller", {})),
            frustum=SensorFrustum(**data.get("frustum", {})),
            channel=ChannelModel(**data.get("channel", {})),
            duration_max_s=float(data.get("duration_max_s", 40.0)),
            dt=float(data.get("dt", 0.01)),
            rng_seed=int(data.get("rng_seed", 0)),
        )


def _pose_dict(p: Pose2D) -> dict[str, float]:
    return {"x": p.x, "y": p.y, "heading": p.heading}


def _pose_from(d: dict[str, Any]) -> Pose2D:
    return Pose2D(float(d["x"]), float(d["y"]), float(d.get("heading", 0.0)))


def _config_dict(c: VehicleConfig) -> dict[str, float]:
    return {
        "wheelbase": c.wheelbase,
        "max_steer_angle": c.max_steer_angle,
        "a_max": c.a_max,
        "b_max": c.b_max,
        "drag_coeff": c.drag_coeff,
        "length": c.length,
        "width": c.width,
    }


def default_scenario(mode: str = "av", seed: int = 0, **overrides: Any) -> ScenarioSpec:
    """The shipped crossing-conflict calibration.

    Straight 200 m ego lane; a crossing road meets it at x = 120 with a 20 m
    conflict polygon (entry at arc length 110). The peer waits 40 m down the
    crossing road and launches the moment the ego passes 70 m.
    """
    ego_path = ((0.0, 0.0), (200.0, 0.0))
    peer_path = ((120.0, -40.0), (120.0, 60.0))
    net = RoadNetwork(
        lanes=(
            Lane(points=ego_path, width=3.7),
            Lane(points=((120.0, -60.0), (120.0, 60.0)), width=3.7),
        ),
        intersections=(((110.0, -10.0), (130.0, -10.0), (130.0, 10.0), (110.0, 10.0)),),
    )
    base = dict(
        name="crossing-conflict",
        map=net,
        ego_spawn=Pose2D(0.0, 0.0, 0.0),
        ego_config=VehicleConfig(),
        ego_path=ego_path,
        peer_spawn=Pose2D(120.0, -40.0, math.pi / 2),
        peer_config=VehicleConfig(a_max=3.4),
        peer_path=peer_path,
        peer_target_speed=9.0,
        trigger_s=70.0,
        mode=mode,
        controller=ControllerParams(),
        frustum=SensorFrustum(),
        channel=ChannelModel(rng_seed=seed),
        duration_max_s=40.0,
        dt=0.01,
        rng_seed=seed,
    )
    base.update(overrides)
    return ScenarioSpec(**base)


def load_scenario(path: str | Path, mode: str | None = None, seed: int | None = None) -> ScenarioSpec:
    data = json.loads(Path(path).read_text())
    spec = ScenarioSpec.from_dict(data)
    if mode is not None:
        spec = replace(spec, mode=mode)
    if seed is not None:
        spec = replace(spec, rng_seed=seed, channel=replace(spec.channel, rng_seed=seed))
    return spec


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class KpiSample:
    t: float
    s: float
    speed: float
    throttle: float
    brake: float
    accel: float
    peer_gap: float


@dataclass(frozen=True)
class RunReport:
    mode: str
    stop_distance_s: float | None
    peak_accel: float
    peak_decel: float
    min_gap: float
    collision: bool
    reaction_time: float | None
    completed: bool
    terminated: str
    duration_s: float
    seed: int
    geometry_fingerprint: str
    first_awareness_t: float | None = None
    first_v2v_t: float | None = None
    first_perception_t: float | None = None
    session_id: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "stop_distance_s": self.stop_distance_s,
            "peak_accel": self.peak_accel,
            "peak_decel": self.peak_decel,
            "min_gap": self.min_gap,
            "collision": self.collision,
            "reaction_time": self.reaction_time,
            "completed": self.completed,
            "terminated": self.terminated,
            "duration_s": self.duration_s,
            "seed": self.seed,
            "geometry_fingerprint": self.geometry_fingerprint,
            "first_awareness_t": self.first_awareness_t,
            "first_v2v_t": self.first_v2v_t,
            "first_perception_t": self.first_perception_t,
            "session_id": self.session_id,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunReport":
        return cls(**{k: d.get(k) for k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class RunResult:
    report: RunReport
    samples: tuple[KpiSample, ...]

    @property
    def exit_code(self) -> int:
        ok = self.report.completed and not self.report.collision
        return 0 if ok else 1


class CommandSource(Protocol):
    def step(
        self,
        ego: VehicleState,
        detections: Sequence,
        now_us: int,
        v2v_msgs: Iterable[BasicSafetyMsg] = (),
    ) -> ControlCommand: ...


class PhysicalLink(Protocol):
    """Client side of the thread to an attached physical twin."""

    vehicle_id: str

    def refresh(self, policy: SyncPolicy) -> TwinEstimate: ...

    def send(self, command: ControlCommand) -> None: ...

    def close(self) -> None: ...


# ---------------------------------------------------------------------------
# run loop
# ---------------------------------------------------------------------------


def _build_command_source(spec: ScenarioSpec) -> CommandSource:
    conflict_s = spec.conflict_point_s()
    if spec.mode == "av":
        return AvController(spec.controller, spec.ego_config, spec.ego_path, conflict_s)
    if spec.mode == "cav":
        return CavController(spec.controller, spec.ego_config, spec.ego_path, conflict_s)
    raise ValueError("no driver connected")  # hv needs an external command source


def run(
    spec: ScenarioSpec,
    command_source: CommandSource | None = None,
    physical_link: PhysicalLink | None = None,
    observer: Callable[[dict[str, Any]], None] | None = None,
    sync_policy: SyncPolicy = SyncPolicy(),
    realtime: bool | None = None,
) -> RunResult:
    """Execute one scenario to termination and assemble its report.

    av/cav runs build their own controller; hv requires `command_source`
    (raises ValueError("no driver connected") otherwise). With
    `physical_link`, the ego state is authoritative from the twin thread, the
    loop paces wall time (override with realtime=False for lockstep
    endpoints), and an estimate older than 3x the staleness threshold aborts
    the run as thread loss.
    """
    if command_source is None:
        command_source = _build_command_source(spec)
    pace = (physical_link is not None) if realtime is None else realtime

    settings = IntegratorSettings(dt=spec.dt)
    dt_us = round(spec.dt * 1e6)
    max_ticks = math.ceil(spec.duration_max_s / spec.dt)
    ego_path = spec.ego_path
    ego_path_len = path_length(ego_path)

    ego = VehicleState(
        vehicle_id=EGO_ID, pose=spec.ego_spawn, speed=0.0, yaw_rate=0.0, accel=0.0, timestamp=0
    )
    peer = VehicleState(
        vehicle_id=PEER_ID, pose=spec.peer_spawn, speed=0.0, yaw_rate=0.0, accel=0.0, timestamp=0
    )
    script = PeerScript(spec.peer_path, spec.trigger_s, spec.peer_target_speed, spec.peer_config)

    connected = spec.mode in ("cav", "hv")
    bus: V2xBus | None = V2xBus(spec.channel) if connected else None
    if bus:
        bus.register(EGO_ID)
        bus.register(PEER_ID)
    bsm_every = max(1, round(1.0 / (BSM_RATE_HZ * spec.dt)))
    bsm_seq = 0

    samples: list[KpiSample] = []
    first_v2v_t: float | None = None
    first_perception_t: float | None = None
    first_brake_t: float | None = None
    collision = False
    stop_distance: float | None = None
    terminated = "duration"
    warn_tracks: dict[str, BasicSafetyMsg] = {}
    active_warnings: set[str] = set()

    wall_start = time.monotonic()

    try:
        for tick in range(max_ticks):
            now_us = tick * dt_us
            if pace:
                deadline = wall_start + (tick * spec.dt)
                lag = deadline - time.monotonic()
                if lag > 0:
                    time.sleep(lag)

            # (1) refresh ego estimate
            if physical_link is not None:
                est = physical_link.refresh(sync_policy)
                if est.age_ms > THREAD_LOSS_FACTOR * sync_policy.staleness_threshold_ms:
                    raise ThreadLostError("digital thread lost")
                ego = est.state
            ego_s = arc_length_along(ego_path, (ego.pose.x, ego.pose.y))

            # (2) advance the scripted peer
            peer_cmd = script.step(peer, ego_s, now_us)
            peer = step(peer, peer_cmd, spec.peer_config, settings)

            # (3) exchange safety messages
            v2v_msgs: list[BasicSafetyMsg] = []
            if bus is not None:
                if tick % bsm_every == 0:
                    positions = {
                        EGO_ID: (ego.pose.x, ego.pose.y),
                        PEER_ID: (peer.pose.x, peer.pose.y),
                    }
                    bus.broadcast(_bsm(peer, bsm_seq), positions, now_us)
                    bus.broadcast(_bsm(ego, bsm_seq), positions, now_us)
                    bsm_seq += 1
                v2v_msgs = bus.poll(EGO_ID, now_us)
                if v2v_msgs and first_v2v_t is None:
                    first_v2v_t = now_us / 1e6
                for m in v2v_msgs:
                    held = warn_tracks.get(m.sender_id)
                    if held is None or m.seq > held.seq:
                        warn_tracks[m.sender_id] = m
                if tick % bsm_every == 0:
                    active_warnings = _assess_warnings(warn_tracks, ego_path, ego_s)

            # perception (machine drivers only; the human uses the rendered view)
            detections = []
            if spec.mode != "hv":
                detections = perceive(ego, [peer], spec.frustum, now_us)
                if detections and first_perception_t is None:
                    first_perception_t = now_us / 1e6

            # (4) ego command
            cmd = command_source.step(ego, detections, now_us, v2v_msgs)
            cmd = replace(cmd, seq=tick, timestamp=now_us)

            # (5) apply: local integration or dispatch over the thread
            if physical_link is not None:
                try:
                    physical_link.send(cmd)
                except ThreadSevered as exc:
                    raise ThreadLostError("digital thread lost") from exc
            else:
                ego = step(ego, cmd, spec.ego_config, settings)

            # (6) KPI sample
            t = (tick + 1) * spec.dt
            s_now = arc_length_along(ego_path, (ego.pose.x, ego.pose.y))
            gap = rect_gap(ego.pose, spec.ego_config, peer.pose, spec.peer_config)
            samples.append(
                KpiSample(
                    t=t,
                    s=s_now,
                    speed=ego.speed,
                    throttle=cmd.throttle,
                    brake=cmd.brake,
                    accel=ego.accel,
                    peer_gap=gap,
                )
            )
            if first_brake_t is None and cmd.brake > 0.1:
                first_brake_t = t
            if observer is not None:
                observer(
                    {
                        "tick": tick,
                        "t": t,
                        "phase": "running",
                        "ego": ego,
                        "peer": peer,
                        "command": cmd,
                        "warnings": sorted(active_warnings),
                        "ego_s": s_now,
                    }
                )

            # (7) termination
            if collision_check(ego.pose, spec.ego_config, peer.pose, spec.peer_config):
                collision = True
                terminated = "collision"
                break
            if script.launched and ego.speed == 0.0:
                stop_distance = s_now
                terminated = "stopped"
                break
            if s_now >= ego_path_len - PATH_END_SLACK_M:
                terminated = "path_end"
                break
    except ThreadLostError:
        terminated = "thread_lost"

    completed = terminated in ("stopped", "collision", "path_end", "duration")

    peak_accel = max((smp.accel for smp in samples), default=0.0)
    peak_decel = min((smp.accel for smp in samples), default=0.0)
    min_gap = min((smp.peer_gap for smp in samples), default=math.inf)

    if spec.mode == "hv":
        launch = script.launch_t_us
        first_awareness = launch / 1e6 if launch is not None else None
    else:
        candidates = [x for x in (first_v2v_t, first_perception_t) if x is not None]
        first_awareness = min(candidates) if candidates else None
    reaction = None
    if first_awareness is not None and first_brake_t is not None and first_brake_t >= first_awareness:
        reaction = first_brake_t - first_awareness

    report = RunReport(
        mode=spec.mode,
        stop_distance_s=stop_distance,
        peak_accel=peak_accel,
        peak_decel=peak_decel,
        min_gap=min_gap if samples else 0.0,
        collision=collision,
        reaction_time=reaction,
        completed=completed,
        terminated=terminated,
        duration_s=samples[-1].t if samples else 0.0,
        seed=spec.rng_seed,
        geometry_fingerprint=spec.geometry_fingerprint(),
        first_awareness_t=first_awareness,
        first_v2v_t=first_v2v_t,
        first_perception_t=first_perception_t,
        session_id=getattr(command_source, "session_id", None),
    )
    result = RunResult(report=report, samples=tuple(samples))
    if observer is not None:
        observer({"phase": "complete", "report": report, "t": report.duration_s})
    return result


def _bsm(state: VehicleState, seq: int) -> BasicSafetyMsg:
    return BasicSafetyMsg(
        sender_id=state.vehicle_id,
        pose=state.pose,
        speed=state.speed,
        accel=state.accel,
        timestamp=state.timestamp,
        seq=seq,
    )


def _assess_warnings(
    tracks: dict[str, BasicSafetyMsg], ego_path: Sequence[Point], ego_s: float
) -> set[str]:
    active = set()
    for sender, msg in tracks.items():
        if sender == EGO_ID:
            continue
        entry = predict_corridor_entry(msg.pose, msg.speed, ego_path, ego_s, CONFLICT_HORIZON_S)
        if entry is not None:
            active.add(sender)
    return active


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------


def compare(reports: Sequence[RunReport]) -> list[RunReport]:
    """Order reports by stop distance (never-stopped runs sink to the end).

    All reports must come from the same scenario geometry; mixing geometries
    raises ValueError("incomparable runs"). Ties keep input order.
    """
    if not reports:
        raise ValueError("nothing to compare")
    prints = {r.geometry_fingerprint for r in reports}
    if len(prints) != 1:
        raise ValueError("incomparable runs")
    return sorted(reports, key=lambda r: math.inf if r.stop_distance_s is None else r.stop_distance_s)


_TABLE_COLUMNS = (
    "mode",
    "stop_distance_s",
    "peak_accel",
    "peak_decel",
    "min_gap",
    "collision",
    "reaction_time",
    "completed",
)


def render_comparison(reports: Sequence[RunReport]) -> str:
    rows = compare(reports)
    cells = [
        [_cell(getattr(r, col)) for col in _TABLE_COLUMNS]
        for r in rows
    ]
    widths = [
        max(len(_TABLE_COLUMNS[i]), *(len(row[i]) for row in cells)) for i in range(len(_TABLE_COLUMNS))
    ]
    header = "  ".join(name.ljust(widths[i]) for i, name in enumerate(_TABLE_COLUMNS))
    lines = [header, "  ".join("-" * w for w in widths)]
    for row in cells:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(len(row))))
    return "\n".join(lines)


def comparison_csv(reports: Sequence[RunReport]) -> str:
    rows = compare(reports)
    out = [",".join(_TABLE_COLUMNS)]
    for r in rows:
        out.append(",".join(_cell(getattr(r, col)) for col in _TABLE_COLUMNS))
    return "\n".join(out) + "\n"


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return format(value, ".4g")
    return str(value)


# ---------------------------------------------------------------------------
# export / import
# ---------------------------------------------------------------------------


def _quant(x: Any) -> Any:
    """Quantize floats to 9 significant digits so exports are stable and
    re-export after import is byte-identical."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, float):
        if math.isinf(x):
            return None
        return float(format(x, ".9g"))
    if isinstance(x, dict):
        return {k: _quant(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_quant(v) for v in x]
    return x


def run_to_json(result: RunResult) -> str:
    payload = {
        "report": _quant(result.report.to_dict()),
        "samples": [
            _quant(
                {
                    "t": s.t,
                    "s": s.s,
                    "speed": s.speed,
                    "throttle": s.throttle,
                    "brake": s.brake,
                    "accel": s.accel,
                    "peer_gap": s.peer_gap,
                }
            )
            for s in result.samples
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"


def run_from_json(text: str) -> RunResult:
    data = json.loads(text)
    report = RunReport.from_dict(data["report"])
    samples = tuple(
        KpiSample(
            t=s["t"],
            s=s["s"],
            speed=s["speed"],
            throttle=s["throttle"],
            brake=s["brake"],
            accel=s["accel"],
            peer_gap=s["peer_gap"] if s["peer_gap"] is not None else math.inf,
        )
        for s in data["samples"]
    )
    return RunResult(report=report, samples=samples)


def export_run(result: RunResult, path: str | Path) -> None:
    Path(path).write_text(run_to_json(result))


def load_run(path: str | Path) -> RunResult:
    return run_from_json(Path(path).read_text())


def export(result: RunResult, path: str | Path, format: str = "json") -> int:
    """Write a run to disk; returns bytes written. json = report + samples,
    csv = KPI samples only."""
    if format == "json":
        text = run_to_json(result)
    elif format == "csv":
        text = kpi_csv(result.samples)
    else:
        raise ValueError(f"unknown format {format!r}")
    data = text.encode()
    Path(path).write_bytes(data)
    return len(data)


def kpi_csv(samples: Iterable[KpiSample]) -> str:
    lines = [KPI_CSV_HEADER]
    for s in samples:
        lines.append(
            ",".join(
                format(v, ".9g")
                for v in (s.t, s.s, s.speed, s.throttle, s.brake, s.accel, s.peer_gap)
            )
        )
    return "\n".join(lines) + "\n"


def export_kpi_csv(samples: Iterable[KpiSample], path: str | Path) -> None:
    Path(path).write_text(kpi_csv(samples))


__all__ = [
    "ScenarioSpec",
    "KpiSample",
    "RunReport",
    "RunResult",
    "ThreadLostError",
    "PhysicalLink",
    "CommandSource",
    "default_scenario",
    "load_scenario",
    "run",
    "compare",
    "render_comparison",
    "comparison_csv",
    "run_to_json",
    "run_from_json",
    "export",
    "export_run",
    "load_run",
    "kpi_csv",
    "export_kpi_csv",
    "KPI_CSV_HEADER",
    "EGO_ID",
    "PEER_ID",
]

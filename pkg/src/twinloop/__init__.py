"""twinloop: desk-scale vehicle digital-twin co-simulation.

A deterministic tick loop couples virtual vehicles (and optionally one
physical-twin emulator) through a seq-ordered state/command thread, exchanges
V2X safety messages over a seeded lossy channel, runs scripted crossing
conflicts against autonomous / connected / human ego drivers, and scores the
human sessions with a standard presence questionnaire.
"""

from .scene import (
    ControlCommand,
    Lane,
    Pose2D,
    RoadNetwork,
    VehicleConfig,
    VehicleState,
    arc_length_along,
    clamp_command,
    collision_check,
)
from .dynamics import IntegratorSettings, step, stopping_distance
from .twinthread import StateUpdate, SyncPolicy, TwinRegistry, dispatch_command
from .v2x import BasicSafetyMsg, ChannelModel, V2xBus
from .autonomy import (
    AvController,
    CavController,
    ControllerParams,
    DetectionEvent,
    PeerScript,
    SensorFrustum,
    perceive,
)
from .scenario import (
    KpiSample,
    RunReport,
    RunResult,
    ScenarioSpec,
    compare,
    default_scenario,
    load_scenario,
    run,
)

__version__ = "0.1.0"

"""System assembly: configuration, node wiring, clock, scenarios, replay.

launch() builds the whole node graph on one bus, subscribes everything before
the first dispatch, and returns a System handle. In logical-clock mode the
clock advances in fixed 1/tick_hz steps and HTTP-injected events are stamped
to the next tick boundary, so a (config, seed, scenario) triple fully
determines the trace file.
"""

from __future__ import annotations

import json
import math
import queue
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from . import messages as m
from .bus import Bus
from .geodesy import GeoPoint, UtmPoint, utm_to_wgs84
from .planner import PlannerConfig, PurePursuitPlanner
from .rtk_adapters import (
    DEFAULT_HEARTBEAT_TIMEOUT,
    DEFAULT_STALENESS_THRESHOLD,
    ActorLocalization,
    EstopHeartbeat,
    LowLevelController,
    OdomRepub,
    PiksiOdomPub,
    SpeedCurvToTwist,
)
from .summon_service import (
    DEFAULT_HOST,
    DEFAULT_PORT,
    PointAndGoNode,
    SummonService,
    TelemetryFrame,
)
from .vehicle_sim import SimConfig, VehicleSim

LOCALIZATION_NODES = ("actor_localization", "odom_repub")


class ConfigError(ValueError):
    pass


class TraceParseError(ValueError):
    def __init__(self, line_no: int, detail: str):
        super().__init__(f"trace line {line_no}: {detail}")
        self.line_no = line_no


@dataclass
class LaunchConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    staleness_threshold: float = DEFAULT_STALENESS_THRESHOLD
    heartbeat_timeout: float = DEFAULT_HEARTBEAT_TIMEOUT
    http_host: str = DEFAULT_HOST
    http_port: int = DEFAULT_PORT
    http_enabled: bool = True
    clock: str = "logical"  # "logical" | "wall"
    seed: Optional[int] = 0
    localization_nodes: tuple = ("actor_localization",)
    steering_sense: float = 1.0
    telemetry_hz: float = 10.0
    scenario: Optional[str] = None
    trace: Optional[str] = None

    def validate(self) -> None:
        try:
            self.sim.validate()
            self.planner.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.clock not in ("logical", "wall"):
            raise ConfigError(f"clock must be 'logical' or 'wall', not {self.clock!r}")
        if self.clock == "logical" and self.seed is None:
            raise ConfigError("seed is mandatory in logical-clock mode")
        nodes = tuple(self.localization_nodes)
        if len(nodes) != 1 or nodes[0] not in LOCALIZATION_NODES:
            raise ConfigError(
                f"exactly one localization node of {LOCALIZATION_NODES} must be enabled, "
                f"got {nodes}"
            )
        if self.steering_sense not in (1.0, -1.0):
            raise ConfigError("steering_sense must be +1 or -1")
        if self.telemetry_hz < 5.0:
            raise ConfigError("telemetry_hz must be at least 5")
        if self.planner.utm_zone != self.sim.utm_zone:
            raise ConfigError("planner and sim utm_zone differ")

    @classmethod
    def from_json(cls, text: str) -> "LaunchConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        cfg = cls()
        for section, target in (("sim", cfg.sim), ("planner", cfg.planner)):
            sub = obj.pop(section, {})
            if not isinstance(sub, dict):
                raise ConfigError(f"{section} must be an object")
            valid = {f.name for f in fields(target)}
            for k, v in sub.items():
                if k not in valid:
                    raise ConfigError(f"unknown {section} key {k!r}")
                setattr(target, k, v)
        top = {f.name for f in fields(cls)} - {"sim", "planner"}
        for k, v in obj.items():
            if k not in top:
                raise ConfigError(f"unknown config key {k!r}")
            if k == "localization_nodes":
                v = tuple(v)
            setattr(cfg, k, v)
        cfg.validate()
        return cfg


# --- scenario ----------------------------------------------------------------

EVENT_TYPES = {
    "summon",
    "set_gps_mode",
    "inject_override",
    "reset_estop",
    "suppress_ulc",
    "add_obstacle",
    "remove_obstacles",
}


@dataclass
class Scenario:
    duration: float
    events: list = field(default_factory=list)
    assertions: list = field(default_factory=list)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"scenario is not valid JSON: {exc}") from None
        if not isinstance(obj, dict) or "duration" not in obj:
            raise ConfigError("scenario must be an object with a 'duration'")
        duration = float(obj["duration"])
        if duration <= 0:
            raise ConfigError("duration must be positive")
        events = obj.get("events", [])
        for ev in events:
            if not isinstance(ev, dict) or "t" not in ev or "type" not in ev:
                raise ConfigError(f"event needs 't' and 'type': {ev!r}")
            if ev["type"] not in EVENT_TYPES:
                raise ConfigError(f"unknown event type {ev['type']!r}")
        assertions = obj.get("assertions", [])
        for a in assertions:
            if not isinstance(a, dict) or a.get("type") not in ("arrived", "stopped_at_end"):
                raise ConfigError(f"unknown assertion {a!r}")
        return cls(duration=duration,
                   events=sorted(events, key=lambda e: float(e["t"])),
                   assertions=assertions)


# --- the running system ------------------------------------------------------

class System:
    """All nodes wired on one bus, plus the clock driving them."""

    def __init__(self, config: LaunchConfig):
        config.validate()
        self.config = config
        self.dt = 1.0 / config.sim.tick_hz
        self.sim_time = 0.0
        self._tick_count = 0
        self._trace_file = None
        if config.trace:
            self._trace_file = open(config.trace, "w", buffering=1)
        self.bus = Bus(trace_file=self._trace_file)
        self.bus.register_all(m.TOPIC_TYPES)

        self.vehicle = VehicleSim(self.bus, config.sim, seed=config.seed or 0)
        self.speed_curv_to_twist = SpeedCurvToTwist(self.bus)
        self.piksi_odom_pub = PiksiOdomPub(
            self.bus,
            base_easting=config.sim.base_easting,
            base_northing=config.sim.base_northing,
            utm_zone=config.sim.utm_zone,
            hemisphere=config.sim.hemisphere,
        )
        self.localization: ActorLocalization | None = None
        self.odom_repub: OdomRepub | None = None
        if config.localization_nodes[0] == "actor_localization":
            self.localization = ActorLocalization(self.bus, config.staleness_threshold)
        else:
            self.odom_repub = OdomRepub(self.bus)
        self.estop_heartbeat = EstopHeartbeat(self.bus, config.heartbeat_timeout)
        self.low_level_controller = LowLevelController(self.bus, config.staleness_threshold)
        self.planner = PurePursuitPlanner(self.bus, config.planner)
        self.point_and_go = PointAndGoNode(self.bus)

        self.service: SummonService | None = None
        if config.http_enabled:
            try:
                self.service = SummonService(config.http_host, config.http_port)
            except OSError as exc:
                self._close_trace()
                raise ConfigError(f"cannot bind {config.http_host}:{config.http_port}: {exc}")
            self.service.start()

        self.last_frame: TelemetryFrame | None = None
        self.frames: list[TelemetryFrame] = []
        self._telemetry_div = max(1, round(config.sim.tick_hz / config.telemetry_hz))
        self._pending_events: list[dict] = []

        # steering sense is latched so the planner sees it regardless of start order
        self.bus.publish(m.TOPIC_STEERING_SENSE, config.steering_sense, self.sim_time)
        self.bus.dispatch_all()

    # -- event injection ------------------------------------------------------

    def inject(self, kind: str, arg=None) -> None:
        if kind == "summon":
            self.bus.publish(m.TOPIC_POINT_AND_GO, arg, self.sim_time)
        elif kind == "estop":
            self.vehicle.inject_override("physical_estop", bool(arg))
        elif kind == "reset_estop":
            self.estop_heartbeat.reset()
            self.low_level_controller.reset()
        else:
            raise ValueError(f"unknown injection {kind!r}")

    def _drain_http(self) -> None:
        if self.service is None:
            return
        while True:
            try:
                kind, arg = self.service.injections.get_nowait()
            except queue.Empty:
                break
            self.inject(kind, arg)

    def _apply_event(self, ev: dict) -> None:
        kind = ev["type"]
        if kind == "summon":
            self.inject(
                "summon",
                m.PointAndGo(
                    latitude=float(ev["latitude"]),
                    longitude=float(ev["longitude"]),
                    mobility_mode=ev.get("mobility_mode", m.DEFAULT_MOBILITY_MODE),
                ),
            )
        elif kind == "set_gps_mode":
            self.vehicle.set_gps_mode(ev["mode"])
        elif kind == "inject_override":
            self.vehicle.inject_override(ev["kind"], bool(ev["on"]))
        elif kind == "reset_estop":
            self.inject("reset_estop")
        elif kind == "suppress_ulc":
            self.vehicle.suppress_ulc = bool(ev["on"])
        elif kind == "add_obstacle":
            self.vehicle.obstacles.append(
                (float(ev["easting"]), float(ev["northing"]), float(ev["radius"]))
            )
        elif kind == "remove_obstacles":
            self.vehicle.obstacles.clear()

    def schedule(self, events: list[dict]) -> None:
        self._pending_events.extend(events)
        self._pending_events.sort(key=lambda e: float(e["t"]))

    # -- clock ----------------------------------------------------------------

    def step(self, n: int = 1) -> None:
        for _ in range(n):
            self.sim_time = round((self._tick_count + 1) * self.dt, 9)
            self._tick_count += 1
            self._drain_http()
            while self._pending_events and float(self._pending_events[0]["t"]) <= self.sim_time:
                self._apply_event(self._pending_events.pop(0))
            self.vehicle.on_tick(self.sim_time)
            self.estop_heartbeat.on_tick(self.sim_time)
            self.bus.dispatch_all()
            if self._tick_count % self._telemetry_div == 0:
                self._emit_telemetry()

    def run_until(self, t: float) -> None:
        while self.sim_time + self.dt / 2 < t:
            self.step()

    def run_wall(self, duration: Optional[float] = None) -> None:
        start = time.monotonic()
        while duration is None or time.monotonic() - start < duration:
            self.step()
            lag = self.sim_time - (time.monotonic() - start)
            if lag > 0:
                time.sleep(lag)

    # -- telemetry ------------------------------------------------------------

    def _emit_telemetry(self) -> None:
        s = self.vehicle.state
        cfg = self.config.sim
        vehicle_geo = utm_to_wgs84(
            UtmPoint(s.easting, s.northing, cfg.utm_zone, cfg.hemisphere)
        )
        goal_geo: GeoPoint | None = None
        if self.planner.goal is not None:
            g = self.planner.goal
            goal_geo = utm_to_wgs84(UtmPoint(g.easting, g.northing, g.utm_zone, g.hemisphere))
        if self.localization is not None:
            fix = self.localization.active(self.sim_time).value
        else:
            fix = self.vehicle.gps_mode.value
        frame = TelemetryFrame(
            sim_time=self.sim_time,
            vehicle=vehicle_geo,
            heading=s.yaw,
            goal=goal_geo,
            fix=fix,
            estop=(
                self.estop_heartbeat.latch.estopped
                or self.low_level_controller.estopped
                or s.physical_estop
            ),
            arrived=self.planner.arrived,
            obstacles_nearby=len(self.planner._scan.points) > 0,
        )
        self.last_frame = frame
        self.frames.append(frame)
        if self.service is not None:
            self.service.hub.push(frame)

    # -- teardown -------------------------------------------------------------

    def _close_trace(self) -> None:
        if self._trace_file is not None:
            self._trace_file.close()
            self._trace_file = None

    def close(self) -> None:
        if self.service is not None:
            self.service.close_streams()
            self.service.stop()
            self.service = None
        self._close_trace()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def launch(config: LaunchConfig) -> System:
    """Validate the config and bring up the full node graph."""
    return System(config)


def run_scenario(config: LaunchConfig, scenario: Scenario) -> int:
    """Run a scenario to completion; exit code 0 ok, 1 assertion failed."""
    with launch(config) as system:
        system.schedule(scenario.events)
        arrival_time: Optional[float] = None
        goal_at_arrival = None
        while system.sim_time + system.dt / 2 < scenario.duration:
            system.step()
            if arrival_time is None and system.planner.arrived:
                arrival_time = system.sim_time
                goal_at_arrival = system.planner.goal
        failures = []
        for a in scenario.assertions:
            if a["type"] == "arrived":
                tol = float(a.get("tolerance", config.planner.arrival_tolerance))
                by = float(a.get("by", scenario.duration))
                ok = arrival_time is not None and arrival_time <= by
                if ok and goal_at_arrival is not None:
                    s = system.vehicle.state
                    d = math.hypot(
                        goal_at_arrival.easting - s.easting,
                        goal_at_arrival.northing - s.northing,
                    )
                    ok = d <= tol
                if not ok:
                    failures.append(f"arrived assertion failed (arrival_time={arrival_time})")
            elif a["type"] == "stopped_at_end":
                if system.vehicle.state.speed > 1e-9:
                    failures.append(
                        f"stopped_at_end failed (speed={system.vehicle.state.speed})"
                    )
        for f in failures:
            print(f"ASSERTION FAILED: {f}")
        return 1 if failures else 0


# --- replay ------------------------------------------------------------------

@dataclass
class ReplayReport:
    records: int
    topics: int
    violations: list

    def to_text(self) -> str:
        lines = [f"records: {self.records}", f"topics: {self.topics}",
                 f"violations: {len(self.violations)}"]
        lines.extend(self.violations)
        return "\n".join(lines) + "\n"


def replay(path: str | Path) -> ReplayReport:
    """Re-check a trace file against the bus and message invariants."""
    next_seq: dict[str, int] = {}
    last_time: dict[str, float] = {}
    violations: list[str] = []
    records = 0
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceParseError(line_no, f"bad JSON: {exc}")
            try:
                topic = rec["topic"]
                seq = rec["seq"]
                sim_time = rec["sim_time"]
                payload_obj = rec["payload"]
            except (KeyError, TypeError):
                raise TraceParseError(line_no, "missing seq/sim_time/topic/payload")
            records += 1
            expected_type = m.TOPIC_TYPES.get(topic)
            if expected_type is None:
                violations.append(f"line {line_no}: unknown topic {topic!r}")
                continue
            want = next_seq.get(topic, 0)
            if seq != want:
                violations.append(
                    f"line {line_no}: FIFO violation on {topic!r}: seq {seq}, expected {want}"
                )
            next_seq[topic] = max(want, seq + 1)
            if sim_time < last_time.get(topic, 0.0):
                violations.append(
                    f"line {line_no}: sim_time went backwards on {topic!r}"
                )
            last_time[topic] = max(last_time.get(topic, 0.0), sim_time)
            try:
                payload = m.payload_from_wire(payload_obj)
            except (KeyError, ValueError, TypeError) as exc:
                violations.append(f"line {line_no}: undecodable payload: {exc}")
                continue
            if expected_type in (bool, float):
                ok = isinstance(payload, expected_type) or (
                    expected_type is float and isinstance(payload, int)
                )
            else:
                ok = isinstance(payload, expected_type)
            if not ok:
                violations.append(
                    f"line {line_no}: payload type {type(payload).__name__} "
                    f"does not match {expected_type.__name__} on {topic!r}"
                )
                continue
            violations.extend(
                f"line {line_no}: {v}" for v in _payload_violations(payload)
            )
    return ReplayReport(records=records, topics=len(next_seq), violations=violations)


def _payload_violations(payload) -> list[str]:
    out = []
    if isinstance(payload, m.Twist):
        if not (math.isfinite(payload.linear_x) and math.isfinite(payload.angular_z)):
            out.append("non-finite Twist")
    elif isinstance(payload, m.Odometry):
        if not (0.0 <= payload.yaw < 2 * math.pi):
            out.append(f"odometry yaw {payload.yaw} outside [0, 2pi)")
        if payload.position_sigma <= 0:
            out.append("odometry position_sigma must be positive")
    elif isinstance(payload, m.PointAndGo):
        if abs(payload.latitude) > 90 or abs(payload.longitude) > 180:
            out.append("PointAndGo coordinates out of range")
    elif isinstance(payload, m.BestFixStatus):
        if payload.age < 0:
            out.append("BestFixStatus age negative")
    return out

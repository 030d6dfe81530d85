"""Simulated drive-by-wire vehicle with GPS, heading, and lidar sensor models.

Unicycle kinematics in compass convention (yaw 0 = north, clockwise
positive): easting += v*sin(yaw)*dt, northing += v*cos(yaw)*dt. Speed slews
toward the commanded value at max_accel; any override or physical e-stop
forces the commanded speed to zero. GPS samples are ENU offsets from a
configured base station with Gaussian noise; lidar emits ring points for
every configured circular obstacle within range.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

from . import messages as m
from .bus import Bus
from .geodesy import normalize_compass

LIDAR_RANGE = 30.0
LIDAR_RING_POINTS = 36
HEADING_SIGMA = math.radians(0.5)


@dataclass
class SimConfig:
    wheelbase: float = 1.9
    max_speed: float = 4.0
    max_accel: float = 1.5
    max_curvature: float = 0.35
    tick_hz: float = 50.0
    gps_sigma_rtk: float = 0.02
    gps_sigma_spp: float = 1.5
    gps_rate_hz: float = 10.0
    lidar_rate_hz: float = 10.0
    start_easting: float = 315000.0
    start_northing: float = 4704000.0
    start_yaw: float = 0.0
    utm_zone: int = 17
    hemisphere: str = "N"
    base_easting: float = 315000.0
    base_northing: float = 4704000.0
    obstacles: list = field(default_factory=list)  # of (easting, northing, radius)

    def validate(self) -> None:
        for name in ("wheelbase", "max_speed", "max_accel", "max_curvature",
                     "tick_hz", "gps_sigma_rtk", "gps_sigma_spp",
                     "gps_rate_hz", "lidar_rate_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.gps_sigma_rtk >= self.gps_sigma_spp:
            raise ValueError("gps_sigma_rtk must be below gps_sigma_spp")


@dataclass(frozen=True)
class VehicleState:
    easting: float
    northing: float
    yaw: float  # compass rad in [0, 2pi)
    speed: float
    dbw_enabled: bool = True
    override_steering: bool = False
    override_pedals: bool = False
    physical_estop: bool = False

    @property
    def any_override(self) -> bool:
        return (
            self.override_steering
            or self.override_pedals
            or self.physical_estop
            or not self.dbw_enabled
        )


def tick(state: VehicleState, cmd: m.Twist, dt: float, config: SimConfig) -> VehicleState:
    """Advance the vehicle state one fixed timestep under a Twist command.

    The slewed speed applies within the same step; position integrates with
    the pre-step yaw.
    """
    target = cmd.linear_x if math.isfinite(cmd.linear_x) else 0.0
    target = min(max(target, 0.0), config.max_speed)
    if state.any_override:
        target = 0.0
    dv = target - state.speed
    max_dv = config.max_accel * dt
    speed = state.speed + min(max(dv, -max_dv), max_dv)

    omega = cmd.angular_z if math.isfinite(cmd.angular_z) else 0.0
    omega_max = config.max_speed * config.max_curvature
    omega = min(max(omega, -omega_max), omega_max)

    yaw = normalize_compass(state.yaw + omega * dt)
    return replace(
        state,
        easting=state.easting + speed * math.sin(state.yaw) * dt,
        northing=state.northing + speed * math.cos(state.yaw) * dt,
        yaw=yaw,
        speed=speed,
    )


class VehicleSim:
    """Bus node wrapping the kinematic model and the sensor emitters."""

    def __init__(self, bus: Bus, config: SimConfig, seed: int = 0):
        config.validate()
        self.bus = bus
        self.config = config
        self.rng = random.Random(seed)
        self.state = VehicleState(
            easting=config.start_easting,
            northing=config.start_northing,
            yaw=normalize_compass(config.start_yaw),
            speed=0.0,
        )
        self.gps_mode = m.FixQuality.RTK
        self.suppress_ulc = False
        self.obstacles: list[tuple[float, float, float]] = [
            tuple(o) for o in config.obstacles
        ]
        self._cmd = m.Twist(0.0, 0.0)
        self._gps_div = max(1, round(config.tick_hz / config.gps_rate_hz))
        self._lidar_div = max(1, round(config.tick_hz / config.lidar_rate_hz))
        self._tick_count = 0
        bus.subscribe(m.TOPIC_CMD_VEL, self._on_cmd_vel)

    def _on_cmd_vel(self, env) -> None:
        self._cmd = env.payload

    def inject_override(self, kind: str, on: bool) -> None:
        if kind == "steering":
            self.state = replace(self.state, override_steering=on)
        elif kind == "pedals":
            self.state = replace(self.state, override_pedals=on)
        elif kind == "physical_estop":
            self.state = replace(self.state, physical_estop=on)
        elif kind == "dbw":
            self.state = replace(self.state, dbw_enabled=on)
        else:
            raise ValueError(f"unknown override kind {kind!r}")

    def set_gps_mode(self, mode: str) -> None:
        self.gps_mode = m.FixQuality(mode)

    def on_tick(self, sim_time: float) -> None:
        dt = 1.0 / self.config.tick_hz
        self.state = tick(self.state, self._cmd, dt, self.config)
        self._tick_count += 1
        self.publish_ulc_report(sim_time)
        if self._tick_count % self._gps_div == 0:
            self.sample_gps(sim_time)
        if self._tick_count % self._lidar_div == 0:
            self.sample_lidar(sim_time)

    def publish_ulc_report(self, sim_time: float) -> None:
        if self.suppress_ulc:
            return
        s = self.state
        self.bus.publish(
            m.TOPIC_ULC_REPORT,
            m.UlcReport(
                measured_speed=s.speed,
                # the physical e-stop cuts the by-wire channel
                dbw_enabled=s.dbw_enabled and not s.physical_estop,
                override_steering=s.override_steering,
                override_pedals=s.override_pedals,
                sim_time=sim_time,
            ),
            sim_time,
        )

    def sample_gps(self, sim_time: float) -> None:
        s = self.state
        cfg = self.config
        east = s.easting - cfg.base_easting
        north = s.northing - cfg.base_northing
        mode = self.gps_mode
        if mode is m.FixQuality.RTK:
            self.bus.publish(
                m.TOPIC_ENU_POSE_FIX,
                m.GpsFixSample(
                    kind=m.GpsKind.ENU_FIX,
                    east=east + self.rng.gauss(0.0, cfg.gps_sigma_rtk),
                    north=north + self.rng.gauss(0.0, cfg.gps_sigma_rtk),
                    sigma=cfg.gps_sigma_rtk,
                    sim_time=sim_time,
                ),
                sim_time,
            )
        if mode in (m.FixQuality.RTK, m.FixQuality.SPP):
            self.bus.publish(
                m.TOPIC_ENU_POSE_SPP,
                m.GpsFixSample(
                    kind=m.GpsKind.ENU_SPP,
                    east=east + self.rng.gauss(0.0, cfg.gps_sigma_spp),
                    north=north + self.rng.gauss(0.0, cfg.gps_sigma_spp),
                    sigma=cfg.gps_sigma_spp,
                    sim_time=sim_time,
                ),
                sim_time,
            )
            heading = normalize_compass(s.yaw + self.rng.gauss(0.0, HEADING_SIGMA))
            self.bus.publish(
                m.TOPIC_BASELINE_HEADING, m.BaselineHeading(heading=heading), sim_time
            )
        self.bus.publish(
            m.TOPIC_BEST_FIX, m.BestFixStatus(quality=mode, age=0.0), sim_time
        )

    def sample_lidar(self, sim_time: float) -> None:
        s = self.state
        points: list[tuple[float, float, float]] = []
        sin_yaw, cos_yaw = math.sin(s.yaw), math.cos(s.yaw)
        for (oe, on_, radius) in self.obstacles:
            de, dn = oe - s.easting, on_ - s.northing
            if math.hypot(de, dn) > LIDAR_RANGE:
                continue
            for k in range(LIDAR_RING_POINTS):
                ang = 2 * math.pi * k / LIDAR_RING_POINTS
                pe = de + radius * math.cos(ang)
                pn = dn + radius * math.sin(ang)
                x = pe * sin_yaw + pn * cos_yaw  # forward
                y = -pe * cos_yaw + pn * sin_yaw  # left
                points.append((x, y, 0.0))
        self.bus.publish(m.TOPIC_LIDAR, m.LidarScan(points=tuple(points)), sim_time)

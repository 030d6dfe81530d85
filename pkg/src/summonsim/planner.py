"""Point-and-go planner: pure pursuit toward a single summoned waypoint.

This is a documented stand-in for the proprietary planner it replaces: drive
to the goal along a pure-pursuit arc (kappa = 2*y/L^2 toward a lookahead
target), slow down linearly near the goal, and stop while any lidar point
sits in the forward corridor. It never steers around obstacles.

Curvature sign convention matches the compass frame used everywhere else:
positive curvature turns clockwise (to the right).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from . import messages as m
from .bus import Bus, Envelope
from .geodesy import normalize_signed

log = logging.getLogger(__name__)

WAYPOINT_MOBILITY_MODE = 14


class ZoneMismatchError(ValueError):
    """Waypoint lies in a different UTM zone than the vehicle."""


@dataclass
class PlannerConfig:
    lookahead: float = 4.0
    cruise_speed: float = 2.0
    arrival_tolerance: float = 1.5
    stop_distance: float = 4.0
    corridor_half_width: float = 1.2
    max_curvature: float = 0.35
    utm_zone: int = 17
    hemisphere: str = "N"

    def validate(self) -> None:
        if not self.lookahead > self.arrival_tolerance > 0:
            raise ValueError("need lookahead > arrival_tolerance > 0")
        for name in ("cruise_speed", "stop_distance", "corridor_half_width",
                     "max_curvature"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def corridor_blocked(scan: m.LidarScan, stop_distance: float, half_width: float) -> bool:
    return any(
        0.0 < x <= stop_distance and abs(y) <= half_width for (x, y, _z) in scan.points
    )


class PurePursuitPlanner:
    """Bus node; recomputes a setpoint on every Velocity6D envelope."""

    def __init__(self, bus: Bus, config: PlannerConfig | None = None):
        self.bus = bus
        self.config = config or PlannerConfig()
        self.config.validate()
        self.goal: m.Waypoint | None = None
        self.mode: m.MobilityMode | None = None
        self.arrived = False
        self._steering_sense = 1.0
        self._scan = m.LidarScan()
        bus.subscribe(m.TOPIC_WAYPOINT, self._on_waypoint, latched=True)
        bus.subscribe(m.TOPIC_MOBILITY_MODE, self._on_mode, latched=True)
        bus.subscribe(m.TOPIC_STEERING_SENSE, self._on_sense, latched=True)
        bus.subscribe(m.TOPIC_LIDAR, self._on_scan)
        bus.subscribe(m.TOPIC_VELOCITY6D, self._on_velocity)

    # -- goal management ------------------------------------------------------

    def set_goal(self, waypoint: m.Waypoint, mode: m.MobilityMode) -> None:
        """Install a goal; mode other than 'go to waypoint' (14) idles the planner."""
        if mode.mobilityMode != WAYPOINT_MOBILITY_MODE:
            log.info("mobility mode %d is not waypoint driving; idling", mode.mobilityMode)
            self.goal = None
            self.mode = mode
            self.arrived = False
            return
        if waypoint.utm_zone != self.config.utm_zone or waypoint.hemisphere != self.config.hemisphere:
            raise ZoneMismatchError(
                f"waypoint zone {waypoint.utm_zone}{waypoint.hemisphere} != "
                f"vehicle zone {self.config.utm_zone}{self.config.hemisphere}"
            )
        self.goal = waypoint
        self.mode = mode
        self.arrived = False

    def _maybe_set_goal(self) -> None:
        if self._pending_waypoint is None or self._pending_mode is None:
            return
        try:
            self.set_goal(self._pending_waypoint, self._pending_mode)
        except ZoneMismatchError as exc:
            log.warning("rejecting waypoint: %s", exc)

    _pending_waypoint: m.Waypoint | None = None
    _pending_mode: m.MobilityMode | None = None

    def _on_waypoint(self, env: Envelope) -> None:
        self._pending_waypoint = env.payload
        self._maybe_set_goal()

    def _on_mode(self, env: Envelope) -> None:
        self._pending_mode = env.payload
        self._maybe_set_goal()

    def _on_sense(self, env: Envelope) -> None:
        self._steering_sense = float(env.payload)

    def _on_scan(self, env: Envelope) -> None:
        self._scan = env.payload

    # -- control --------------------------------------------------------------

    def active(self) -> bool:
        return (
            self.goal is not None
            and self.mode is not None
            and self.mode.mobilityMode == WAYPOINT_MOBILITY_MODE
        )

    def arrival_check(self, pose: m.Velocity6D, goal: m.Waypoint) -> bool:
        """Latched arrival: once inside the tolerance, stays true for this goal."""
        if not self.arrived:
            d = math.hypot(goal.easting - pose.easting, goal.northing - pose.northing)
            self.arrived = d <= self.config.arrival_tolerance
        return self.arrived

    def plan_step(self, pose: m.Velocity6D, scan: m.LidarScan) -> m.SpeedCurvatureSetpoint:
        """Compute the pure-pursuit setpoint for the current goal."""
        cfg = self.config
        goal = self.goal
        de = goal.easting - pose.easting
        dn = goal.northing - pose.northing
        d = math.hypot(de, dn)

        if self.arrival_check(pose, goal):
            return m.SpeedCurvatureSetpoint(0.0, 0.0, self._steering_sense)

        bearing = math.atan2(de, dn)  # compass bearing of the goal
        rel = normalize_signed(bearing - pose.yaw)  # clockwise-positive offset
        chord = min(d, cfg.lookahead)
        if abs(rel) > math.pi / 2:
            # goal behind the vehicle: turn as hard as possible toward it
            kappa = math.copysign(cfg.max_curvature, rel if rel != 0 else 1.0)
        else:
            kappa = 2.0 * math.sin(rel) / chord
            kappa = min(max(kappa, -cfg.max_curvature), cfg.max_curvature)

        speed = cfg.cruise_speed
        slow_zone = 2.0 * cfg.arrival_tolerance
        if d < slow_zone:
            speed = cfg.cruise_speed * d / slow_zone
        if corridor_blocked(scan, cfg.stop_distance, cfg.corridor_half_width):
            speed = 0.0
        return m.SpeedCurvatureSetpoint(speed, kappa, self._steering_sense)

    def _on_velocity(self, env: Envelope) -> None:
        if not self.active():
            return
        sp = self.plan_step(env.payload, self._scan)
        self.bus.publish(m.TOPIC_SPEED_SETPOINT, sp, env.sim_time)
        self.bus.publish(m.TOPIC_CURVATURE_SETPOINT, sp, env.sim_time)

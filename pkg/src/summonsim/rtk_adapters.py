"""Bridge nodes between the planner side and the drive-by-wire side.

Six single-threaded bus nodes: command conversion (speed/curvature -> Twist),
the GPS odometry pipeline, best-fix selection with SPP fallback, the e-stop
heartbeat monitor, and the low-level gate that zeroes setpoints while
e-stopped or localization-lost.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from . import messages as m
from .bus import Bus, Envelope
from .geodesy import normalize_signed

log = logging.getLogger(__name__)

DEFAULT_STALENESS_THRESHOLD = 1.0  # s without an RTK sample before SPP fallback
DEFAULT_HEARTBEAT_TIMEOUT = 0.5  # s without a ulc_report before e-stop


class SpeedCurvToTwist:
    """Converts gated speed/curvature setpoints to Twist commands (omega = v*kappa).

    Also watches estop_sense directly so a latched e-stop zeroes the output
    even if a stale setpoint is still in flight.
    """

    def __init__(self, bus: Bus):
        self.bus = bus
        self._estopped = False
        bus.subscribe(m.TOPIC_GATED_SETPOINT, self._on_setpoint)
        bus.subscribe(m.TOPIC_ESTOP_SENSE, self._on_estop)

    def _on_estop(self, env: Envelope) -> None:
        self._estopped = env.payload

    def _on_setpoint(self, env: Envelope) -> None:
        sp: m.SpeedCurvatureSetpoint = env.payload
        if not all(map(math.isfinite, (sp.speed, sp.curvature, sp.steering_sense))):
            log.warning("dropping non-finite setpoint %r", sp)
            return
        if self._estopped:
            twist = m.Twist(0.0, 0.0)
        else:
            twist = m.Twist(
                linear_x=sp.speed,
                angular_z=sp.steering_sense * sp.speed * sp.curvature,
            )
        self.bus.publish(m.TOPIC_CMD_VEL, twist, env.sim_time)


class PiksiOdomPub:
    """Fuses ENU position samples with the baseline heading into /odom.

    The most recent position sample wins; an RTK fix beats an SPP fix of the
    same timestamp. No odometry is produced until a heading has been seen.
    Speed comes from finite-differencing consecutive samples of the same kind.
    """

    def __init__(self, bus: Bus, base_easting: float, base_northing: float,
                 utm_zone: int, hemisphere: str = "N"):
        self.bus = bus
        self.base_easting = base_easting
        self.base_northing = base_northing
        self.utm_zone = utm_zone
        self.hemisphere = hemisphere
        self._heading: float | None = None
        self._prev: dict[m.GpsKind, m.GpsFixSample] = {}
        bus.subscribe(m.TOPIC_ENU_POSE_FIX, self._on_sample)
        bus.subscribe(m.TOPIC_ENU_POSE_SPP, self._on_sample)
        bus.subscribe(m.TOPIC_BASELINE_HEADING, self._on_heading)

    def _on_heading(self, env: Envelope) -> None:
        self._heading = env.payload.heading

    def _on_sample(self, env: Envelope) -> None:
        sample: m.GpsFixSample = env.payload
        if self._heading is None:
            return
        prev = self._prev.get(sample.kind)
        self._prev[sample.kind] = sample
        speed = 0.0
        if prev is not None and sample.sim_time > prev.sim_time:
            dist = math.hypot(sample.east - prev.east, sample.north - prev.north)
            speed = dist / (sample.sim_time - prev.sim_time)
        fix_type = (
            m.FixType.RTK_FIX if sample.kind is m.GpsKind.ENU_FIX else m.FixType.SPP
        )
        self.bus.publish(
            m.TOPIC_ODOM,
            m.Odometry(
                easting=self.base_easting + sample.east,
                northing=self.base_northing + sample.north,
                utm_zone=self.utm_zone,
                hemisphere=self.hemisphere,
                yaw=self._heading,
                speed=speed,
                fix_type=fix_type,
                position_sigma=sample.sigma,
            ),
            env.sim_time,
        )


class OdomRepub:
    """Republishes /odom verbatim to the near- and far-field topics."""

    def __init__(self, bus: Bus):
        self.bus = bus
        bus.subscribe(m.TOPIC_ODOM, self._on_odom)

    def _on_odom(self, env: Envelope) -> None:
        self.bus.publish(m.TOPIC_NEAR_FIELD_ODOM, env.payload, env.sim_time)
        self.bus.publish(m.TOPIC_FAR_FIELD_ODOM, env.payload, env.sim_time)


@dataclass
class FixSelectorState:
    last_rtk_time: float = -math.inf
    last_spp_time: float = -math.inf
    staleness_threshold: float = DEFAULT_STALENESS_THRESHOLD

    def active(self, now: float) -> m.FixQuality:
        if now - self.last_rtk_time < self.staleness_threshold:
            return m.FixQuality.RTK
        if now - self.last_spp_time < self.staleness_threshold:
            return m.FixQuality.SPP
        return m.FixQuality.NONE


class ActorLocalization:
    """Best-fix selector: forwards odometry from the active source only.

    RTK is preferred; SPP takes over once RTK has been silent longer than the
    staleness threshold; with both silent nothing is forwarded and the
    downstream gate treats localization as lost. Forwarded odometry also goes
    to /utm_odom, and each forward emits a Velocity6D derived from
    consecutive outputs.
    """

    def __init__(self, bus: Bus, staleness_threshold: float = DEFAULT_STALENESS_THRESHOLD):
        self.bus = bus
        self.selector = FixSelectorState(staleness_threshold=staleness_threshold)
        self._last_out: m.Odometry | None = None
        self._last_out_time = 0.0
        bus.subscribe(m.TOPIC_ENU_POSE_FIX, self._on_rtk_sample)
        bus.subscribe(m.TOPIC_ENU_POSE_SPP, self._on_spp_sample)
        bus.subscribe(m.TOPIC_BEST_FIX, lambda env: None)  # informational
        bus.subscribe(m.TOPIC_ODOM, self._on_odom)

    def _on_rtk_sample(self, env: Envelope) -> None:
        self.selector.last_rtk_time = env.sim_time

    def _on_spp_sample(self, env: Envelope) -> None:
        self.selector.last_spp_time = env.sim_time

    def active(self, now: float) -> m.FixQuality:
        return self.selector.active(now)

    def _on_odom(self, env: Envelope) -> None:
        odom: m.Odometry = env.payload
        active = self.selector.active(env.sim_time)
        if active is m.FixQuality.NONE:
            return
        wanted = m.FixType.RTK_FIX if active is m.FixQuality.RTK else m.FixType.SPP
        if odom.fix_type is not wanted:
            return
        for topic in (m.TOPIC_NEAR_FIELD_ODOM, m.TOPIC_FAR_FIELD_ODOM, m.TOPIC_UTM_ODOM):
            self.bus.publish(topic, odom, env.sim_time)
        yaw_rate = 0.0
        if self._last_out is not None and env.sim_time > self._last_out_time:
            dyaw = normalize_signed(odom.yaw - self._last_out.yaw)
            yaw_rate = dyaw / (env.sim_time - self._last_out_time)
        self._last_out = odom
        self._last_out_time = env.sim_time
        self.bus.publish(
            m.TOPIC_VELOCITY6D,
            m.Velocity6D(
                easting=odom.easting,
                northing=odom.northing,
                yaw=odom.yaw,
                v_forward=odom.speed,
                yaw_rate=yaw_rate,
            ),
            env.sim_time,
        )


@dataclass
class SafetyLatch:
    estopped: bool = False
    reason: str = ""

    def engage(self, reason: str) -> None:
        if not self.estopped:
            self.estopped = True
            self.reason = reason

    def reset(self) -> None:
        self.estopped = False
        self.reason = ""


class EstopHeartbeat:
    """Watches ulc_report for overrides and for silence; latches the e-stop.

    Publishes SafetyStatus on both safety monitor topics plus the boolean
    estop_sense every tick, and immediately when a report flips the latch.
    """

    def __init__(self, bus: Bus, heartbeat_timeout: float = DEFAULT_HEARTBEAT_TIMEOUT,
                 start_time: float = 0.0):
        self.bus = bus
        self.heartbeat_timeout = heartbeat_timeout
        self.latch = SafetyLatch()
        self.last_heartbeat = start_time
        bus.subscribe(m.TOPIC_ULC_REPORT, self._on_report)

    def _on_report(self, env: Envelope) -> None:
        report: m.UlcReport = env.payload
        self.last_heartbeat = env.sim_time
        was = self.latch.estopped
        if report.override_pedals:
            self.latch.engage("pedal override")
        if report.override_steering:
            self.latch.engage("steering override")
        if not report.dbw_enabled:
            self.latch.engage("dbw disabled")
        if self.latch.estopped and not was:
            self._publish(env.sim_time)

    def on_tick(self, now: float) -> None:
        if now - self.last_heartbeat > self.heartbeat_timeout:
            self.latch.engage("heartbeat lost")
        self._publish(now)

    def reset(self) -> None:
        self.latch.reset()

    def _publish(self, now: float) -> None:
        estopped = self.latch.estopped
        status = m.SafetyStatus(ok=not estopped, estop_active=estopped,
                                reason=self.latch.reason)
        self.bus.publish(m.TOPIC_SAFETY_STATUS, status, now)
        self.bus.publish(m.TOPIC_SAFETY_ESTOP, status, now)
        self.bus.publish(m.TOPIC_ESTOP_SENSE, estopped, now)


class LowLevelController:
    """Gate between planner setpoints and the command converter.

    Setpoints pass through while not e-stopped and localization is fresh;
    otherwise a zero setpoint is substituted. The e-stop latch clears only
    through an explicit reset.
    """

    def __init__(self, bus: Bus, localization_timeout: float = DEFAULT_STALENESS_THRESHOLD):
        self.bus = bus
        self.localization_timeout = localization_timeout
        self.estopped = False
        self._last_vel_time = -math.inf
        bus.subscribe(m.TOPIC_ESTOP_SENSE, self._on_estop)
        bus.subscribe(m.TOPIC_VELOCITY6D, self._on_velocity)
        bus.subscribe(m.TOPIC_SPEED_SETPOINT, self._on_setpoint)

    def _on_estop(self, env: Envelope) -> None:
        if env.payload and not self.estopped:
            self.estopped = True
            # stop immediately instead of waiting for the next setpoint
            self.bus.publish(
                m.TOPIC_GATED_SETPOINT, m.SpeedCurvatureSetpoint(0.0, 0.0), env.sim_time
            )

    def _on_velocity(self, env: Envelope) -> None:
        self._last_vel_time = env.sim_time

    def localization_valid(self, now: float) -> bool:
        return now - self._last_vel_time <= self.localization_timeout

    def _on_setpoint(self, env: Envelope) -> None:
        sp: m.SpeedCurvatureSetpoint = env.payload
        if self.estopped or not self.localization_valid(env.sim_time):
            sp = m.SpeedCurvatureSetpoint(0.0, 0.0, sp.steering_sense)
        self.bus.publish(m.TOPIC_GATED_SETPOINT, sp, env.sim_time)

    def reset(self) -> None:
        self.estopped = False

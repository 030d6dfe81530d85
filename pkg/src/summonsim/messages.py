"""Message vocabulary shared by every node on the bus.

All messages are immutable dataclasses; the topic registry at the bottom maps
every topic string in the system to exactly one payload type.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, fields, is_dataclass


class FixType(enum.Enum):
    RTK_FIX = "RTK_FIX"
    SPP = "SPP"
    NONE = "NONE"


class GpsKind(enum.Enum):
    ENU_FIX = "ENU_FIX"
    ENU_SPP = "ENU_SPP"


class FixQuality(enum.Enum):
    RTK = "RTK"
    SPP = "SPP"
    NONE = "NONE"


@dataclass(frozen=True)
class Twist:
    """Planar velocity command for the drive-by-wire layer."""

    linear_x: float  # m/s
    angular_z: float  # rad/s, compass sense (clockwise positive)


@dataclass(frozen=True)
class SpeedCurvatureSetpoint:
    speed: float  # m/s
    curvature: float  # 1/m, positive = turn clockwise (toward larger compass yaw)
    steering_sense: float = 1.0  # +1 or -1


@dataclass(frozen=True)
class Odometry:
    easting: float
    northing: float
    utm_zone: int
    hemisphere: str  # "N" or "S"
    yaw: float  # compass rad, 0 = north, clockwise positive, in [0, 2pi)
    speed: float  # m/s
    fix_type: FixType = FixType.NONE
    position_sigma: float = 1.0


@dataclass(frozen=True)
class Velocity6D:
    easting: float
    northing: float
    yaw: float  # compass rad
    v_forward: float  # m/s
    v_lateral: float = 0.0
    yaw_rate: float = 0.0  # rad/s


@dataclass(frozen=True)
class GpsFixSample:
    kind: GpsKind
    east: float  # m, ENU offset from the base station
    north: float
    sigma: float
    sim_time: float


@dataclass(frozen=True)
class BaselineHeading:
    heading: float  # compass rad in [0, 2pi)


@dataclass(frozen=True)
class BestFixStatus:
    quality: FixQuality
    age: float = 0.0  # s since the underlying sample


@dataclass(frozen=True)
class PointAndGo:
    latitude: float
    longitude: float
    mobility_mode: str = "go to waypoint"


@dataclass(frozen=True)
class MobilityMode:
    mobilityMode: int
    idleReason: int


@dataclass(frozen=True)
class Waypoint:
    easting: float
    northing: float
    utm_zone: int
    hemisphere: str = "N"


@dataclass(frozen=True)
class UlcReport:
    measured_speed: float
    dbw_enabled: bool
    override_steering: bool
    override_pedals: bool
    sim_time: float


@dataclass(frozen=True)
class SafetyStatus:
    ok: bool
    estop_active: bool
    reason: str = ""


@dataclass(frozen=True)
class LidarScan:
    points: tuple = field(default_factory=tuple)  # of (x fwd, y left, z up) m


# --- summon wire format ------------------------------------------------------

DEFAULT_MOBILITY_MODE = "go to waypoint"


class WireError(ValueError):
    """Base class for summon wire-format failures (maps to HTTP 400)."""


class WireParseError(WireError):
    """Body is not a JSON object or a value has the wrong type."""


class WireMissingKeyError(WireError):
    """A required key is absent."""


class WireRangeError(WireError):
    """Latitude/longitude outside the valid range."""


def _wire_num(x: float):
    # shortest representation; integral values serialize without a decimal point
    xf = float(x)
    return int(xf) if xf == int(xf) else xf


def encode_wire(latitude: float, longitude: float, mobility_mode: str | None = None) -> str:
    """Encode a summon request as the JSON wire string."""
    obj: dict = {"latitude": _wire_num(latitude), "longitude": _wire_num(longitude)}
    if mobility_mode is not None:
        obj["mobility_mode"] = mobility_mode
    return json.dumps(obj, separators=(",", ":"))


def decode_wire(text: str) -> PointAndGo:
    """Parse a summon wire string into a PointAndGo.

    mobility_mode defaults to "go to waypoint" when absent.
    """
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise WireParseError(f"malformed JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise WireParseError("body must be a JSON object")
    for key in ("latitude", "longitude"):
        if key not in obj:
            raise WireMissingKeyError(f"missing key {key!r}")
        if isinstance(obj[key], bool) or not isinstance(obj[key], (int, float)):
            raise WireParseError(f"{key} must be a number")
    lat = float(obj["latitude"])
    lon = float(obj["longitude"])
    if not (math.isfinite(lat) and math.isfinite(lon)):
        raise WireRangeError("latitude/longitude must be finite")
    if abs(lat) > 90.0:
        raise WireRangeError(f"latitude {lat} outside [-90, 90]")
    if abs(lon) > 180.0:
        raise WireRangeError(f"longitude {lon} outside [-180, 180]")
    mode = obj.get("mobility_mode", DEFAULT_MOBILITY_MODE)
    if not isinstance(mode, str) or not mode:
        raise WireParseError("mobility_mode must be a non-empty string")
    return PointAndGo(latitude=lat, longitude=lon, mobility_mode=mode)


# --- trace (de)serialization -------------------------------------------------

_MESSAGE_CLASSES = {
    cls.__name__: cls
    for cls in (
        Twist,
        SpeedCurvatureSetpoint,
        Odometry,
        Velocity6D,
        GpsFixSample,
        BaselineHeading,
        BestFixStatus,
        PointAndGo,
        MobilityMode,
        Waypoint,
        UlcReport,
        SafetyStatus,
        LidarScan,
    )
}


def payload_to_wire(payload) -> dict:
    """Convert a bus payload (message dataclass or primitive) to a JSON dict."""
    if is_dataclass(payload):
        out: dict = {"_type": type(payload).__name__}
        for f in fields(payload):
            v = getattr(payload, f.name)
            if isinstance(v, enum.Enum):
                v = v.value
            elif isinstance(v, tuple):
                v = [list(p) if isinstance(p, tuple) else p for p in v]
            out[f.name] = v
        return out
    if isinstance(payload, bool):
        return {"_type": "bool", "value": payload}
    if isinstance(payload, (int, float)):
        return {"_type": "float", "value": payload}
    raise TypeError(f"unsupported payload type {type(payload).__name__}")


def payload_from_wire(obj: dict):
    """Inverse of payload_to_wire."""
    kind = obj.get("_type")
    if kind == "bool":
        return bool(obj["value"])
    if kind == "float":
        return float(obj["value"])
    cls = _MESSAGE_CLASSES.get(kind)
    if cls is None:
        raise ValueError(f"unknown payload type {kind!r}")
    kwargs = {}
    for f in fields(cls):
        v = obj[f.name]
        if f.name == "fix_type":
            v = FixType(v)
        elif f.name == "kind":
            v = GpsKind(v)
        elif f.name == "quality":
            v = FixQuality(v)
        elif f.name == "points":
            v = tuple(tuple(p) for p in v)
        kwargs[f.name] = v
    return cls(**kwargs)


# --- topic registry ----------------------------------------------------------

# Topic strings are preserved verbatim, including the trailing slash on
# "/ltu/point_and_go/" and the doubled "VelocityVelocity6D".
TOPIC_ENU_POSE_FIX = "enu_pose_fix"
TOPIC_ENU_POSE_SPP = "enu_pose_spp"
TOPIC_BASELINE_HEADING = "baseline_heading"
TOPIC_BEST_FIX = "navsatfix_best_fix"
TOPIC_ODOM = "/odom"
TOPIC_NEAR_FIELD_ODOM = "/near_field_odom"
TOPIC_FAR_FIELD_ODOM = "/far_field_odom"
TOPIC_UTM_ODOM = "/utm_odom"
TOPIC_VELOCITY6D = "VelocityVelocity6D"
TOPIC_LIDAR = "velodyne_points"
TOPIC_CMD_VEL = "polaris/vehicle/cmd_vel"
TOPIC_ULC_REPORT = "polaris/vehicle/ulc_report"
TOPIC_SAFETY_STATUS = "safety_monitor_status"
TOPIC_SAFETY_ESTOP = "safety_monitor_estop"
TOPIC_ESTOP_SENSE = "estop_sense"
TOPIC_STEERING_SENSE = "steering_sense"
TOPIC_SPEED_SETPOINT = "speed_setpoint"
TOPIC_CURVATURE_SETPOINT = "curvature_setpoint"
TOPIC_GATED_SETPOINT = "vehicle_interface/gated_setpoint"
TOPIC_POINT_AND_GO = "/ltu/point_and_go/"
TOPIC_MOBILITY_MODE = "/vms/command_mobilitymode"
TOPIC_WAYPOINT = "/behavior_manager/point_and_go_waypoint_iopv2"

TOPIC_TYPES: dict[str, type] = {
    TOPIC_ENU_POSE_FIX: GpsFixSample,
    TOPIC_ENU_POSE_SPP: GpsFixSample,
    TOPIC_BASELINE_HEADING: BaselineHeading,
    TOPIC_BEST_FIX: BestFixStatus,
    TOPIC_ODOM: Odometry,
    TOPIC_NEAR_FIELD_ODOM: Odometry,
    TOPIC_FAR_FIELD_ODOM: Odometry,
    TOPIC_UTM_ODOM: Odometry,
    TOPIC_VELOCITY6D: Velocity6D,
    TOPIC_LIDAR: LidarScan,
    TOPIC_CMD_VEL: Twist,
    TOPIC_ULC_REPORT: UlcReport,
    TOPIC_SAFETY_STATUS: SafetyStatus,
    TOPIC_SAFETY_ESTOP: SafetyStatus,
    TOPIC_ESTOP_SENSE: bool,
    TOPIC_STEERING_SENSE: float,
    TOPIC_SPEED_SETPOINT: SpeedCurvatureSetpoint,
    TOPIC_CURVATURE_SETPOINT: SpeedCurvatureSetpoint,
    TOPIC_GATED_SETPOINT: SpeedCurvatureSetpoint,
    TOPIC_POINT_AND_GO: PointAndGo,
    TOPIC_MOBILITY_MODE: MobilityMode,
    TOPIC_WAYPOINT: Waypoint,
}

# Topics whose last value is redelivered to late subscribers.
LATCHED_TOPICS = frozenset(
    {TOPIC_POINT_AND_GO, TOPIC_MOBILITY_MODE, TOPIC_WAYPOINT, TOPIC_STEERING_SENSE}
)

"""WGS84 <-> UTM conversion, compass-heading helpers.

The projection is a 6th-order Krueger series transverse Mercator on the WGS84
ellipsoid (scale 0.9996, false easting 500 km), good to well under a
millimeter anywhere inside a zone. Headings are compass convention
throughout: 0 = north, clockwise positive, normalized to [0, 2pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# WGS84
_A = 6378137.0
_F = 1.0 / 298.257223563
_K0 = 0.9996
_FALSE_EASTING = 500000.0
_FALSE_NORTHING_S = 10000000.0

_N = _F / (2.0 - _F)
_E = math.sqrt(_F * (2.0 - _F))  # first eccentricity

_n = _N
_A_RECT = _A / (1 + _n) * (1 + _n**2 / 4 + _n**4 / 64 + _n**6 / 256)

_ALPHA = (
    _n / 2 - 2 * _n**2 / 3 + 5 * _n**3 / 16 + 41 * _n**4 / 180 - 127 * _n**5 / 288
    + 7891 * _n**6 / 37800,
    13 * _n**2 / 48 - 3 * _n**3 / 5 + 557 * _n**4 / 1440 + 281 * _n**5 / 630
    - 1983433 * _n**6 / 1935360,
    61 * _n**3 / 240 - 103 * _n**4 / 140 + 15061 * _n**5 / 26880
    + 167603 * _n**6 / 181440,
    49561 * _n**4 / 161280 - 179 * _n**5 / 168 + 6601661 * _n**6 / 7257600,
    34729 * _n**5 / 80640 - 3418889 * _n**6 / 1995840,
    212378941 * _n**6 / 319334400,
)

_BETA = (
    _n / 2 - 2 * _n**2 / 3 + 37 * _n**3 / 96 - _n**4 / 360 - 81 * _n**5 / 512
    + 96199 * _n**6 / 604800,
    _n**2 / 48 + _n**3 / 15 - 437 * _n**4 / 1440 + 46 * _n**5 / 105
    - 1118711 * _n**6 / 3870720,
    17 * _n**3 / 480 - 37 * _n**4 / 840 - 209 * _n**5 / 4480 + 5569 * _n**6 / 90720,
    4397 * _n**4 / 161280 - 11 * _n**5 / 504 - 830251 * _n**6 / 7257600,
    4583 * _n**5 / 161280 - 108847 * _n**6 / 3991680,
    20648693 * _n**6 / 638668800,
)

UTM_LAT_MIN = -80.0
UTM_LAT_MAX = 84.0


class GeodesyError(ValueError):
    pass


class OutOfUtmBandError(GeodesyError):
    """Latitude outside the UTM validity band."""


class InvalidUtmError(GeodesyError):
    """Easting/northing/zone outside the valid UTM ranges."""


class DegenerateBaselineError(GeodesyError):
    """Zero-length antenna baseline has no heading."""


@dataclass(frozen=True)
class GeoPoint:
    latitude: float
    longitude: float


@dataclass(frozen=True)
class UtmPoint:
    easting: float
    northing: float
    zone: int
    hemisphere: str  # "N" or "S"


def normalize_compass(angle: float) -> float:
    """Wrap an angle to [0, 2pi)."""
    a = math.fmod(angle, 2 * math.pi)
    if a < 0:
        a += 2 * math.pi
    return 0.0 if a == 2 * math.pi else a


def normalize_signed(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(angle, 2 * math.pi)
    if a > math.pi:
        a -= 2 * math.pi
    elif a <= -math.pi:
        a += 2 * math.pi
    return a


def utm_zone(longitude: float) -> int:
    if longitude == 180.0:
        longitude = -180.0
    zone = int(math.floor((longitude + 180.0) / 6.0)) + 1
    # (lon + 180) can round up to exactly 360 for lon just below 180
    return min(max(zone, 1), 60)


def zone_central_meridian(zone: int) -> float:
    return (zone - 1) * 6.0 - 180.0 + 3.0


def wgs84_to_utm(p: GeoPoint) -> UtmPoint:
    """Project a WGS84 lat/lon into its natural UTM zone."""
    lat, lon = p.latitude, p.longitude
    if not (math.isfinite(lat) and math.isfinite(lon)):
        raise GeodesyError("non-finite coordinates")
    if not (UTM_LAT_MIN <= lat <= UTM_LAT_MAX):
        raise OutOfUtmBandError(f"latitude {lat} outside UTM band [{UTM_LAT_MIN}, {UTM_LAT_MAX}]")
    if abs(lon) > 180.0:
        raise GeodesyError(f"longitude {lon} outside [-180, 180]")

    zone = utm_zone(lon)
    lam0 = math.radians(zone_central_meridian(zone))
    phi = math.radians(lat)
    lam = math.radians(lon) - lam0

    # conformal latitude
    s = (2 * math.sqrt(_n)) / (1 + _n)
    t = math.sinh(math.atanh(math.sin(phi)) - s * math.atanh(s * math.sin(phi)))
    xi_p = math.atan2(t, math.cos(lam))
    eta_p = math.asinh(math.sin(lam) / math.hypot(t, math.cos(lam)))

    xi = xi_p
    eta = eta_p
    for j, a in enumerate(_ALPHA, start=1):
        xi += a * math.sin(2 * j * xi_p) * math.cosh(2 * j * eta_p)
        eta += a * math.cos(2 * j * xi_p) * math.sinh(2 * j * eta_p)

    easting = _FALSE_EASTING + _K0 * _A_RECT * eta
    northing = _K0 * _A_RECT * xi
    hemisphere = "N" if lat >= 0 else "S"
    if hemisphere == "S":
        northing += _FALSE_NORTHING_S
        if northing >= _FALSE_NORTHING_S:  # sub-micron south of the equator
            hemisphere, northing = "N", 0.0
    return UtmPoint(easting=easting, northing=northing, zone=zone, hemisphere=hemisphere)


def utm_to_wgs84(p: UtmPoint) -> GeoPoint:
    """Inverse projection; round-trips with wgs84_to_utm below 1e-9 degrees."""
    if not 1 <= p.zone <= 60:
        raise InvalidUtmError(f"zone {p.zone} outside 1..60")
    if p.hemisphere not in ("N", "S"):
        raise InvalidUtmError(f"hemisphere {p.hemisphere!r} must be 'N' or 'S'")
    if not (100000.0 < p.easting < 900000.0):
        raise InvalidUtmError(f"easting {p.easting} outside (100000, 900000)")
    if not (0.0 <= p.northing < 10000000.0):
        raise InvalidUtmError(f"northing {p.northing} outside [0, 10000000)")

    northing = p.northing
    if p.hemisphere == "S":
        northing -= _FALSE_NORTHING_S
    xi = northing / (_K0 * _A_RECT)
    eta = (p.easting - _FALSE_EASTING) / (_K0 * _A_RECT)

    xi_p = xi
    eta_p = eta
    for j, b in enumerate(_BETA, start=1):
        xi_p -= b * math.sin(2 * j * xi) * math.cosh(2 * j * eta)
        eta_p -= b * math.cos(2 * j * xi) * math.sinh(2 * j * eta)

    tau_p = math.sin(xi_p) / math.hypot(math.sinh(eta_p), math.cos(xi_p))

    # invert the conformal-latitude map by Newton iteration on tau
    tau = tau_p
    for _ in range(8):
        sigma = math.sinh(_E * math.atanh(_E * tau / math.hypot(1.0, tau)))
        f = tau * math.hypot(1.0, sigma) - sigma * math.hypot(1.0, tau) - tau_p
        df = (math.hypot(1.0, sigma) * math.hypot(1.0, tau) - sigma * tau) * (
            1.0 - _E * _E
        ) * math.hypot(1.0, tau) / (1.0 + (1.0 - _E * _E) * tau * tau)
        step = f / df
        tau -= step
        if abs(step) < 1e-16 * max(1.0, abs(tau)):
            break

    phi = math.atan(tau)
    lam = math.atan2(math.sinh(eta_p), math.cos(xi_p))
    lon = math.degrees(lam) + zone_central_meridian(p.zone)
    return GeoPoint(latitude=math.degrees(phi), longitude=lon)


def heading_from_baseline(east: float, north: float) -> float:
    """Compass heading of the dual-antenna baseline vector."""
    if east == 0.0 and north == 0.0:
        raise DegenerateBaselineError("zero-length baseline")
    return normalize_compass(math.atan2(east, north))

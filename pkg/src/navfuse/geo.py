"""Spherical-earth geodesy: forward bearing, meter/degree scaling, haversine."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import UndefinedBearingError

EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class GeoPoint:
    """Geographic position in degrees, lat in [-90, 90], lon in (-180, 180]."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError("GeoPoint components must be finite")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 < self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside (-180, 180]")


@dataclass(frozen=True)
class EarthModel:
    radius_m: float = EARTH_RADIUS_M

    def __post_init__(self):
        if self.radius_m <= 0:
            raise ValueError("earth radius must be positive")


def bearing(a: GeoPoint, b: GeoPoint) -> float:
    """Initial great-circle bearing from a to b, radians in [0, 2pi).

    0 is due north, pi/2 due east (clockwise-from-north compass convention).
    """
    if abs(a.lat - b.lat) < 1e-12 and abs(a.lon - b.lon) < 1e-12:
        raise UndefinedBearingError("bearing undefined between coincident points")
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dlon = math.radians(b.lon - a.lon)
    dy = math.sin(dlon) * math.cos(phi2)
    dx = math.cos(phi1) * math.sin(phi2) - math.sin(phi1) * math.cos(phi2) * math.cos(dlon)
    theta = math.atan2(dy, dx)
    return theta % (2.0 * math.pi)


def meters_to_degrees_lat(d: float, earth: EarthModel = EarthModel()) -> float:
    """Linear north-displacement conversion, d * 180 / (pi * r_e)."""
    return d * 180.0 / (math.pi * earth.radius_m)


def degrees_lat_to_meters(deg: float, earth: EarthModel = EarthModel()) -> float:
    return deg * math.pi * earth.radius_m / 180.0


def geodesic_distance(a: GeoPoint, b: GeoPoint, earth: EarthModel = EarthModel()) -> float:
    """Haversine great-circle distance in meters."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlon = math.radians(b.lon - a.lon)
    h = math.sin(0.5 * dphi) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(0.5 * dlon) ** 2
    return 2.0 * earth.radius_m * math.asin(min(1.0, math.sqrt(h)))

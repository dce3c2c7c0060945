"""Geodesic distance on the WGS84 ellipsoid (Vincenty inverse problem).

Falls back to the great-circle distance on the mean-radius sphere when the
iteration fails to converge (near-antipodal inputs), with a flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidCoordinate

WGS84_A = 6378137.0              # semi-major axis, meters
WGS84_F = 1.0 / 298.257223563    # flattening
WGS84_B = WGS84_A * (1.0 - WGS84_F)
MEAN_RADIUS_KM = 6371.0088

_MAX_ITERATIONS = 200
_CONVERGENCE = 1e-12


@dataclass(frozen=True)
class GeodesicResult:
    kilometers: float
    converged: bool  # False: great-circle fallback was used


def _check(lat: float, lon: float) -> None:
    if not (-90.0 <= lat <= 90.0):
        raise InvalidCoordinate(f"latitude {lat} out of [-90, 90]")
    if not (-180.0 <= lon <= 180.0):
        raise InvalidCoordinate(f"longitude {lon} out of [-180, 180]")


def great_circle_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    s = math.sin((lat2 - lat1) / 2) ** 2 \
        + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2.0 * MEAN_RADIUS_KM * math.asin(min(1.0, math.sqrt(s)))


def inverse(a: tuple[float, float], b: tuple[float, float]) -> GeodesicResult:
    """Vincenty's inverse solution; coordinates are (lat, lon) in degrees."""
    _check(*a)
    _check(*b)
    if a == b:
        return GeodesicResult(0.0, True)

    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    u1 = math.atan((1.0 - WGS84_F) * math.tan(lat1))
    u2 = math.atan((1.0 - WGS84_F) * math.tan(lat2))
    big_l = lon2 - lon1
    sin_u1, cos_u1 = math.sin(u1), math.cos(u1)
    sin_u2, cos_u2 = math.sin(u2), math.cos(u2)

    lam = big_l
    for _ in range(_MAX_ITERATIONS):
        sin_lam, cos_lam = math.sin(lam), math.cos(lam)
        sin_sigma = math.sqrt((cos_u2 * sin_lam) ** 2
                              + (cos_u1 * sin_u2 - sin_u1 * cos_u2 * cos_lam) ** 2)
        if sin_sigma == 0.0:
            return GeodesicResult(0.0, True)  # coincident points
        cos_sigma = sin_u1 * sin_u2 + cos_u1 * cos_u2 * cos_lam
        sigma = math.atan2(sin_sigma, cos_sigma)
        sin_alpha = cos_u1 * cos_u2 * sin_lam / sin_sigma
        cos_sq_alpha = 1.0 - sin_alpha ** 2
        if cos_sq_alpha == 0.0:
            cos_2sigma_m = 0.0  # equatorial line
        else:
            cos_2sigma_m = cos_sigma - 2.0 * sin_u1 * sin_u2 / cos_sq_alpha
        c = WGS84_F / 16.0 * cos_sq_alpha * (4.0 + WGS84_F * (4.0 - 3.0 * cos_sq_alpha))
        lam_prev = lam
        lam = big_l + (1.0 - c) * WGS84_F * sin_alpha * (
            sigma + c * sin_sigma * (
                cos_2sigma_m + c * cos_sigma * (-1.0 + 2.0 * cos_2sigma_m ** 2)))
        if abs(lam - lam_prev) < _CONVERGENCE:
            break
    else:
        return GeodesicResult(great_circle_km(a, b), False)

    u_sq = cos_sq_alpha * (WGS84_A ** 2 - WGS84_B ** 2) / WGS84_B ** 2
    big_a = 1.0 + u_sq / 16384.0 * (4096.0 + u_sq * (-768.0 + u_sq * (320.0 - 175.0 * u_sq)))
    big_b = u_sq / 1024.0 * (256.0 + u_sq * (-128.0 + u_sq * (74.0 - 47.0 * u_sq)))
    delta_sigma = big_b * sin_sigma * (
        cos_2sigma_m + big_b / 4.0 * (
            cos_sigma * (-1.0 + 2.0 * cos_2sigma_m ** 2)
            - big_b / 6.0 * cos_2sigma_m * (-3.0 + 4.0 * sin_sigma ** 2)
            * (-3.0 + 4.0 * cos_2sigma_m ** 2)))
    meters = WGS84_B * big_a * (sigma - delta_sigma)
    return GeodesicResult(meters / 1000.0, True)


def geodesic_distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    """WGS84 geodesic distance in kilometers between (lat, lon) points."""
    return inverse(a, b).kilometers

"""Topocentric geometry, inter-satellite ranges, Earth occlusion and
ground-station pass extraction.

Azimuth is measured clockwise from North (East = 90 deg).  Apparent
refraction of the elevation is ignored (< 0.3 deg above 20 deg).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import R_EARTH_KM
from .orbit import (
    EpochClock,
    GroundStation,
    StateVector,
    Trajectory,
    ground_station_eci_many,
    ground_station_state,
)


@dataclass(frozen=True)
class Topocentric:
    """Satellite as seen from a station: elevation/azimuth [deg], slant
    range [km] and line-of-sight angular rate [rad/s]."""

    elevation_deg: float
    azimuth_deg: float
    slant_range_km: float
    los_rate_rad_s: float


@dataclass(frozen=True)
class PassWindow:
    """Interval during which a satellite stays above the elevation mask."""

    t_start_s: float
    t_end_s: float
    max_elevation_deg: float
    station: GroundStation
    satellite: int = 0

    @property
    def duration_s(self) -> float:
        return self.t_end_s - self.t_start_s


def topocentric(gs_pos: np.ndarray, gs_vel: np.ndarray, sat: StateVector) -> Topocentric:
    """Elevation, azimuth, range and LoS rate of a satellite.

    The LoS rate is the transverse component of the relative velocity
    over the range, computed analytically rather than by differencing.
    """
    rho = sat.r - gs_pos
    dist = float(np.linalg.norm(rho))
    rho_hat = rho / dist

    up = gs_pos / np.linalg.norm(gs_pos)
    east = np.cross([0.0, 0.0, 1.0], up)
    n_east = np.linalg.norm(east)
    if n_east < 1e-12:  # station at a pole: pick an arbitrary horizontal frame
        east = np.array([0.0, 1.0, 0.0])
    else:
        east = east / n_east
    north = np.cross(up, east)

    elev = math.degrees(math.asin(max(-1.0, min(1.0, float(np.dot(rho_hat, up))))))
    az = math.degrees(math.atan2(float(np.dot(rho_hat, east)), float(np.dot(rho_hat, north))))
    az %= 360.0

    v_rel = sat.v - gs_vel
    v_rad = float(np.dot(v_rel, rho_hat))
    v_trans = v_rel - v_rad * rho_hat
    los_rate = float(np.linalg.norm(v_trans)) / dist
    return Topocentric(elev, az, dist, los_rate)


def elevation_series(traj: Trajectory, gs: GroundStation, clock: EpochClock, sat: int = 0):
    """Vectorized elevation [deg] and slant range [km] along a trajectory."""
    station = ground_station_eci_many(gs, clock, traj.epochs_s)
    rho = traj.r_km[:, sat, :] - station
    dist = np.linalg.norm(rho, axis=1)
    up = station / R_EARTH_KM
    sin_elev = np.sum(rho * up, axis=1) / dist
    return np.degrees(np.arcsin(np.clip(sin_elev, -1.0, 1.0))), dist


def angular_separation_deg(gs_a: GroundStation, gs_b: GroundStation) -> float:
    """Central angle of the great circle through two stations."""
    phi_a, phi_b = math.radians(gs_a.lat_deg), math.radians(gs_b.lat_deg)
    dlon = math.radians(gs_b.lon_deg - gs_a.lon_deg)
    cos_g = math.sin(phi_a) * math.sin(phi_b) + math.cos(phi_a) * math.cos(phi_b) * math.cos(dlon)
    return math.degrees(math.acos(max(-1.0, min(1.0, cos_g))))


def surface_distance_km(gs_a: GroundStation, gs_b: GroundStation) -> float:
    return math.radians(angular_separation_deg(gs_a, gs_b)) * R_EARTH_KM


def intersat_range_km(sat_a: StateVector, sat_b: StateVector) -> float:
    return float(np.linalg.norm(sat_a.r - sat_b.r))


def line_of_sight(p_a: np.ndarray, p_b: np.ndarray, grazing_altitude_km: float = 20.0) -> bool:
    """True when the segment a-b clears the Earth plus a grazing shell.

    The grazing altitude keeps signal paths out of the dense lower
    atmosphere; symmetric in its endpoints and monotone in the shell
    height.
    """
    p_a = np.asarray(p_a, dtype=float)
    p_b = np.asarray(p_b, dtype=float)
    d = p_b - p_a
    dd = float(np.dot(d, d))
    if dd == 0.0:
        closest = p_a
    else:
        t = -float(np.dot(p_a, d)) / dd
        t = max(0.0, min(1.0, t))
        closest = p_a + t * d
    return float(np.linalg.norm(closest)) > R_EARTH_KM + grazing_altitude_km


def line_of_sight_series(
    r_a: np.ndarray, r_b: np.ndarray, grazing_altitude_km: float = 20.0
) -> np.ndarray:
    """Vectorized :func:`line_of_sight` over (n, 3) position arrays."""
    d = r_b - r_a
    dd = np.sum(d * d, axis=1)
    t = np.where(dd > 0.0, -np.sum(r_a * d, axis=1) / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = r_a + t[:, None] * d
    return np.linalg.norm(closest, axis=1) > R_EARTH_KM + grazing_altitude_km


def find_passes(
    traj: Trajectory,
    gs: GroundStation,
    clock: EpochClock,
    theta_min_deg: float,
    sat: int = 0,
) -> list[PassWindow]:
    """Extract elevation-mask passes from a sampled trajectory.

    Window boundaries are linearly interpolated at the mask crossings;
    windows come out sorted and non-overlapping.
    """
    elev, _ = elevation_series(traj, gs, clock, sat)
    t = traj.epochs_s
    above = elev >= theta_min_deg
    if not np.any(above):
        return []

    passes: list[PassWindow] = []
    idx = np.flatnonzero(np.diff(above.astype(np.int8)))
    starts: list[float] = []
    ends: list[float] = []
    if above[0]:
        starts.append(float(t[0]))
    for i in idx:
        frac = (theta_min_deg - elev[i]) / (elev[i + 1] - elev[i])
        t_cross = float(t[i] + frac * (t[i + 1] - t[i]))
        if above[i + 1]:
            starts.append(t_cross)
        else:
            ends.append(t_cross)
    if above[-1]:
        ends.append(float(t[-1]))

    for t0, t1 in zip(starts, ends):
        inside = (t >= t0) & (t <= t1)
        max_elev = float(np.max(elev[inside])) if np.any(inside) else theta_min_deg
        passes.append(PassWindow(t0, t1, max_elev, gs, sat))
    return passes

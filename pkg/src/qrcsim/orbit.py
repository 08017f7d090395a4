"""Orbit dynamics: element conversions, zonal-harmonic gravity, RK4
propagation, Earth rotation and a low-precision solar ephemeris.

Conventions
-----------
- Single Earth-centered inertial frame, fixed at the scenario epoch;
  precession/nutation are ignored.
- Time is continuous seconds since the scenario epoch; calendar dates
  appear only in :class:`EpochClock`.
- Positions in km, velocities in km/s, angles in degrees at the API
  boundary and radians internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .constants import (
    J2_EARTH,
    MU_EARTH_KM3_S2,
    OMEGA_EARTH_RAD_S,
    R_EARTH_KM,
)

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap(args[0]) if args and callable(args[0]) else wrap


class OrbitError(ValueError):
    """Raised for invalid orbital states (hyperbolic input, Earth impact...)."""


def _wrap_deg(angle: float) -> float:
    return angle % 360.0


@dataclass(frozen=True)
class KeplerElements:
    """Classical orbital elements.

    a_km: semi-major axis; e: eccentricity; inc_deg: inclination;
    raan_deg: right ascension of the ascending node; argp_deg: argument
    of perigee; true_anomaly_deg: position angle on the orbit.
    """

    a_km: float
    e: float
    inc_deg: float
    raan_deg: float
    argp_deg: float
    true_anomaly_deg: float

    def __post_init__(self):
        if not self.a_km > R_EARTH_KM:
            raise OrbitError(f"semi-major axis {self.a_km} km must exceed {R_EARTH_KM} km")
        if not 0.0 <= self.e < 1.0:
            raise OrbitError(f"eccentricity {self.e} outside [0, 1)")
        if not 0.0 <= self.inc_deg <= 180.0:
            raise OrbitError(f"inclination {self.inc_deg} outside [0, 180]")
        for name in ("raan_deg", "argp_deg", "true_anomaly_deg"):
            object.__setattr__(self, name, _wrap_deg(getattr(self, name)))


@dataclass(frozen=True)
class StateVector:
    """Cartesian inertial state: position r [km], velocity v [km/s]."""

    r: np.ndarray
    v: np.ndarray
    epoch_s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if np.linalg.norm(self.r) <= R_EARTH_KM:
            raise OrbitError("state lies at or below the Earth surface")


@dataclass(frozen=True)
class GravityModel:
    """Axisymmetric gravity field: point mass plus zonal harmonics J2..Jn."""

    mu: float = MU_EARTH_KM3_S2
    r_eq: float = R_EARTH_KM
    zonal: tuple[float, ...] = ()  # (J2, J3, ...); empty = Keplerian

    @classmethod
    def point_mass(cls) -> "GravityModel":
        return cls(zonal=())

    @classmethod
    def with_j2(cls, j2: float = J2_EARTH) -> "GravityModel":
        return cls(zonal=(j2,))

    @property
    def max_degree(self) -> int:
        return 1 + len(self.zonal) if self.zonal else 0


@dataclass(frozen=True)
class GroundStation:
    """Optical ground station on a spherical Earth (geocentric latitude)."""

    name: str
    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        if not -90.0 <= self.lat_deg <= 90.0:
            raise OrbitError(f"latitude {self.lat_deg} outside [-90, 90]")
        if not -180.0 < self.lon_deg <= 180.0:
            raise OrbitError(f"longitude {self.lon_deg} outside (-180, 180]")


_J2000 = datetime(2000, 1, 1, 12, 0, 0, tzinfo=timezone.utc)


def gmst_rad(utc: datetime) -> float:
    """Greenwich mean sidereal time from the standard IAU polynomial."""
    if utc.tzinfo is None:
        utc = utc.replace(tzinfo=timezone.utc)
    d = (utc - _J2000).total_seconds() / 86400.0
    t = d / 36525.0
    gmst_deg = (
        280.46061837
        + 360.98564736629 * d
        + 0.000387933 * t * t
        - t * t * t / 38710000.0
    )
    return math.radians(gmst_deg % 360.0)


@dataclass(frozen=True)
class EpochClock:
    """Maps simulation seconds to Earth orientation and solar time.

    gmst0_rad is the Greenwich sidereal angle at ``initial_utc``;
    days_j2000 the epoch offset used by the solar ephemeris.
    """

    initial_utc: datetime
    earth_rotation_rate: float = OMEGA_EARTH_RAD_S
    gmst0_rad: float = field(default=None)  # type: ignore[assignment]
    days_j2000: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        utc = self.initial_utc
        if utc.tzinfo is None:
            utc = utc.replace(tzinfo=timezone.utc)
            object.__setattr__(self, "initial_utc", utc)
        if self.gmst0_rad is None:
            object.__setattr__(self, "gmst0_rad", gmst_rad(utc))
        if self.days_j2000 is None:
            object.__setattr__(self, "days_j2000", (utc - _J2000).total_seconds() / 86400.0)
        if not self.earth_rotation_rate > 0:
            raise OrbitError("earth_rotation_rate must be positive")

    def gmst_at(self, t_s: float) -> float:
        return (self.gmst0_rad + self.earth_rotation_rate * t_s) % (2.0 * math.pi)


# --- element conversions ---

def kepler_to_cartesian(el: KeplerElements, g: GravityModel = GravityModel()) -> StateVector:
    """Convert orbital elements to an inertial Cartesian state."""
    if el.e >= 1.0:
        raise OrbitError("parabolic/hyperbolic orbits unsupported")
    nu = math.radians(el.true_anomaly_deg)
    p = el.a_km * (1.0 - el.e**2)
    r = p / (1.0 + el.e * math.cos(nu))

    scale = math.sqrt(g.mu / p)
    pos_pf = np.array([r * math.cos(nu), r * math.sin(nu), 0.0])
    vel_pf = np.array([-scale * math.sin(nu), scale * (el.e + math.cos(nu)), 0.0])

    c_o, s_o = math.cos(math.radians(el.raan_deg)), math.sin(math.radians(el.raan_deg))
    c_w, s_w = math.cos(math.radians(el.argp_deg)), math.sin(math.radians(el.argp_deg))
    c_i, s_i = math.cos(math.radians(el.inc_deg)), math.sin(math.radians(el.inc_deg))
    rot = np.array(
        [
            [c_o * c_w - s_o * s_w * c_i, -c_o * s_w - s_o * c_w * c_i, s_o * s_i],
            [s_o * c_w + c_o * s_w * c_i, -s_o * s_w + c_o * c_w * c_i, -c_o * s_i],
            [s_w * s_i, c_w * s_i, c_i],
        ]
    )
    return StateVector(rot @ pos_pf, rot @ vel_pf, epoch_s=0.0)


def cartesian_to_kepler(sv: StateVector, g: GravityModel = GravityModel()) -> KeplerElements:
    """Inverse of :func:`kepler_to_cartesian`.

    Degenerate geometries resolve by convention: equatorial orbits get
    raan = 0, circular orbits get argp = 0, with the true anomaly
    carrying the full in-plane phase.
    """
    r_vec, v_vec = sv.r, sv.v
    r = float(np.linalg.norm(r_vec))
    v2 = float(np.dot(v_vec, v_vec))
    if r == 0.0:
        raise OrbitError("degenerate state: |r| = 0")

    h_vec = np.cross(r_vec, v_vec)
    h = float(np.linalg.norm(h_vec))
    if h < 1e-12 * r * math.sqrt(v2):
        raise OrbitError("degenerate rectilinear orbit")

    energy = v2 / 2.0 - g.mu / r
    if energy >= 0.0:
        raise OrbitError("non-elliptic orbit (specific energy >= 0)")
    a = -g.mu / (2.0 * energy)

    e_vec = np.cross(v_vec, h_vec) / g.mu - r_vec / r
    e = float(np.linalg.norm(e_vec))

    inc = math.acos(max(-1.0, min(1.0, h_vec[2] / h)))
    node = np.array([-h_vec[1], h_vec[0], 0.0])
    n_node = float(np.linalg.norm(node))

    equatorial = n_node < 1e-11 * h
    circular = e < 1e-11

    if equatorial:
        raan = 0.0
        node = np.array([1.0, 0.0, 0.0])  # x-axis convention
    else:
        raan = math.atan2(node[1], node[0])
        node = node / n_node

    if circular:
        argp = 0.0
        # anomaly measured from the node (or x-axis) directly to r
        cos_u = float(np.dot(node, r_vec)) / r
        sin_u = float(np.dot(np.cross(node, r_vec), h_vec)) / (r * h)
        nu = math.atan2(sin_u, cos_u)
    else:
        e_hat = e_vec / e
        cos_w = float(np.dot(node, e_hat))
        sin_w = float(np.dot(np.cross(node, e_hat), h_vec)) / h
        argp = math.atan2(sin_w, cos_w)
        cos_nu = float(np.dot(e_hat, r_vec)) / r
        sin_nu = float(np.dot(np.cross(e_hat, r_vec), h_vec)) / (r * h)
        nu = math.atan2(sin_nu, cos_nu)

    return KeplerElements(
        a_km=a,
        e=e,
        inc_deg=math.degrees(inc),
        raan_deg=math.degrees(raan),
        argp_deg=math.degrees(argp),
        true_anomaly_deg=math.degrees(nu),
    )


# --- gravity ---

def zonal_potential(r_vec: np.ndarray, g: GravityModel) -> float:
    """Gravitational potential including the configured zonal terms."""
    x, y, z = float(r_vec[0]), float(r_vec[1]), float(r_vec[2])
    r = math.sqrt(x * x + y * y + z * z)
    s = z / r  # sin(latitude)
    v = -g.mu / r
    if not g.zonal:
        return v
    # Legendre recurrence: P_0 = 1, P_1 = s
    p_nm1, p_n = 1.0, s
    ratio = g.r_eq / r
    pow_ratio = ratio
    for idx, j_n in enumerate(g.zonal):
        n = idx + 2
        p_np1 = ((2 * n - 1) * s * p_n - (n - 1) * p_nm1) / n
        p_nm1, p_n = p_n, p_np1
        pow_ratio *= ratio
        v += (g.mu / r) * pow_ratio * j_n * p_n
    return v


def gravity_accel(r_vec: np.ndarray, g: GravityModel) -> np.ndarray:
    """Acceleration -grad V for the point mass plus zonal harmonics."""
    x, y, z = float(r_vec[0]), float(r_vec[1]), float(r_vec[2])
    r2 = x * x + y * y + z * z
    r = math.sqrt(r2)
    acc = np.array([x, y, z]) * (-g.mu / (r2 * r))
    if not g.zonal:
        return acc

    s = z / r
    # P_n(s) and dP_n/ds via recurrences
    p_nm1, p_n = 1.0, s
    dp_nm1, dp_n = 0.0, 1.0
    ratio = g.r_eq / r
    pow_ratio = ratio
    ds_dx = -x * z / (r2 * r)
    ds_dy = -y * z / (r2 * r)
    ds_dz = (r2 - z * z) / (r2 * r)
    for idx, j_n in enumerate(g.zonal):
        n = idx + 2
        p_np1 = ((2 * n - 1) * s * p_n - (n - 1) * p_nm1) / n
        dp_np1 = ((2 * n - 1) * (p_n + s * dp_n) - (n - 1) * dp_nm1) / n
        p_nm1, p_n = p_n, p_np1
        dp_nm1, dp_n = dp_n, dp_np1
        pow_ratio *= ratio
        # term in V: +mu * r_eq^n * J_n * P_n(s) / r^(n+1)
        c = g.mu * j_n * pow_ratio / r
        radial = -(n + 1) * c / r2  # d/dr of r^-(n+1) part, times direction
        acc[0] -= radial * x * p_n + c * dp_n * ds_dx
        acc[1] -= radial * y * p_n + c * dp_n * ds_dy
        acc[2] -= radial * z * p_n + c * dp_n * ds_dz
    return acc


@njit(cache=True)
def _rk4_kernel(y0, n_steps, h, mu, r_eq, j2, use_j2, out_r, out_v, sample_every):
    """Fixed-step RK4 for k satellites under point-mass (+J2) gravity.

    y0: (k, 6) state array.  Samples every `sample_every` steps into
    out_r/out_v of shape (n_samples, k, 3).  Returns 0 on success, the
    failing step index on Earth impact.
    """
    k = y0.shape[0]
    y = y0.copy()
    acc = np.empty((k, 3))

    def _accel(state, acc):
        for j in range(k):
            x = state[j, 0]
            yy = state[j, 1]
            z = state[j, 2]
            r2 = x * x + yy * yy + z * z
            r = np.sqrt(r2)
            c0 = -mu / (r2 * r)
            ax = c0 * x
            ay = c0 * yy
            az = c0 * z
            if use_j2:
                z2_r2 = z * z / r2
                cj = -1.5 * j2 * mu * r_eq * r_eq / (r2 * r2 * r)
                ax += cj * x * (1.0 - 5.0 * z2_r2)
                ay += cj * yy * (1.0 - 5.0 * z2_r2)
                az += cj * z * (3.0 - 5.0 * z2_r2)
            acc[j, 0] = ax
            acc[j, 1] = ay
            acc[j, 2] = az

    k1 = np.empty((k, 6))
    k2 = np.empty((k, 6))
    k3 = np.empty((k, 6))
    k4 = np.empty((k, 6))
    tmp = np.empty((k, 6))

    sample_idx = 0
    out_r[0] = y[:, 0:3]
    out_v[0] = y[:, 3:6]
    for step in range(n_steps):
        _accel(y, acc)
        k1[:, 0:3] = y[:, 3:6]
        k1[:, 3:6] = acc

        tmp[:] = y + 0.5 * h * k1
        _accel(tmp, acc)
        k2[:, 0:3] = tmp[:, 3:6]
        k2[:, 3:6] = acc

        tmp[:] = y + 0.5 * h * k2
        _accel(tmp, acc)
        k3[:, 0:3] = tmp[:, 3:6]
        k3[:, 3:6] = acc

        tmp[:] = y + h * k3
        _accel(tmp, acc)
        k4[:, 0:3] = tmp[:, 3:6]
        k4[:, 3:6] = acc

        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        for j in range(k):
            r2 = y[j, 0] ** 2 + y[j, 1] ** 2 + y[j, 2] ** 2
            if r2 < r_eq * r_eq:
                return step + 1

        if (step + 1) % sample_every == 0:
            sample_idx += 1
            out_r[sample_idx] = y[:, 0:3]
            out_v[sample_idx] = y[:, 3:6]
    return 0


@dataclass(frozen=True)
class Trajectory:
    """Propagated states on a uniform time grid, for one or more satellites.

    r_km has shape (n_samples, n_sats, 3); single-satellite inputs keep
    n_sats = 1.
    """

    epochs_s: np.ndarray
    r_km: np.ndarray
    v_km_s: np.ndarray

    def __len__(self) -> int:
        return len(self.epochs_s)

    @property
    def n_sats(self) -> int:
        return self.r_km.shape[1]

    def state(self, i: int, sat: int = 0) -> StateVector:
        return StateVector(self.r_km[i, sat], self.v_km_s[i, sat], float(self.epochs_s[i]))


def propagate(
    sv: StateVector | list[StateVector],
    g: GravityModel,
    t_end_s: float,
    step_s: float = 1.0,
    substeps: int = 1,
) -> Trajectory:
    """Propagate one or more states with fixed-step RK4 and sample every step.

    ``substeps`` subdivides each output step for extra integration
    accuracy without growing the output.  Raises :class:`OrbitError` on
    Earth impact.  Zonal terms beyond J2 fall back to a slower path.
    """
    states = [sv] if isinstance(sv, StateVector) else list(sv)
    t0 = states[0].epoch_s
    if step_s <= 0:
        raise OrbitError("step must be positive")
    if t_end_s <= t0:
        raise OrbitError("t_end must exceed the state epoch")

    n_out = int(round((t_end_s - t0) / step_s))
    n_out = max(n_out, 1)
    h = (t_end_s - t0) / n_out / substeps
    n_steps = n_out * substeps

    y0 = np.empty((len(states), 6))
    for j, s in enumerate(states):
        y0[j, 0:3] = s.r
        y0[j, 3:6] = s.v

    if len(g.zonal) <= 1:
        j2 = g.zonal[0] if g.zonal else 0.0
        out_r = np.empty((n_out + 1, len(states), 3))
        out_v = np.empty((n_out + 1, len(states), 3))
        bad = _rk4_kernel(
            y0, n_steps, h, g.mu, g.r_eq, j2, bool(g.zonal), out_r, out_v, substeps
        )
        if bad:
            raise OrbitError(f"trajectory impacts Earth near t = {t0 + bad * h:.1f} s")
    else:
        out_r, out_v = _propagate_generic(y0, g, n_steps, h, substeps, n_out)

    epochs = t0 + step_s * np.arange(n_out + 1)
    epochs[-1] = t_end_s
    return Trajectory(epochs, out_r, out_v)


def _propagate_generic(y0, g, n_steps, h, sample_every, n_out):
    """Reference RK4 for arbitrary zonal degree (pure numpy, slow)."""
    k = y0.shape[0]
    out_r = np.empty((n_out + 1, k, 3))
    out_v = np.empty((n_out + 1, k, 3))

    def deriv(y):
        d = np.empty_like(y)
        d[:, 0:3] = y[:, 3:6]
        for j in range(k):
            d[j, 3:6] = gravity_accel(y[j, 0:3], g)
        return d

    y = y0.copy()
    out_r[0], out_v[0] = y[:, 0:3], y[:, 3:6]
    idx = 0
    for step in range(n_steps):
        k1 = deriv(y)
        k2 = deriv(y + 0.5 * h * k1)
        k3 = deriv(y + 0.5 * h * k2)
        k4 = deriv(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if np.any(np.linalg.norm(y[:, 0:3], axis=1) < g.r_eq):
            raise OrbitError("trajectory impacts Earth")
        if (step + 1) % sample_every == 0:
            idx += 1
            out_r[idx], out_v[idx] = y[:, 0:3], y[:, 3:6]
    return out_r, out_v


# --- Earth rotation and ground stations ---

def ground_station_eci(gs: GroundStation, clock: EpochClock, t_s: float) -> np.ndarray:
    """Inertial position of a station on the rotating spherical Earth."""
    lam = math.radians(gs.lon_deg) + clock.gmst_at(t_s)
    phi = math.radians(gs.lat_deg)
    return R_EARTH_KM * np.array(
        [math.cos(phi) * math.cos(lam), math.cos(phi) * math.sin(lam), math.sin(phi)]
    )


def ground_station_state(gs: GroundStation, clock: EpochClock, t_s: float):
    """Inertial position and rotation-induced velocity of a station."""
    pos = ground_station_eci(gs, clock, t_s)
    omega = np.array([0.0, 0.0, clock.earth_rotation_rate])
    return pos, np.cross(omega, pos)


def ground_station_eci_many(gs: GroundStation, clock: EpochClock, t_s: np.ndarray) -> np.ndarray:
    """Vectorized :func:`ground_station_eci`; returns shape (n, 3)."""
    lam = math.radians(gs.lon_deg) + clock.gmst0_rad + clock.earth_rotation_rate * np.asarray(t_s)
    phi = math.radians(gs.lat_deg)
    out = np.empty((len(lam), 3))
    out[:, 0] = R_EARTH_KM * math.cos(phi) * np.cos(lam)
    out[:, 1] = R_EARTH_KM * math.cos(phi) * np.sin(lam)
    out[:, 2] = R_EARTH_KM * math.sin(phi)
    return out


# --- Sun ---

def sun_direction(clock: EpochClock, t_s: float | np.ndarray) -> np.ndarray:
    """Unit vector to the Sun from a truncated almanac series (~0.01 deg).

    The model is ecliptic-planar: the returned direction always lies in
    the mean ecliptic. Accepts scalar or array times; array input
    returns shape (n, 3).
    """
    n = clock.days_j2000 + np.asarray(t_s) / 86400.0
    mean_lon = np.radians((280.460 + 0.9856474 * n) % 360.0)
    mean_anom = np.radians((357.528 + 0.9856003 * n) % 360.0)
    ecl_lon = mean_lon + np.radians(1.915) * np.sin(mean_anom) + np.radians(0.020) * np.sin(
        2.0 * mean_anom
    )
    obliquity = np.radians(23.439 - 0.0000004 * n)
    x = np.cos(ecl_lon)
    y = np.cos(obliquity) * np.sin(ecl_lon)
    z = np.sin(obliquity) * np.sin(ecl_lon)
    return np.stack([x, y, z], axis=-1)


def solar_elevation_deg(gs: GroundStation, clock: EpochClock, t_s: float | np.ndarray):
    """Elevation of the Sun above the station horizon."""
    t_arr = np.atleast_1d(np.asarray(t_s, dtype=float))
    station = ground_station_eci_many(gs, clock, t_arr)
    station /= R_EARTH_KM
    sun = np.atleast_2d(sun_direction(clock, t_arr))
    elev = np.degrees(np.arcsin(np.clip(np.sum(station * sun, axis=1), -1.0, 1.0)))
    return float(elev[0]) if np.isscalar(t_s) or np.ndim(t_s) == 0 else elev


def is_night(
    gs: GroundStation, clock: EpochClock, t_s: float, threshold_deg: float = -6.0
) -> bool:
    """True when the Sun sits below ``threshold_deg`` at the station."""
    return solar_elevation_deg(gs, clock, t_s) < threshold_deg


def orbital_period_s(a_km: float, g: GravityModel = GravityModel()) -> float:
    return 2.0 * math.pi * math.sqrt(a_km**3 / g.mu)


def sso_inclination_deg(altitude_km: float, g: GravityModel | None = None) -> float:
    """Inclination making the J2 node rate match the mean solar motion."""
    gm = g or GravityModel.with_j2()
    j2 = gm.zonal[0] if gm.zonal else J2_EARTH
    a = gm.r_eq + altitude_km
    n = math.sqrt(gm.mu / a**3)
    target = 2.0 * math.pi / (365.2422 * 86400.0)
    cos_i = -target / (1.5 * n * j2 * (gm.r_eq / a) ** 2)
    if not -1.0 <= cos_i <= 1.0:
        raise OrbitError(f"no sun-synchronous inclination at {altitude_km} km")
    return math.degrees(math.acos(cos_i))


def j2_node_rate_rad_s(el: KeplerElements, g: GravityModel) -> float:
    """First-order secular RAAN rate under J2."""
    j2 = g.zonal[0] if g.zonal else 0.0
    n = math.sqrt(g.mu / el.a_km**3)
    p = el.a_km * (1.0 - el.e**2)
    return -1.5 * n * j2 * (g.r_eq / p) ** 2 * math.cos(math.radians(el.inc_deg))

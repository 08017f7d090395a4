"""Scenario orchestration: constellation construction, per-step link
evaluation, single passes, altitude/separation sweeps and year-long
campaigns.

The rate evaluation is quasi-static: link parameters are frozen within
each step and expected counts accumulate as rate * dt (protocol bins
are eight orders of magnitude shorter than the geometry timescale).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelModel, ChannelSample, to_db
from .constants import C_LIGHT_KM_S, R_EARTH_KM
from .geometry import (
    Topocentric,
    elevation_series,
    line_of_sight,
    line_of_sight_series,
    angular_separation_deg,
    topocentric,
)
from .orbit import (
    EpochClock,
    GravityModel,
    GroundStation,
    KeplerElements,
    OrbitError,
    StateVector,
    Trajectory,
    cartesian_to_kepler,
    ground_station_eci_many,
    ground_station_state,
    kepler_to_cartesian,
    propagate,
    solar_elevation_deg,
    sso_inclination_deg,
)
from .swap import (
    BsmRates,
    DeviceParams,
    MemoryParams,
    ZERO_RATES,
    link_success,
    optimize_cutoffs,
)


@dataclass(frozen=True)
class ConstellationSpec:
    """Either explicit orbital elements or a generator description.

    Generators place three co-moving satellites so the configuration is
    centered over the midpoint of the two stations at ``alignment_t_s``
    with the outer pair separated by ``separation_ratio`` times the
    station separation.  ``kind='aligned'`` puts all three on one
    circular orbit; ``kind='sso'`` puts each on its own sun-synchronous
    plane.  ``raan_offset_deg`` rotates the whole constellation about
    the Earth's axis (ground-track longitude shift).
    """

    kind: str = "aligned"  # aligned | sso | explicit
    altitude_km: float = 500.0
    separation_ratio: float = 1.0
    alignment_t_s: float = 0.0
    raan_offset_deg: float = 0.0
    elements: tuple[KeplerElements, ...] = ()

    def __post_init__(self):
        if self.kind not in ("aligned", "sso", "explicit"):
            raise ValueError(f"unknown constellation kind {self.kind!r}")
        if self.kind == "explicit" and len(self.elements) != 3:
            raise ValueError("explicit constellation needs exactly 3 element sets")
        if self.kind != "explicit" and not 0.0 < self.separation_ratio <= 2.0:
            raise ValueError("separation ratio must lie in (0, 2]")


@dataclass(frozen=True)
class Scenario:
    """Complete description of one simulation run."""

    station_a: GroundStation
    station_b: GroundStation
    clock: EpochClock
    constellation: ConstellationSpec
    channel: ChannelModel
    devices: DeviceParams
    memory_a: MemoryParams
    memory_b: MemoryParams
    architecture: str = "DL"  # DL | UL
    theta_min_deg: float = 20.0
    grazing_altitude_km: float = 20.0
    t_start_s: float = -900.0
    t_end_s: float = 900.0
    dt_s: float = 1.0
    night_only: bool = False
    night_threshold_deg: float = -6.0
    gravity: GravityModel = field(default_factory=GravityModel.with_j2)
    cutoff_objective: str = "secure"
    cutoff_refresh_steps: int = 30

    def __post_init__(self):
        if self.architecture not in ("DL", "UL"):
            raise ValueError("architecture must be DL or UL")
        if not 0.0 < self.theta_min_deg < 90.0:
            raise ValueError("theta_min must lie in (0, 90)")
        if self.dt_s <= 0:
            raise ValueError("dt must be positive")
        if self.t_end_s <= self.t_start_s:
            raise ValueError("empty time range")


@dataclass(frozen=True)
class StepRecord:
    """One evaluated time step of the three-satellite link."""

    t_s: float
    geom_a: Topocentric
    geom_b: Topocentric
    intersat_a_km: float
    intersat_b_km: float
    channel_a: ChannelSample | None
    channel_b: ChannelSample | None
    channel_is_a: ChannelSample | None
    channel_is_b: ChannelSample | None
    eta_a: float
    eta_b: float
    trt_a_s: float
    trt_b_s: float
    d_cut_a: int
    d_cut_b: int
    rates_hz: BsmRates
    night: bool
    gated: bool
    los_ok: bool


@dataclass(frozen=True)
class PassResult:
    """Step records over one simulated window plus integrated totals."""

    steps: list[StepRecord]
    dt_s: float

    @property
    def gated_steps(self) -> list[StepRecord]:
        return [s for s in self.steps if s.gated]

    def total(self, which: str = "secure") -> float:
        return sum(getattr(s.rates_hz, which) for s in self.steps) * self.dt_s

    def peak(self, which: str = "secure") -> float:
        return max((getattr(s.rates_hz, which) for s in self.steps), default=0.0)

    @property
    def duration_s(self) -> float:
        """Length of the longest contiguous gated run."""
        best = run = 0
        for s in self.steps:
            run = run + 1 if s.gated else 0
            best = max(best, run)
        return best * self.dt_s

    @property
    def is_night(self) -> bool:
        gated = self.gated_steps
        return bool(gated) and all(s.night for s in gated)


@dataclass(frozen=True)
class PassSummary:
    t_start_s: float
    t_end_s: float
    duration_s: float
    peak_secure_hz: float
    attempted: float
    successful: float
    correct: float
    secure: float
    night: bool


@dataclass(frozen=True)
class CampaignResult:
    """Accumulated outcome of a long-duration scan."""

    passes: list[PassSummary]

    def total(self, which: str = "secure", night_only: bool = False) -> float:
        return sum(
            getattr(p, which) for p in self.passes if p.night or not night_only
        )

    def cumulative(self, which: str = "secure", night_only: bool = False):
        """(pass end times, running totals) for plotting."""
        times, totals = [], []
        acc = 0.0
        for p in sorted(self.passes, key=lambda p: p.t_start_s):
            if night_only and not p.night:
                continue
            acc += getattr(p, which)
            times.append(p.t_end_s)
            totals.append(acc)
        return np.asarray(times), np.asarray(totals)


# --- constellation construction ---

def _rotate_about(vec: np.ndarray, axis: np.ndarray, angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return vec * c + np.cross(axis, vec) * s + axis * float(np.dot(axis, vec)) * (1.0 - c)


def _rotate_z(vec: np.ndarray, angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([c * vec[0] - s * vec[1], s * vec[0] + c * vec[1], vec[2]])


def build_constellation(
    spec: ConstellationSpec,
    station_a: GroundStation,
    station_b: GroundStation,
    clock: EpochClock,
    gravity: GravityModel | None = None,
) -> list[KeplerElements]:
    """Three satellites ordered (outer A, central, outer B).

    Generator variants align the configuration over the stations at the
    requested epoch; the raan offset then shifts every plane jointly in
    longitude.
    """
    if spec.kind == "explicit":
        if spec.raan_offset_deg == 0.0:
            return list(spec.elements)
        return [
            replace(el, raan_deg=el.raan_deg + spec.raan_offset_deg) for el in spec.elements
        ]

    g = gravity or GravityModel.with_j2()
    t0 = spec.alignment_t_s
    u_a = ground_station_eci_many(station_a, clock, np.array([t0]))[0] / R_EARTH_KM
    u_b = ground_station_eci_many(station_b, clock, np.array([t0]))[0] / R_EARTH_KM
    normal = np.cross(u_a, u_b)
    n_norm = float(np.linalg.norm(normal))
    if n_norm < 1e-9:
        raise OrbitError("stations coincident or antipodal: orbital plane undefined")
    normal /= n_norm
    nu_gs = math.degrees(math.acos(max(-1.0, min(1.0, float(np.dot(u_a, u_b))))))
    nu_sat = spec.separation_ratio * nu_gs
    midpoint = u_a + u_b
    midpoint /= np.linalg.norm(midpoint)

    radius = R_EARTH_KM + spec.altitude_km
    offsets = (-0.5 * nu_sat, 0.0, 0.5 * nu_sat)  # A-side, central, B-side

    states: list[StateVector] = []
    if spec.kind == "aligned":
        speed = math.sqrt(g.mu / radius)
        for off in offsets:
            r_hat = _rotate_about(midpoint, normal, math.radians(off))
            t_hat = np.cross(normal, r_hat)
            t_hat /= np.linalg.norm(t_hat)
            states.append(StateVector(radius * r_hat, speed * t_hat, t0))
    else:  # sso: one sun-synchronous plane per satellite
        inc = math.radians(sso_inclination_deg(spec.altitude_km, g))
        speed = math.sqrt(g.mu / radius)
        for off in offsets:
            target = _rotate_about(midpoint, normal, math.radians(off))
            dec = math.asin(max(-1.0, min(1.0, float(target[2]))))
            if abs(math.sin(dec)) > abs(math.sin(inc)):
                raise OrbitError(
                    f"latitude {math.degrees(dec):.1f} deg unreachable at the "
                    f"sun-synchronous inclination {math.degrees(inc):.2f} deg"
                )
            arg_lat = math.asin(math.sin(dec) / math.sin(inc))
            ra = math.atan2(float(target[1]), float(target[0]))
            psi = math.atan2(math.sin(arg_lat) * math.cos(inc), math.cos(arg_lat))
            raan = ra - psi
            # position/velocity on the circular inclined orbit
            c_o, s_o = math.cos(raan), math.sin(raan)
            c_u, s_u = math.cos(arg_lat), math.sin(arg_lat)
            c_i, s_i = math.cos(inc), math.sin(inc)
            r_hat = np.array(
                [c_o * c_u - s_o * s_u * c_i, s_o * c_u + c_o * s_u * c_i, s_u * s_i]
            )
            t_hat = np.array(
                [-c_o * s_u - s_o * c_u * c_i, -s_o * s_u + c_o * c_u * c_i, c_u * s_i]
            )
            states.append(StateVector(radius * r_hat, speed * t_hat, t0))

    elements = []
    for sv in states:
        if spec.raan_offset_deg:
            ang = math.radians(spec.raan_offset_deg)
            sv = StateVector(_rotate_z(sv.r, ang), _rotate_z(sv.v, ang), sv.epoch_s)
        elements.append(cartesian_to_kepler(sv, g))
    return elements


def round_trip_times(
    architecture: str, slant_range_km: float, intersat_range_km: float
) -> float:
    """Classical-confirmation delay for one half of the repeater [s]."""
    if architecture == "DL":
        return 2.0 * slant_range_km / C_LIGHT_KM_S
    return 2.0 * intersat_range_km / C_LIGHT_KM_S


# --- per-step evaluation ---

class _CutoffTracker:
    """Warm-started cutoff optimization with periodic full refreshes."""

    def __init__(self, scenario: Scenario):
        self.sc = scenario
        self.warm: tuple[int, int] | None = None
        self.count = 0

    def optimize(self, eta_a, eta_b, d_rt_a, d_rt_b):
        warm = self.warm if self.count % self.sc.cutoff_refresh_steps else None
        da, db, rates = optimize_cutoffs(
            eta_a,
            eta_b,
            d_rt_a,
            d_rt_b,
            self.sc.memory_a,
            self.sc.memory_b,
            self.sc.devices.repetition_rate_hz,
            self.sc.cutoff_objective,
            warm_start=warm,
        )
        self.warm = (da, db)
        self.count += 1
        return da, db, rates


def _evaluate_step(
    sc: Scenario,
    t: float,
    sat_states: list[StateVector],
    tracker: _CutoffTracker,
    night: bool,
) -> StepRecord:
    outer_a, central, outer_b = sat_states
    pos_a, vel_a = ground_station_state(sc.station_a, sc.clock, t)
    pos_b, vel_b = ground_station_state(sc.station_b, sc.clock, t)
    geom_a = topocentric(pos_a, vel_a, outer_a)
    geom_b = topocentric(pos_b, vel_b, outer_b)
    is_a = float(np.linalg.norm(outer_a.r - central.r))
    is_b = float(np.linalg.norm(outer_b.r - central.r))

    los_ok = line_of_sight(outer_a.r, central.r, sc.grazing_altitude_km) and line_of_sight(
        outer_b.r, central.r, sc.grazing_altitude_km
    )
    elev_ok = geom_a.elevation_deg >= sc.theta_min_deg and geom_b.elevation_deg >= sc.theta_min_deg
    gated = los_ok and elev_ok and (night or not sc.night_only)

    if not gated:
        return StepRecord(
            t, geom_a, geom_b, is_a, is_b, None, None, None, None,
            0.0, 0.0, 0.0, 0.0, 0, 0, ZERO_RATES, night, False, los_ok,
        )

    if sc.architecture == "DL":
        ch_a = sc.channel.downlink(geom_a.elevation_deg, geom_a.slant_range_km)
        ch_b = sc.channel.downlink(geom_b.elevation_deg, geom_b.slant_range_km)
    else:
        ch_a = sc.channel.uplink(geom_a.elevation_deg, geom_a.slant_range_km, geom_a.los_rate_rad_s)
        ch_b = sc.channel.uplink(geom_b.elevation_deg, geom_b.slant_range_km, geom_b.los_rate_rad_s)
    ch_is_a = sc.channel.intersat(is_a)
    ch_is_b = sc.channel.intersat(is_b)

    eta_a = link_success(ch_a.eta_total, ch_is_a.eta_total, sc.devices, sc.architecture)
    eta_b = link_success(ch_b.eta_total, ch_is_b.eta_total, sc.devices, sc.architecture)
    trt_a = round_trip_times(sc.architecture, geom_a.slant_range_km, is_a)
    trt_b = round_trip_times(sc.architecture, geom_b.slant_range_km, is_b)
    rate = sc.devices.repetition_rate_hz
    d_rt_a = int(trt_a * rate)
    d_rt_b = int(trt_b * rate)

    d_cut_a, d_cut_b, per_trial = tracker.optimize(eta_a, eta_b, d_rt_a, d_rt_b)
    return StepRecord(
        t, geom_a, geom_b, is_a, is_b, ch_a, ch_b, ch_is_a, ch_is_b,
        eta_a, eta_b, trt_a, trt_b, d_cut_a, d_cut_b,
        per_trial.scaled(rate), night, True, los_ok,
    )


def _night_mask(sc: Scenario, times: np.ndarray) -> np.ndarray:
    elev_a = solar_elevation_deg(sc.station_a, sc.clock, times)
    elev_b = solar_elevation_deg(sc.station_b, sc.clock, times)
    return (elev_a < sc.night_threshold_deg) & (elev_b < sc.night_threshold_deg)


def _propagate_window(
    sc: Scenario, states: list[StateVector], t_from: float, t_to: float, dt: float
) -> Trajectory:
    """Propagate the three satellites over [t_from, t_to], handling a
    window that starts before the state epoch by integrating backward."""
    epoch = states[0].epoch_s
    substeps = max(1, int(round(dt / 1.0)))
    if t_from < epoch:
        back = propagate(
            [StateVector(s.r, -s.v, -epoch) for s in states],
            sc.gravity,
            -t_from,
            dt,
            substeps,
        )
        r = back.r_km[::-1]
        v = -back.v_km_s[::-1]
        epochs = -back.epochs_s[::-1]
        if t_to <= epoch:
            keep = epochs <= t_to + 1e-9
            return Trajectory(epochs[keep], r[keep], v[keep])
        fwd = propagate(states, sc.gravity, t_to, dt, substeps)
        return Trajectory(
            np.concatenate([epochs[:-1], fwd.epochs_s]),
            np.concatenate([r[:-1], fwd.r_km]),
            np.concatenate([v[:-1], fwd.v_km_s]),
        )
    if t_from > epoch:
        lead = propagate(states, sc.gravity, t_from, dt, substeps)
        states = [lead.state(len(lead) - 1, j) for j in range(3)]
    fwd = propagate(states, sc.gravity, t_to, dt, substeps)
    return fwd


def simulate_pass(sc: Scenario) -> PassResult:
    """Evaluate every step of the scenario window around one pass."""
    elements = build_constellation(sc.constellation, sc.station_a, sc.station_b, sc.clock, sc.gravity)
    align_t = sc.constellation.alignment_t_s if sc.constellation.kind != "explicit" else 0.0
    states = [
        StateVector(s.r, s.v, align_t)
        for s in (kepler_to_cartesian(el, sc.gravity) for el in elements)
    ]
    traj = _propagate_window(sc, states, sc.t_start_s, sc.t_end_s, sc.dt_s)
    night = _night_mask(sc, traj.epochs_s)
    tracker = _CutoffTracker(sc)
    steps = [
        _evaluate_step(
            sc,
            float(traj.epochs_s[i]),
            [traj.state(i, j) for j in range(3)],
            tracker,
            bool(night[i]),
        )
        for i in range(len(traj))
    ]
    return PassResult(steps, sc.dt_s)


def sweep(sc: Scenario, altitudes_km: list[float], ratios: list[float]):
    """Grid of per-pass secure totals; the constellation is rebuilt per cell.

    Returns a list of dict rows (altitude_km, ratio, totals, duration,
    los_blocked).
    """
    rows = []
    for h in altitudes_km:
        for ratio in ratios:
            spec = replace(sc.constellation, altitude_km=h, separation_ratio=ratio)
            result = simulate_pass(replace(sc, constellation=spec))
            gated = result.gated_steps
            rows.append(
                {
                    "altitude_km": h,
                    "ratio": ratio,
                    "secure": result.total("secure"),
                    "correct": result.total("correct"),
                    "successful": result.total("successful"),
                    "attempted": result.total("attempted"),
                    "duration_s": result.duration_s,
                    "los_blocked": not gated,
                }
            )
    return rows


def annual_campaign(
    sc: Scenario,
    coarse_dt_s: float = 10.0,
    chunk_s: float = 86400.0,
    integration_step_s: float = 2.0,
) -> CampaignResult:
    """Scan a long time range with coarse gating detection and fine
    re-evaluation inside candidate windows.

    The satellites are carried through the whole range at the fine
    integration step; channel and rate evaluation runs at ``sc.dt_s``
    only inside windows where the coarse scan saw the gates open.
    """
    elements = build_constellation(sc.constellation, sc.station_a, sc.station_b, sc.clock, sc.gravity)
    align_t = sc.constellation.alignment_t_s if sc.constellation.kind != "explicit" else 0.0
    states = [
        StateVector(s.r, s.v, align_t)
        for s in (kepler_to_cartesian(el, sc.gravity) for el in elements)
    ]
    if sc.t_start_s < align_t:
        # rewind the constellation so the scan can cover the first pass
        back = propagate(
            [StateVector(s.r, -s.v, -align_t) for s in states],
            sc.gravity,
            -sc.t_start_s,
            max(align_t - sc.t_start_s, integration_step_s),
            max(1, int(round((align_t - sc.t_start_s) / integration_step_s))),
        )
        states = [
            StateVector(back.r_km[-1, j], -back.v_km_s[-1, j], sc.t_start_s) for j in range(3)
        ]

    substeps = max(1, int(round(coarse_dt_s / integration_step_s)))
    passes: list[PassSummary] = []
    t = min(align_t, sc.t_start_s)
    margin = 3 * coarse_dt_s
    pending: tuple[list[StateVector], float, float, float] | None = None  # anchor states, anchor t, w0, w1

    def flush(window):
        anchor_states, anchor_t, w0, w1 = window
        w1 = min(w1, sc.t_end_s)
        sub = replace(sc, t_start_s=anchor_t, t_end_s=w1)
        fine = _propagate_window(sub, anchor_states, anchor_t, w1, sc.dt_s)
        night = _night_mask(sc, fine.epochs_s)
        tracker = _CutoffTracker(sc)
        records = [
            _evaluate_step(
                sc,
                float(fine.epochs_s[i]),
                [fine.state(i, j) for j in range(3)],
                tracker,
                bool(night[i]),
            )
            for i in range(len(fine))
            if fine.epochs_s[i] >= w0 - 1e-9
        ]
        result = PassResult(records, sc.dt_s)
        gated = result.gated_steps
        if not gated:
            return
        passes.append(
            PassSummary(
                t_start_s=gated[0].t_s,
                t_end_s=gated[-1].t_s,
                duration_s=result.duration_s,
                peak_secure_hz=result.peak("secure"),
                attempted=result.total("attempted"),
                successful=result.total("successful"),
                correct=result.total("correct"),
                secure=result.total("secure"),
                night=result.is_night,
            )
        )

    while t < sc.t_end_s - 1e-9:
        t_next = min(t + chunk_s, sc.t_end_s)
        traj = propagate(states, sc.gravity, t_next, coarse_dt_s, substeps)
        states = [traj.state(len(traj) - 1, j) for j in range(3)]

        mask = _coarse_gate_mask(sc, traj)
        if t < sc.t_start_s:
            mask &= traj.epochs_s >= sc.t_start_s
        for w0, w1 in _mask_windows(traj.epochs_s, mask, margin):
            if pending is not None and w0 <= pending[3] + 2 * coarse_dt_s:
                pending = (pending[0], pending[1], pending[2], max(w1, pending[3]))
            else:
                if pending is not None:
                    flush(pending)
                start_idx = max(0, min(len(traj) - 1, int((w0 - traj.epochs_s[0]) / coarse_dt_s)))
                anchor = [traj.state(start_idx, j) for j in range(3)]
                pending = (anchor, float(traj.epochs_s[start_idx]), w0, w1)
        # emit unless the window may continue into the next chunk
        if pending is not None and pending[3] < t_next - margin:
            flush(pending)
            pending = None
        t = t_next
    if pending is not None:
        flush(pending)
    return CampaignResult(passes)


def _coarse_gate_mask(sc: Scenario, traj: Trajectory) -> np.ndarray:
    """Vectorized elevation + line-of-sight gates on a coarse trajectory."""
    elev_a, _ = elevation_series(traj, sc.station_a, sc.clock, sat=0)
    elev_b, _ = elevation_series(traj, sc.station_b, sc.clock, sat=2)
    mask = (elev_a >= sc.theta_min_deg) & (elev_b >= sc.theta_min_deg)
    if not np.any(mask):
        return mask
    mask &= line_of_sight_series(traj.r_km[:, 0], traj.r_km[:, 1], sc.grazing_altitude_km)
    mask &= line_of_sight_series(traj.r_km[:, 2], traj.r_km[:, 1], sc.grazing_altitude_km)
    if sc.night_only:
        mask &= _night_mask(sc, traj.epochs_s)
    return mask


def _mask_windows(times: np.ndarray, mask: np.ndarray, margin_s: float):
    """Contiguous True runs of the mask, padded by the margin, merged."""
    if not np.any(mask):
        return []
    idx = np.flatnonzero(mask)
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = [idx[0], *idx[breaks + 1]]
    ends = [*idx[breaks], idx[-1]]
    windows = []
    for s, e in zip(starts, ends):
        w0 = float(times[s]) - margin_s
        w1 = float(times[e]) + margin_s
        if windows and w0 <= windows[-1][1]:
            windows[-1] = (windows[-1][0], w1)
        else:
            windows.append((w0, w1))
    return windows


def longitude_offset_scan(sc: Scenario, offsets_deg: list[float]):
    """Per-pass totals when the constellation ground track is shifted in
    longitude (same alignment epoch, planes rotated jointly)."""
    rows = []
    for dlam in offsets_deg:
        spec = replace(sc.constellation, raan_offset_deg=dlam)
        result = simulate_pass(replace(sc, constellation=spec))
        rows.append(
            {
                "dlambda_deg": dlam,
                "secure": result.total("secure"),
                "duration_s": result.duration_s,
                "peak_secure_hz": result.peak("secure"),
            }
        )
    return rows

import math
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from qrcsim.constants import MU_EARTH_KM3_S2, R_EARTH_KM, SIDEREAL_DAY_S
from qrcsim.orbit import (
    EpochClock,
    GravityModel,
    GroundStation,
    KeplerElements,
    OrbitError,
    StateVector,
    cartesian_to_kepler,
    gravity_accel,
    ground_station_eci,
    is_night,
    j2_node_rate_rad_s,
    kepler_to_cartesian,
    orbital_period_s,
    propagate,
    solar_elevation_deg,
    sso_inclination_deg,
    sun_direction,
    zonal_potential,
)

KEPLER = GravityModel.point_mass()
J2 = GravityModel.with_j2()


class TestElementConversions:
    def test_circular_equatorial_identities(self):
        el = KeplerElements(R_EARTH_KM + 500.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        sv = kepler_to_cartesian(el, KEPLER)
        assert np.linalg.norm(sv.r) == pytest.approx(el.a_km, rel=1e-12)
        assert abs(np.dot(sv.r, sv.v)) < 1e-9
        assert np.linalg.norm(sv.v) == pytest.approx(
            math.sqrt(MU_EARTH_KM3_S2 / el.a_km), rel=1e-12
        )

    def test_circular_period(self):
        assert orbital_period_s(6878.137) == pytest.approx(5677.0, abs=1.0)

    def test_round_trip_random_elements(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            a = rng.uniform(6800.0, 45000.0)
            e_max = min(0.8, 1.0 - (R_EARTH_KM + 200.0) / a)  # perigee above surface
            el = KeplerElements(
                a_km=a,
                e=rng.uniform(0.0, e_max),
                inc_deg=rng.uniform(0.5, 179.5),
                raan_deg=rng.uniform(0.0, 360.0),
                argp_deg=rng.uniform(0.0, 360.0),
                true_anomaly_deg=rng.uniform(0.0, 360.0),
            )
            back = cartesian_to_kepler(kepler_to_cartesian(el, KEPLER), KEPLER)
            assert back.a_km == pytest.approx(el.a_km, rel=1e-9)
            assert back.e == pytest.approx(el.e, abs=1e-9)
            assert back.inc_deg == pytest.approx(el.inc_deg, abs=1e-9)
            for name in ("raan_deg", "argp_deg", "true_anomaly_deg"):
                diff = (getattr(back, name) - getattr(el, name) + 180.0) % 360.0 - 180.0
                assert abs(diff) < 1e-7

    def test_angular_momentum_matches_elements(self):
        el = KeplerElements(9000.0, 0.2, 45.0, 10.0, 20.0, 30.0)
        sv = kepler_to_cartesian(el, KEPLER)
        h = np.linalg.norm(np.cross(sv.r, sv.v))
        assert h == pytest.approx(
            math.sqrt(MU_EARTH_KM3_S2 * el.a_km * (1 - el.e**2)), rel=1e-12
        )

    def test_equatorial_circular_convention(self):
        el = KeplerElements(7000.0, 0.0, 0.0, 0.0, 0.0, 137.0)
        back = cartesian_to_kepler(kepler_to_cartesian(el, KEPLER), KEPLER)
        assert back.raan_deg == 0.0
        assert back.argp_deg == 0.0
        assert back.e < 1e-12
        assert back.true_anomaly_deg == pytest.approx(137.0, abs=1e-9)

    def test_rejects_hyperbolic(self):
        with pytest.raises(OrbitError):
            KeplerElements(7000.0, 1.5, 0.0, 0.0, 0.0, 0.0)
        sv = StateVector([8000.0, 0.0, 0.0], [0.0, 15.0, 0.0])
        with pytest.raises(OrbitError):
            cartesian_to_kepler(sv, KEPLER)

    def test_invariant_validation(self):
        with pytest.raises(OrbitError):
            KeplerElements(1000.0, 0.0, 0.0, 0.0, 0.0, 0.0)  # below surface
        with pytest.raises(OrbitError):
            KeplerElements(7000.0, 0.0, 200.0, 0.0, 0.0, 0.0)
        el = KeplerElements(7000.0, 0.0, 10.0, 370.0, -10.0, 720.0)
        assert el.raan_deg == 10.0 and el.argp_deg == 350.0 and el.true_anomaly_deg == 0.0


class TestGravity:
    def test_point_mass_on_axis(self):
        acc = gravity_accel(np.array([7000.0, 0.0, 0.0]), KEPLER)
        assert acc[0] == pytest.approx(-MU_EARTH_KM3_S2 / 7000.0**2, rel=1e-14)
        assert acc[1] == acc[2] == 0.0

    def test_j2_equatorial_symmetry(self):
        acc = gravity_accel(np.array([5000.0, 4898.0, 0.0]), J2)
        assert acc[2] == pytest.approx(0.0, abs=1e-18)

    def test_gradient_matches_potential(self):
        rng = np.random.default_rng(11)
        g = GravityModel(zonal=(1.08263e-3, -2.53e-6, -1.61e-6))  # J2..J4
        h = 1e-3
        for _ in range(100):
            r = rng.uniform(-1.0, 1.0, 3)
            r = r / np.linalg.norm(r) * rng.uniform(6700.0, 20000.0)
            num = np.empty(3)
            for i in range(3):
                dp = np.zeros(3)
                dp[i] = h
                num[i] = -(zonal_potential(r + dp, g) - zonal_potential(r - dp, g)) / (2 * h)
            ana = gravity_accel(r, g)
            assert np.max(np.abs(num - ana)) <= 1e-8 * np.max(np.abs(ana))


class TestPropagation:
    def test_keplerian_closure_one_period(self):
        el = KeplerElements(R_EARTH_KM + 500.0, 0.0, 51.6, 40.0, 0.0, 0.0)
        sv = kepler_to_cartesian(el, KEPLER)
        period = orbital_period_s(el.a_km)
        traj = propagate(sv, KEPLER, period, step_s=1.0)
        err_km = np.linalg.norm(traj.r_km[-1, 0] - sv.r)
        assert err_km < 1e-3  # one meter

    def test_energy_and_momentum_conservation(self):
        el = KeplerElements(R_EARTH_KM + 500.0, 0.05, 30.0, 0.0, 0.0, 0.0)
        sv = kepler_to_cartesian(el, KEPLER)
        traj = propagate(sv, KEPLER, orbital_period_s(el.a_km), step_s=1.0)
        r = np.linalg.norm(traj.r_km[:, 0], axis=1)
        v2 = np.sum(traj.v_km_s[:, 0] ** 2, axis=1)
        energy = v2 / 2 - MU_EARTH_KM3_S2 / r
        h = np.linalg.norm(np.cross(traj.r_km[:, 0], traj.v_km_s[:, 0]), axis=1)
        assert np.max(np.abs(energy / energy[0] - 1.0)) < 1e-10
        assert np.max(np.abs(h / h[0] - 1.0)) < 1e-10

    def test_j2_sso_raan_drift(self):
        el = KeplerElements(R_EARTH_KM + 500.0, 0.0, 97.4055, 68.5, 0.0, 0.0)
        sv = kepler_to_cartesian(el, J2)
        days = 10.0
        traj = propagate(sv, J2, days * 86400.0, step_s=10.0)
        raan0 = cartesian_to_kepler(traj.state(0), J2).raan_deg
        raan1 = cartesian_to_kepler(traj.state(len(traj) - 1), J2).raan_deg
        drift = ((raan1 - raan0 + 180.0) % 360.0 - 180.0) / days
        assert drift == pytest.approx(0.9856, rel=0.02)

    def test_j2_secular_rate_low_inclination(self):
        el = KeplerElements(R_EARTH_KM + 700.0, 0.001, 30.0, 10.0, 0.0, 0.0)
        sv = kepler_to_cartesian(el, J2)
        traj = propagate(sv, J2, 10 * 86400.0, step_s=10.0)
        raan0 = cartesian_to_kepler(traj.state(0), J2).raan_deg
        raan1 = cartesian_to_kepler(traj.state(len(traj) - 1), J2).raan_deg
        drift = math.radians((raan1 - raan0 + 180.0) % 360.0 - 180.0) / (10 * 86400.0)
        assert drift == pytest.approx(j2_node_rate_rad_s(el, J2), rel=0.02)
        final = cartesian_to_kepler(traj.state(len(traj) - 1), J2)
        assert final.e < 1e-3

    def test_impact_detected(self):
        sv = StateVector([R_EARTH_KM + 200.0, 0.0, 0.0], [0.0, 1.0, 0.0])
        with pytest.raises(OrbitError, match="impact"):
            propagate(sv, KEPLER, 5000.0, step_s=1.0)

    def test_multi_satellite_matches_single(self):
        el1 = KeplerElements(7000.0, 0.0, 50.0, 0.0, 0.0, 0.0)
        el2 = KeplerElements(7200.0, 0.01, 60.0, 30.0, 10.0, 40.0)
        sv1, sv2 = kepler_to_cartesian(el1, J2), kepler_to_cartesian(el2, J2)
        joint = propagate([sv1, sv2], J2, 3000.0, step_s=10.0)
        solo = propagate(sv2, J2, 3000.0, step_s=10.0)
        assert np.allclose(joint.r_km[:, 1], solo.r_km[:, 0], atol=1e-12)


class TestEarthRotationAndSun:
    def test_pole_station(self, clock):
        gs = GroundStation("pole", 90.0, 0.0)
        for t in (0.0, 12345.6):
            pos = ground_station_eci(gs, clock, t)
            assert np.allclose(pos, [0.0, 0.0, R_EARTH_KM], atol=1e-6)

    def test_equator_prime_meridian_alignment(self):
        clock = EpochClock(datetime(2020, 1, 1, tzinfo=timezone.utc))
        gs = GroundStation("eq", 0.0, 0.0)
        t = -clock.gmst0_rad / clock.earth_rotation_rate  # gmst0 + w t = 0
        pos = ground_station_eci(gs, clock, t)
        assert pos[0] == pytest.approx(R_EARTH_KM, rel=1e-12)
        assert abs(pos[1]) < 1e-6 and abs(pos[2]) < 1e-9

    def test_sidereal_day_periodicity(self, clock):
        gs = GroundStation("x", 33.0, 45.0)
        a = ground_station_eci(gs, clock, 1000.0)
        b = ground_station_eci(gs, clock, 1000.0 + SIDEREAL_DAY_S)
        assert np.linalg.norm(a - b) < 1e-3  # one meter

    def test_sun_annual_closure(self, clock):
        a = sun_direction(clock, 0.0)
        b = sun_direction(clock, 365.25 * 86400.0)
        angle = math.degrees(math.acos(np.clip(np.dot(a, b), -1, 1)))
        assert angle < 0.5

    def test_sun_equinox_declination(self):
        clock = EpochClock(datetime(2020, 3, 20, 4, 0, 0, tzinfo=timezone.utc))
        dec = math.degrees(math.asin(sun_direction(clock, 0.0)[2]))
        assert abs(dec) < 0.5

    def test_sun_ecliptic_planarity(self, clock):
        t = np.linspace(0.0, 400 * 86400.0, 500)
        dirs = sun_direction(clock, t)
        n = clock.days_j2000 + t / 86400.0
        eps = np.radians(23.439 - 0.0000004 * n)
        # ecliptic pole: (0, -sin eps, cos eps)
        lat = np.degrees(
            np.arcsin(-dirs[:, 1] * np.sin(eps) + dirs[:, 2] * np.cos(eps))
        )
        assert np.max(np.abs(lat)) < 0.01

    def test_night_flag_zenith_nadir(self, clock):
        gs = GroundStation("x", 52.5, 13.4)
        t = np.linspace(0.0, 86400.0, 1440)
        elev = solar_elevation_deg(gs, clock, t)
        t_noon = float(t[np.argmax(elev)])
        t_midnight = float(t[np.argmin(elev)])
        assert not is_night(gs, clock, t_noon)
        assert is_night(gs, clock, t_midnight)

    def test_night_fraction_over_year(self, clock):
        gs = GroundStation("x", 52.5, 13.4)
        t = np.arange(0.0, 365.0 * 86400.0, 600.0)
        elev = solar_elevation_deg(gs, clock, t)
        frac = np.mean(elev < 0.0)
        assert frac == pytest.approx(0.5, abs=0.02)


class TestSso:
    def test_sso_inclination_reference(self):
        assert sso_inclination_deg(500.0) == pytest.approx(97.40, abs=0.05)

    def test_sso_infeasible_high_altitude(self):
        with pytest.raises(OrbitError):
            sso_inclination_deg(6000.0)

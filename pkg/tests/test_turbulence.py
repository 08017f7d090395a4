import math

import numpy as np
import pytest
from scipy.integrate import quad

from qrcsim.turbulence import (
    TurbulenceError,
    TurbulenceProfile,
    WindModel,
    calibrate_hv,
    cn2_moment,
    cone_integral,
    fried_parameter_m,
    greenwood_frequency_hz,
    hv_10_10,
    isoplanatic_angle_rad,
    tyler_frequency_hz,
)

HV57 = TurbulenceProfile(1.7e-14, 21.0, "HV5/7")


class TestProfile:
    def test_ground_value_dominated_by_ground_term(self):
        p = hv_10_10()
        assert p.cn2(0.0) == pytest.approx(p.ground_cn2 + 2.7e-16, rel=1e-12)

    def test_high_altitude_decay(self):
        assert hv_10_10().cn2(100_000.0) < 1e-19

    def test_vectorized_matches_scalar(self):
        p = hv_10_10()
        h = np.array([0.0, 500.0, 10_000.0])
        assert np.allclose(p.cn2(h), [p.cn2(v) for v in h])

    def test_moment_matches_quadrature(self):
        # piecewise quadrature resolves the ground layer and the 10 km bump
        spans = [(0.0, 2_000.0), (2_000.0, 20_000.0), (20_000.0, 120_000.0)]
        for power in (0.0, 5.0 / 3.0, 2.0):
            closed = cn2_moment(HV57, power)
            numeric = sum(
                quad(lambda h: HV57.cn2(h) * h**power, a, b, limit=200)[0] for a, b in spans
            )
            assert closed == pytest.approx(numeric, rel=1e-6)

    def test_invalid_parameters(self):
        with pytest.raises(TurbulenceError):
            TurbulenceProfile(-1.0, 21.0)
        with pytest.raises(TurbulenceError):
            TurbulenceProfile(1e-14, 0.0)


class TestCalibration:
    def test_hv_10_10_targets(self):
        p = hv_10_10()
        assert fried_parameter_m(0.5e-6, 90.0, p) == pytest.approx(0.10, rel=0.01)
        assert isoplanatic_angle_rad(0.5e-6, 90.0, p) == pytest.approx(10e-6, rel=0.01)

    def test_hv_5_7_reference_values(self):
        assert fried_parameter_m(0.5e-6, 90.0, HV57) == pytest.approx(0.05, rel=0.02)
        assert isoplanatic_angle_rad(0.5e-6, 90.0, HV57) == pytest.approx(7e-6, rel=0.03)

    def test_custom_targets(self):
        p = calibrate_hv(0.08, 8e-6)
        assert fried_parameter_m(0.5e-6, 90.0, p) == pytest.approx(0.08, rel=1e-6)
        assert isoplanatic_angle_rad(0.5e-6, 90.0, p) == pytest.approx(8e-6, rel=1e-6)

    def test_infeasible_targets(self):
        with pytest.raises(TurbulenceError):
            calibrate_hv(1.0, 1e-7)


class TestFriedParameter:
    def test_elevation_scaling(self):
        p = hv_10_10()
        r0_zen = fried_parameter_m(1.55e-6, 90.0, p)
        for theta in (20.0, 45.0, 70.0):
            expected = r0_zen * math.sin(math.radians(theta)) ** (3.0 / 5.0)
            assert fried_parameter_m(1.55e-6, theta, p) == pytest.approx(expected, rel=1e-12)

    def test_wavelength_scaling(self):
        p = hv_10_10()
        ratio = fried_parameter_m(1.55e-6, 40.0, p) / fried_parameter_m(0.5e-6, 40.0, p)
        assert ratio == pytest.approx((1.55 / 0.5) ** 1.2, rel=1e-12)

    def test_decreases_toward_horizon(self):
        p = hv_10_10()
        thetas = np.linspace(5.0, 90.0, 30)
        values = [fried_parameter_m(1.55e-6, t, p) for t in thetas]
        assert np.all(np.diff(values) > 0)


class TestWindAndFrequencies:
    def test_bufton_peak_location(self):
        w = WindModel()
        assert w.speed(9400.0) == pytest.approx(25.0, rel=1e-9)
        assert w.speed(0.0) == pytest.approx(5.0 + 20.0 * math.exp(-(9400.0 / 4800.0) ** 2))

    def test_slew_term(self):
        w = WindModel()
        assert w.speed(10_000.0, 0.01) - w.speed(10_000.0, 0.0) == pytest.approx(100.0)

    def test_greenwood_monotone_in_slew(self):
        p = hv_10_10()
        w = WindModel()
        f0 = greenwood_frequency_hz(1.55e-6, 90.0, p, w, 0.0)
        f1 = greenwood_frequency_hz(1.55e-6, 90.0, p, w, 0.01)
        assert f1 > f0 > 0

    def test_greenwood_wavelength_scaling(self):
        p, w = hv_10_10(), WindModel()
        ratio = greenwood_frequency_hz(0.5e-6, 60.0, p, w) / greenwood_frequency_hz(
            1.55e-6, 60.0, p, w
        )
        assert ratio == pytest.approx((1.55 / 0.5) ** 1.2, rel=1e-9)

    def test_tyler_positive_and_aperture_scaling(self):
        p, w = hv_10_10(), WindModel()
        f1 = tyler_frequency_hz(1.55e-6, 45.0, 1.0, p, w)
        f2 = tyler_frequency_hz(1.55e-6, 45.0, 2.0, p, w)
        assert f1 > 0
        assert f2 / f1 == pytest.approx(2.0 ** (-1.0 / 6.0), rel=1e-12)

    def test_cone_integral_below_total(self):
        p = hv_10_10()
        assert 0.0 < cone_integral(p, 18_000.0) < cn2_moment(p, 0.0)

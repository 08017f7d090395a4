"""Atmospheric turbulence: Hufnagel-Valley structure-constant profile,
Fried parameter, isoplanatic angle, Greenwood/Tyler frequencies and the
Bufton wind model.

The two free Hufnagel-Valley constants (ground strength and RMS
high-altitude wind) are calibrated so that the preset profile meets its
defining zenith targets; see :func:`calibrate_hv`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

# altitude quadrature grid for wind-weighted integrals [m]
_H_GRID = np.concatenate(
    [np.linspace(0.0, 2_000.0, 220, endpoint=False), np.geomspace(2_000.0, 60_000.0, 400)]
)


class TurbulenceError(RuntimeError):
    """Raised when a turbulence integral cannot be evaluated."""


@dataclass(frozen=True)
class TurbulenceProfile:
    """Hufnagel-Valley Cn^2 profile.

    cn2(h) = 5.94e-53 (v/27)^2 h^10 e^(-h/1000)
           + free_atm_cn2 e^(-h/1500) + A e^(-h/100),  h in meters.
    """

    ground_cn2: float  # A [m^(-2/3)]
    wind_rms: float    # v [m/s]
    label: str = "custom"
    free_atm_cn2: float = 2.7e-16

    def __post_init__(self):
        if self.ground_cn2 < 0 or self.free_atm_cn2 < 0:
            raise TurbulenceError("Cn2 strengths must be nonnegative")
        if self.wind_rms <= 0:
            raise TurbulenceError("RMS wind must be positive")

    @classmethod
    def vacuum(cls) -> "TurbulenceProfile":
        """Identically zero structure constant (turbulence-free limit)."""
        return cls(ground_cn2=0.0, wind_rms=1e-9, label="vacuum", free_atm_cn2=0.0)

    def cn2(self, h_m):
        """Structure constant at altitude(s) h [m] above the station."""
        h = np.asarray(h_m, dtype=float)
        bump = 5.94e-53 * (self.wind_rms / 27.0) ** 2 * h**10 * np.exp(-h / 1000.0)
        free = self.free_atm_cn2 * np.exp(-h / 1500.0)
        ground = self.ground_cn2 * np.exp(-h / 100.0)
        out = bump + free + ground
        return float(out) if np.ndim(h_m) == 0 else out


@dataclass(frozen=True)
class WindModel:
    """Bufton wind profile v(h) = v_g + v_t exp(-((h - h_peak)/h_scale)^2)."""

    v_ground: float = 5.0
    v_tropopause_peak: float = 20.0
    h_peak_m: float = 9_400.0
    h_scale_m: float = 4_800.0

    def __post_init__(self):
        for name in ("v_ground", "v_tropopause_peak", "h_peak_m", "h_scale_m"):
            if getattr(self, name) <= 0:
                raise TurbulenceError(f"{name} must be positive")

    def speed(self, h_m, slew_rate_rad_s: float = 0.0):
        """Effective transverse wind, including the LoS slew term slew*h."""
        h = np.asarray(h_m, dtype=float)
        v = (
            self.v_ground
            + self.v_tropopause_peak * np.exp(-(((h - self.h_peak_m) / self.h_scale_m) ** 2))
            + slew_rate_rad_s * h
        )
        return float(v) if np.ndim(h_m) == 0 else v


def _gamma(x: float) -> float:
    return math.exp(gammaln(x))


def cn2_moment(profile: TurbulenceProfile, power: float) -> float:
    """Closed-form integral of Cn2(h) * h^power over all altitudes.

    Each Hufnagel-Valley term integrates to Gamma(n + power + 1) s^(n+power+1)
    for scale s; this is exact for any power > -1.
    """
    if power <= -1.0:
        raise TurbulenceError("moment power must exceed -1")
    w = (profile.wind_rms / 27.0) ** 2
    bump = 5.94e-53 * w * _gamma(11.0 + power) * 1000.0 ** (11.0 + power)
    free = profile.free_atm_cn2 * _gamma(1.0 + power) * 1500.0 ** (1.0 + power)
    ground = profile.ground_cn2 * _gamma(1.0 + power) * 100.0 ** (1.0 + power)
    return bump + free + ground


def _airmass(elevation_deg: float) -> float:
    if elevation_deg <= 0.0 or elevation_deg > 90.0:
        raise TurbulenceError(f"elevation {elevation_deg} outside (0, 90]")
    return 1.0 / math.sin(math.radians(elevation_deg))


def fried_parameter_m(
    wavelength_m: float, elevation_deg: float, profile: TurbulenceProfile
) -> float:
    """Fried parameter r0 = [0.423 k^2 sec(zeta) int Cn2 dh]^(-3/5)."""
    k = 2.0 * math.pi / wavelength_m
    integral = cn2_moment(profile, 0.0)
    if not np.isfinite(integral):
        raise TurbulenceError("Cn2 integral did not converge")
    if integral == 0.0:
        return math.inf
    return (0.423 * k * k * _airmass(elevation_deg) * integral) ** (-3.0 / 5.0)


def isoplanatic_angle_rad(
    wavelength_m: float, elevation_deg: float, profile: TurbulenceProfile
) -> float:
    """Isoplanatic angle theta0 = [2.914 k^2 sec^(8/3) int Cn2 h^(5/3) dh]^(-3/5)."""
    k = 2.0 * math.pi / wavelength_m
    integral = cn2_moment(profile, 5.0 / 3.0)
    return (2.914 * k * k * _airmass(elevation_deg) ** (8.0 / 3.0) * integral) ** (-3.0 / 5.0)


def greenwood_frequency_hz(
    wavelength_m: float,
    elevation_deg: float,
    profile: TurbulenceProfile,
    wind: WindModel,
    slew_rate_rad_s: float = 0.0,
) -> float:
    """Greenwood frequency f_G = 2.31 lambda^(-6/5) [sec(z) int Cn2 v^(5/3)]^(3/5)."""
    v = wind.speed(_H_GRID, slew_rate_rad_s)
    integrand = profile.cn2(_H_GRID) * v ** (5.0 / 3.0)
    integral = float(np.trapezoid(integrand, _H_GRID))
    if not np.isfinite(integral):
        raise TurbulenceError("wind-weighted Cn2 integral did not converge")
    return 2.31 * wavelength_m ** (-6.0 / 5.0) * (_airmass(elevation_deg) * integral) ** (3.0 / 5.0)


def tyler_frequency_hz(
    wavelength_m: float,
    elevation_deg: float,
    aperture_m: float,
    profile: TurbulenceProfile,
    wind: WindModel,
    slew_rate_rad_s: float = 0.0,
) -> float:
    """Tyler tilt-tracking frequency (v^2-weighted turbulence moment)."""
    v = wind.speed(_H_GRID, slew_rate_rad_s)
    integrand = profile.cn2(_H_GRID) * v * v
    integral = float(np.trapezoid(integrand, _H_GRID))
    return (
        0.368
        * aperture_m ** (-1.0 / 6.0)
        / wavelength_m
        * math.sqrt(_airmass(elevation_deg) * integral)
    )


def cone_integral(profile: TurbulenceProfile, beacon_altitude_m: float) -> float:
    """Focal-anisoplanatism moment: int Cn2 (h/H)^(5/3) below the beacon
    plus the unsensed turbulence above it."""
    below = _H_GRID <= beacon_altitude_m
    cn2 = profile.cn2(_H_GRID)
    weight = np.where(below, (_H_GRID / beacon_altitude_m) ** (5.0 / 3.0), 1.0)
    return float(np.trapezoid(cn2 * weight, _H_GRID))


def calibrate_hv(
    r0_target_m: float = 0.10,
    theta0_target_rad: float = 10e-6,
    wavelength_m: float = 0.5e-6,
    label: str = "HV10-10",
) -> TurbulenceProfile:
    """Solve the two Hufnagel-Valley constants from zenith targets.

    Both defining integrals are linear in (wind_rms/27)^2 and in the
    ground strength, so the calibration is an exact 2x2 linear solve:
    the profile then meets r0(wavelength) and the isoplanatic angle at
    zenith by construction.
    """
    k = 2.0 * math.pi / wavelength_m
    i0_target = r0_target_m ** (-5.0 / 3.0) / (0.423 * k * k)
    i53_target = theta0_target_rad ** (-5.0 / 3.0) / (2.914 * k * k)

    # coefficients of w = (v/27)^2 and A in the two moments
    b0_w = 5.94e-53 * _gamma(11.0) * 1000.0**11
    b0_a = _gamma(1.0) * 100.0
    f0 = 2.7e-16 * _gamma(1.0) * 1500.0
    b53_w = 5.94e-53 * _gamma(11.0 + 5.0 / 3.0) * 1000.0 ** (11.0 + 5.0 / 3.0)
    b53_a = _gamma(1.0 + 5.0 / 3.0) * 100.0 ** (1.0 + 5.0 / 3.0)
    f53 = 2.7e-16 * _gamma(1.0 + 5.0 / 3.0) * 1500.0 ** (1.0 + 5.0 / 3.0)

    mat = np.array([[b0_w, b0_a], [b53_w, b53_a]])
    rhs = np.array([i0_target - f0, i53_target - f53])
    w, ground = np.linalg.solve(mat, rhs)
    if w <= 0.0 or ground < 0.0:
        raise TurbulenceError(
            f"targets r0={r0_target_m}, theta0={theta0_target_rad} are infeasible"
        )
    return TurbulenceProfile(ground_cn2=float(ground), wind_rms=27.0 * math.sqrt(w), label=label)


def hv_10_10() -> TurbulenceProfile:
    """Preset used for night-time stations with favourable seeing."""
    return calibrate_hv(0.10, 10e-6, 0.5e-6, label="HV10-10")

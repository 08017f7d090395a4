"""Optical channel efficiencies for downlink, uplink and inter-satellite
links: aperture collection with near-field correction, elevation-scaled
atmospheric transmission, adaptive-optics-corrected single-mode-fiber
coupling, and uplink beam wander/broadening under laser-guide-star
correction.

Losses are linear efficiencies in [0, 1]; use :func:`to_db` for the
-10 log10 convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .turbulence import (
    TurbulenceProfile,
    WindModel,
    cn2_moment,
    cone_integral,
    fried_parameter_m,
    greenwood_frequency_hz,
    tyler_frequency_hz,
)


def to_db(efficiency: float) -> float:
    """Loss in dB of a linear efficiency."""
    return -10.0 * math.log10(efficiency)


def from_db(loss_db: float) -> float:
    return 10.0 ** (-loss_db / 10.0)


@dataclass(frozen=True)
class OpticalTerminal:
    """Transmit/receive telescope parameters for one end of a link.

    ``tx_gain_efficiency`` scales the ideal uniform-aperture transmitter
    gain 4*pi*A/lambda^2 (a centrally-launched truncated Gaussian
    reaches about 0.81 of it). ``uplink_beam_waist_m`` applies only when
    the terminal transmits a Gaussian uplink beam.
    """

    aperture_diameter_m: float
    wavelength_m: float = 1550e-9
    optical_coupling: float = 0.81
    tx_gain_efficiency: float = 0.81
    uplink_beam_waist_m: float | None = None

    def __post_init__(self):
        if self.aperture_diameter_m <= 0:
            raise ValueError("aperture diameter must be positive")
        if not 0.0 < self.optical_coupling <= 1.0:
            raise ValueError("optical coupling must lie in (0, 1]")
        if not 0.0 < self.tx_gain_efficiency <= 1.0:
            raise ValueError("tx gain efficiency must lie in (0, 1]")

    @property
    def area_m2(self) -> float:
        return math.pi * self.aperture_diameter_m**2 / 4.0


@dataclass(frozen=True)
class AoConfig:
    """Adaptive-optics configuration for both link directions.

    The downlink fiber-coupling loop corrects radial orders up to
    ``n_max`` and rejects wind-driven temporal error up to
    ``dl_bandwidth_hz`` (a calibration constant; see the shipped
    calibration notes). The uplink laser-guide-star loop corrects
    ``z_max`` Zernike modes at ``bandwidth_hz`` with the guide star at
    ``lgs_altitude_km``; the residual tilt budget uses the remaining
    knobs.
    """

    n_max: int = 12
    z_max: int = 36
    bandwidth_hz: float = 50.0
    dl_bandwidth_hz: float = 10.48
    lgs_altitude_km: float = 18.0
    ul_beam_diameter_m: float | None = None  # default: 2 * waist
    tilt_sensing_diameter_m: float = 1.0
    tilt_bandwidth_hz: float | None = None   # default: bandwidth_hz
    centroid_error_factor: float = 0.1
    snr_error_factor: float = 0.1
    tilt_decorrelation_scale: float = 0.3
    short_term_spread_factor: float = 1.0

    def __post_init__(self):
        if self.n_max < 0 or self.z_max < 1:
            raise ValueError("n_max must be >= 0 and z_max >= 1")
        if self.bandwidth_hz <= 0 or self.dl_bandwidth_hz <= 0:
            raise ValueError("AO bandwidths must be positive")


@dataclass(frozen=True)
class ChannelSample:
    """Decomposed channel efficiency for one link at one instant.

    ``eta_smf`` already contains the optical coupling eta_0 on the
    downlink; the uplink and inter-satellite totals carry eta_0 as a
    separate factor.
    """

    eta_coll: float
    eta_atm: float = 1.0
    eta_smf: float = 1.0
    eta_bwb: float = 1.0
    eta_0: float = 1.0
    eta_total: float = 1.0
    g_tx: float = 1.0
    g_rx: float = 1.0
    eta_fs: float = 1.0
    eta_coll_ff: float = 1.0

    @property
    def loss_db(self) -> float:
        return to_db(self.eta_total)


# --- collection ---

def collection_efficiency(
    tx: OpticalTerminal, rx: OpticalTerminal, distance_km: float
) -> tuple[float, float]:
    """Aperture-to-aperture collection with the near-field correction.

    Far field: eta_ff = G_tx * eta_fs * G_rx with directive gains
    4*pi*A/lambda^2 and free-space factor (lambda/4*pi*L)^2.  The
    saturating 1 - exp(-eta_ff) form keeps the efficiency below one
    when the spot no longer dwarfs the receiver.
    """
    if distance_km <= 0:
        raise ValueError("link distance must be positive")
    lam = tx.wavelength_m
    dist_m = distance_km * 1e3
    g_tx = tx.tx_gain_efficiency * 4.0 * math.pi * tx.area_m2 / lam**2
    g_rx = 4.0 * math.pi * rx.area_m2 / lam**2
    eta_fs = (lam / (4.0 * math.pi * dist_m)) ** 2
    eta_ff = g_tx * g_rx * eta_fs
    return -math.expm1(-eta_ff), eta_ff


def gaussian_beam_radius_m(waist_m: float, wavelength_m: float, distance_km: float) -> float:
    """1/e^2 intensity radius of a Gaussian beam after ``distance_km``."""
    z_r = math.pi * waist_m**2 / wavelength_m
    return waist_m * math.sqrt(1.0 + (distance_km * 1e3 / z_r) ** 2)


def gaussian_collection_efficiency(beam_radius_m: float, rx_diameter_m: float) -> tuple[float, float]:
    """Collection of a centered Gaussian beam by a circular aperture.

    The far-field value D^2/(2 w^2) saturates through the same
    1 - exp(-x) law, which here is exact for the Gaussian profile.
    """
    eta_ff = rx_diameter_m**2 / (2.0 * beam_radius_m**2)
    return -math.expm1(-eta_ff), eta_ff


# --- atmosphere ---

def atmospheric_transmission(elevation_deg: float, eta_zenith: float) -> float:
    """Elevation-scaled clear-sky transmission eta_zen^(1/sin(theta))."""
    if not 0.0 < elevation_deg <= 90.0:
        raise ValueError(f"elevation {elevation_deg} outside (0, 90]")
    if not 0.0 < eta_zenith <= 1.0:
        raise ValueError("zenith transmission must lie in (0, 1]")
    return eta_zenith ** (1.0 / math.sin(math.radians(elevation_deg)))


# --- adaptive optics ---

_NOLL_ORDER_MAX = 400


def _noll_mode_coefficients(n_upto: int) -> np.ndarray:
    """Per-mode Kolmogorov Zernike variance coefficients for orders 1..n.

    Entry [n-1] multiplies (D/r0)^(5/3) to give the variance of one
    Zernike mode of radial order n. Normalized so the orders sum to the
    piston-removed total of 1.0299 (D/r0)^(5/3).
    """
    n = np.arange(1, n_upto + 1, dtype=float)
    shape = (n + 1.0) * np.exp(gammaln(n - 5.0 / 6.0) - gammaln(n + 23.0 / 6.0))
    norm = 1.0299 / float(np.sum((n + 1.0) * shape))
    return norm * shape


_NOLL_COEFF = _noll_mode_coefficients(_NOLL_ORDER_MAX)


def zernike_mode_variance(n: int, d_over_r0: float) -> float:
    """Variance of a single Zernike mode of radial order n >= 1."""
    if n < 1:
        raise ValueError("radial order must be >= 1 (piston carries no error)")
    if n > _NOLL_ORDER_MAX:
        return 0.0
    return float(_NOLL_COEFF[n - 1]) * d_over_r0 ** (5.0 / 3.0)


def noll_residual_variance(n_corrected: int, d_over_r0: float) -> float:
    """Total residual phase variance after correcting orders <= n_corrected."""
    n = np.arange(1, _NOLL_ORDER_MAX + 1, dtype=float)
    mask = n > n_corrected
    return float(np.sum((n[mask] + 1.0) * _NOLL_COEFF[mask])) * d_over_r0 ** (5.0 / 3.0)


def fitting_error_variance(z_modes: int, d_over_r0: float) -> float:
    """Residual variance after correcting ``z_modes`` Zernike modes
    (large-mode-count asymptote)."""
    return 0.2944 * z_modes ** (-math.sqrt(3.0) / 2.0) * d_over_r0 ** (5.0 / 3.0)


def ao_residual_coupling(
    aperture_m: float,
    r0_m: float,
    n_max: int,
    temporal_ratio: float = 0.0,
) -> float:
    """Single-mode-fiber coupling after modal AO correction.

    Product over uncorrected radial orders of 1/sqrt(1 + 2 var) per
    mode, times a Strehl-type temporal factor exp(-(f_G/f_c)^(5/3))
    expressed through ``temporal_ratio`` = f_G/f_c.
    """
    d_over_r0 = aperture_m / r0_m
    n = np.arange(1, _NOLL_ORDER_MAX + 1, dtype=float)
    var = _NOLL_COEFF * d_over_r0 ** (5.0 / 3.0)
    mask = n > n_max
    log_eta = -0.5 * float(np.sum((n[mask] + 1.0) * np.log1p(2.0 * var[mask])))
    if temporal_ratio > 0.0:
        log_eta -= temporal_ratio ** (5.0 / 3.0)
    return math.exp(log_eta)


def strehl(sigma2: float) -> float:
    """Strehl ratio S = exp(-sigma^2) of a wavefront with variance sigma^2."""
    if sigma2 < 0:
        raise ValueError("wavefront variance must be nonnegative")
    return math.exp(-sigma2)


# --- uplink beam wander / broadening ---

@dataclass(frozen=True)
class UplinkBreakdown:
    """Intermediate quantities of the uplink wander/broadening budget."""

    strehl: float
    w_diff_m: float
    w_st_m: float
    wander_var_m2: float
    eta_bw_diff: float
    eta_bw_st: float
    sigma2_fitting: float
    sigma2_temporal: float
    sigma2_cone: float


def uplink_bwb(
    elevation_deg: float,
    slant_range_km: float,
    los_rate_rad_s: float,
    tx: OpticalTerminal,
    profile: TurbulenceProfile,
    wind: WindModel,
    ao: AoConfig,
) -> tuple[float, UplinkBreakdown]:
    """Uplink efficiency from beam wander and broadening under LGS AO.

    eta = S * eta_bw_diff + (1 - S) (w_diff/w_st)^2 * eta_bw_st, with
    the Strehl ratio built from fitting, temporal and cone (focal
    anisoplanatism) errors, and the residual pointing wander from the
    four-term tilt budget (servo lag, centroid, tilt anisoplanatism,
    SNR).
    """
    if tx.uplink_beam_waist_m is None:
        raise ValueError("uplink transmitter needs a beam waist")
    lam = tx.wavelength_m
    waist = tx.uplink_beam_waist_m
    d_beam = ao.ul_beam_diameter_m or 2.0 * waist
    dist_m = slant_range_km * 1e3
    k = 2.0 * math.pi / lam

    r0 = fried_parameter_m(lam, elevation_deg, profile)
    airmass = 1.0 / math.sin(math.radians(elevation_deg))

    if not np.isfinite(r0) or cn2_moment(profile, 0.0) <= 0.0:
        w_diff = gaussian_beam_radius_m(waist, lam, slant_range_km)
        zero = UplinkBreakdown(1.0, w_diff, w_diff, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0)
        return 1.0, zero

    # higher-order wavefront budget -> Strehl
    sig_fit = fitting_error_variance(ao.z_max, d_beam / r0)
    f_g = greenwood_frequency_hz(lam, elevation_deg, profile, wind, los_rate_rad_s)
    sig_temp = (f_g / ao.bandwidth_hz) ** (5.0 / 3.0)
    sig_cone = 2.914 * k * k * airmass * cone_integral(profile, ao.lgs_altitude_km * 1e3) * d_beam ** (
        5.0 / 3.0
    )
    s = strehl(sig_fit + sig_temp + sig_cone)

    # beam widths at the receiver
    w_diff = gaussian_beam_radius_m(waist, lam, slant_range_km)
    spread_scale = 1.0 - 0.26 * min((r0 / waist) ** (1.0 / 3.0), 1.0)
    w_turb2 = (
        ao.short_term_spread_factor
        * 2.0
        * (lam * dist_m / (math.pi * r0)) ** 2
        * spread_scale**2
    )
    w_st = math.sqrt(w_diff**2 + w_turb2)

    # residual tilt budget (two-axis angular variances, rad^2); the
    # centroid/SNR/anisoplanatism terms scale with the turbulent tilt
    # itself and so vanish with it
    d_tilt = ao.tilt_sensing_diameter_m
    f_tilt = ao.tilt_bandwidth_hz or ao.bandwidth_hz
    var_tilt_full = 0.364 * (d_tilt / r0) ** (5.0 / 3.0) * (lam / d_tilt) ** 2
    f_t = tyler_frequency_hz(lam, elevation_deg, d_tilt, profile, wind, los_rate_rad_s)
    var_servo = 2.0 * (f_t / f_tilt) ** 2 * (lam / d_tilt) ** 2
    var_centroid = ao.centroid_error_factor * var_tilt_full
    var_snr = ao.snr_error_factor * var_tilt_full
    # tilt anisoplanatism: point-ahead offset vs tilt decorrelation angle
    mean_h2 = math.sqrt(cn2_moment(profile, 2.0) / max(cn2_moment(profile, 0.0), 1e-300))
    theta_pa = 2.0 * los_rate_rad_s * dist_m / 299792458.0
    theta_ta = ao.tilt_decorrelation_scale * d_tilt / max(mean_h2, 1e-12)
    var_aniso = min((theta_pa / theta_ta) ** 2, 1.0) * var_tilt_full

    wander_m2 = (var_servo + var_centroid + var_snr + var_aniso) * dist_m**2
    eta_bw_diff = math.exp(-wander_m2 / w_diff**2)
    eta_bw_st = math.exp(-wander_m2 / w_st**2)

    eta = s * eta_bw_diff + (1.0 - s) * (w_diff / w_st) ** 2 * eta_bw_st
    detail = UplinkBreakdown(
        s, w_diff, w_st, wander_m2, eta_bw_diff, eta_bw_st, sig_fit, sig_temp, sig_cone
    )
    return min(eta, 1.0), detail


# --- assembled channels ---

@dataclass(frozen=True)
class ChannelModel:
    """Scenario-level channel configuration shared by all links."""

    gs_terminal: OpticalTerminal
    sat_terminal: OpticalTerminal
    profile: TurbulenceProfile
    wind: WindModel = field(default_factory=WindModel)
    ao: AoConfig = field(default_factory=AoConfig)
    eta_atm_zenith: float = 0.878

    def downlink(self, elevation_deg: float, slant_range_km: float) -> ChannelSample:
        """Satellite-to-ground channel: collection * atmosphere * SMF."""
        eta_coll, eta_ff = collection_efficiency(
            self.sat_terminal, self.gs_terminal, slant_range_km
        )
        eta_atm = atmospheric_transmission(elevation_deg, self.eta_atm_zenith)
        lam = self.gs_terminal.wavelength_m
        r0 = fried_parameter_m(lam, elevation_deg, self.profile)
        f_g = greenwood_frequency_hz(lam, elevation_deg, self.profile, self.wind)
        eta_ao = ao_residual_coupling(
            self.gs_terminal.aperture_diameter_m,
            r0,
            self.ao.n_max,
            temporal_ratio=f_g / self.ao.dl_bandwidth_hz,
        )
        eta_smf = self.gs_terminal.optical_coupling * eta_ao
        lam_gain = 4.0 * math.pi / lam**2
        return ChannelSample(
            eta_coll=eta_coll,
            eta_atm=eta_atm,
            eta_smf=eta_smf,
            eta_0=self.gs_terminal.optical_coupling,
            eta_total=eta_coll * eta_atm * eta_smf,
            g_tx=self.sat_terminal.tx_gain_efficiency * lam_gain * self.sat_terminal.area_m2,
            g_rx=lam_gain * self.gs_terminal.area_m2,
            eta_fs=(lam / (4.0 * math.pi * slant_range_km * 1e3)) ** 2,
            eta_coll_ff=eta_ff,
        )

    def uplink(
        self, elevation_deg: float, slant_range_km: float, los_rate_rad_s: float
    ) -> ChannelSample:
        """Ground-to-satellite channel: collection * atmosphere * bwb * eta0."""
        lam = self.gs_terminal.wavelength_m
        w_diff = gaussian_beam_radius_m(
            self.gs_terminal.uplink_beam_waist_m or 0.15, lam, slant_range_km
        )
        eta_coll, eta_ff = gaussian_collection_efficiency(
            w_diff, self.sat_terminal.aperture_diameter_m
        )
        eta_atm = atmospheric_transmission(elevation_deg, self.eta_atm_zenith)
        eta_bwb, _ = uplink_bwb(
            elevation_deg,
            slant_range_km,
            los_rate_rad_s,
            self.gs_terminal,
            self.profile,
            self.wind,
            self.ao,
        )
        eta0 = self.sat_terminal.optical_coupling
        return ChannelSample(
            eta_coll=eta_coll,
            eta_atm=eta_atm,
            eta_bwb=eta_bwb,
            eta_0=eta0,
            eta_total=eta_coll * eta_atm * eta_bwb * eta0,
            eta_fs=(lam / (4.0 * math.pi * slant_range_km * 1e3)) ** 2,
            eta_coll_ff=eta_ff,
        )

    def intersat(self, distance_km: float) -> ChannelSample:
        """Satellite-to-satellite channel: collection * eta0 only."""
        eta_coll, eta_ff = collection_efficiency(
            self.sat_terminal, self.sat_terminal, distance_km
        )
        eta0 = self.sat_terminal.optical_coupling
        lam = self.sat_terminal.wavelength_m
        lam_gain = 4.0 * math.pi / lam**2
        return ChannelSample(
            eta_coll=eta_coll,
            eta_0=eta0,
            eta_total=eta_coll * eta0,
            g_tx=self.sat_terminal.tx_gain_efficiency * lam_gain * self.sat_terminal.area_m2,
            g_rx=lam_gain * self.sat_terminal.area_m2,
            eta_fs=(lam / (4.0 * math.pi * distance_km * 1e3)) ** 2,
            eta_coll_ff=eta_ff,
        )

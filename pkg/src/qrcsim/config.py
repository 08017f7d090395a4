"""Scenario configuration: YAML schema, strict validation and the
shipped default tables.

Keys carry explicit unit suffixes (_km, _deg, _ms, _hz).  Unknown keys
are hard errors with the full section path; missing keys fall back to
the defaults below, and every applied default is recorded in the run
log with the table it came from.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import yaml

from .channel import AoConfig, ChannelModel, OpticalTerminal
from .engine import ConstellationSpec, Scenario
from .orbit import EpochClock, GroundStation, KeplerElements
from .swap import DeviceParams, MemoryParams
from .turbulence import TurbulenceProfile, WindModel, calibrate_hv

log = logging.getLogger("qrcsim.config")


class ConfigError(ValueError):
    """Configuration file problem, with the offending section path."""


# (value, table) pairs; table names show up in the provenance log
_LINK_TABLE = "communication-link defaults"
_REPEATER_TABLE = "quantum-repeater defaults"
_ORBIT_TABLE = "orbit defaults"
_CALIBRATION_TABLE = "channel-calibration defaults (see calibration module)"

DEFAULTS: dict[str, dict] = {
    "scenario": {
        "architecture": ("DL", _ORBIT_TABLE),
        "theta_min_deg": (20.0, _LINK_TABLE),
        "t_start_s": (-900.0, _ORBIT_TABLE),
        "t_end_s": (900.0, _ORBIT_TABLE),
        "dt_s": (1.0, _ORBIT_TABLE),
        "night_only": (False, _ORBIT_TABLE),
        "night_threshold_deg": (-6.0, _ORBIT_TABLE),
        "grazing_altitude_km": (20.0, _LINK_TABLE),
        "eta_atm_zenith": (0.878, _CALIBRATION_TABLE),
        "cutoff_objective": ("secure", _REPEATER_TABLE),
    },
    "epoch": {
        "initial_utc": ("2020-01-01T02:00:00Z", _ORBIT_TABLE),
    },
    "stations": {
        "alice": ({"name": "New York City", "lat_deg": 40.7128, "lon_deg": -74.0060}, _ORBIT_TABLE),
        "bob": ({"name": "Berlin", "lat_deg": 52.5200, "lon_deg": 13.4050}, _ORBIT_TABLE),
    },
    "constellation": {
        "kind": ("aligned", _ORBIT_TABLE),
        "altitude_km": (500.0, _ORBIT_TABLE),
        "separation_ratio": (1.0, _ORBIT_TABLE),
        "alignment_t_s": (0.0, _ORBIT_TABLE),
        "raan_offset_deg": (0.0, _ORBIT_TABLE),
        "elements": (None, _ORBIT_TABLE),
    },
    "terminals": {
        "ground": (
            {
                "aperture_diameter_m": 1.0,
                "wavelength_m": 1.55e-6,
                "optical_coupling": 0.81,
                "tx_gain_efficiency": 0.81,
                "uplink_beam_waist_m": 0.15,
            },
            _LINK_TABLE,
        ),
        "satellite": (
            {
                "aperture_diameter_m": 0.5,
                "wavelength_m": 1.55e-6,
                "optical_coupling": 0.81,
                "tx_gain_efficiency": 0.81,
            },
            _LINK_TABLE,
        ),
    },
    "turbulence": {
        "preset": ("HV10-10", _LINK_TABLE),
        "r0_target_m": (0.10, _LINK_TABLE),
        "isoplanatic_target_rad": (10e-6, _LINK_TABLE),
        "ground_cn2": (None, _LINK_TABLE),
        "wind_rms_m_s": (None, _LINK_TABLE),
    },
    "wind": {
        "v_ground_m_s": (5.0, _LINK_TABLE),
        "v_tropopause_m_s": (20.0, _LINK_TABLE),
        "h_peak_km": (9.4, _LINK_TABLE),
        "h_scale_km": (4.8, _LINK_TABLE),
    },
    "ao": {
        "n_max": (12, _LINK_TABLE),
        "z_max": (36, _LINK_TABLE),
        "bandwidth_hz": (50.0, _LINK_TABLE),
        "dl_bandwidth_hz": (10.48, _CALIBRATION_TABLE),
        "lgs_altitude_km": (18.0, _LINK_TABLE),
        "tilt_sensing_diameter_m": (1.0, _LINK_TABLE),
        "centroid_error_factor": (0.1, _CALIBRATION_TABLE),
        "snr_error_factor": (0.1, _CALIBRATION_TABLE),
        "tilt_decorrelation_scale": (0.3, _CALIBRATION_TABLE),
    },
    "devices": {
        "source_efficiency": (0.2, _REPEATER_TABLE),
        "detector_efficiency": (0.95, _REPEATER_TABLE),
        "qnd_efficiency": (0.8, _REPEATER_TABLE),
        "bsm_efficiency": (0.5, _REPEATER_TABLE),
        "repetition_rate_hz": (90e6, _REPEATER_TABLE),
    },
    "memory": {
        "decay_time_ms": (100.0, _REPEATER_TABLE),
        "coherence_time_ms": (60.0, _REPEATER_TABLE),
        "coupling_efficiency": (0.1, _REPEATER_TABLE),
        "flip_fidelity": (1.0, _REPEATER_TABLE),
    },
    "sweep": {
        "altitudes_km": ([500.0, 600.0, 700.0, 800.0, 900.0, 1000.0], _ORBIT_TABLE),
        "ratios": ([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0], _ORBIT_TABLE),
    },
    "annual": {
        "days": (365.0, _ORBIT_TABLE),
        "coarse_dt_s": (10.0, _ORBIT_TABLE),
        "integration_step_s": (2.0, _ORBIT_TABLE),
    },
    "swap_bench": {
        "n_bins": (10_000_000, _REPEATER_TABLE),
        "seed": (1, _REPEATER_TABLE),
        "eta_values": ([1e-3, 3.2e-3, 1e-2, 3.2e-2, 1e-1], _REPEATER_TABLE),
        "d_rt_bins": ([0, 1000, 10000], _REPEATER_TABLE),
        "d_cut_bins": (3000, _REPEATER_TABLE),
    },
}

_ELEMENT_KEYS = {"a_km", "e", "inc_deg", "raan_deg", "argp_deg", "true_anomaly_deg"}
_RANGES: dict[str, tuple[float, float]] = {
    "stations.alice.lat_deg": (-90.0, 90.0),
    "stations.bob.lat_deg": (-90.0, 90.0),
    "stations.alice.lon_deg": (-180.0, 180.0),
    "stations.bob.lon_deg": (-180.0, 180.0),
    "scenario.theta_min_deg": (1e-9, 90.0),
    "scenario.eta_atm_zenith": (1e-12, 1.0),
    "constellation.separation_ratio": (1e-9, 2.0),
    "constellation.altitude_km": (100.0, 50000.0),
    "memory.coupling_efficiency": (0.0, 1.0),
    "memory.flip_fidelity": (0.0, 1.0),
    "devices.source_efficiency": (0.0, 1.0),
    "devices.detector_efficiency": (0.0, 1.0),
    "devices.qnd_efficiency": (0.0, 1.0),
    "devices.bsm_efficiency": (0.0, 1.0),
}


@dataclass
class RunConfig:
    """Fully resolved configuration: the Scenario plus mode payloads."""

    scenario: Scenario
    sweep_altitudes_km: list[float]
    sweep_ratios: list[float]
    annual_days: float
    annual_coarse_dt_s: float
    annual_integration_step_s: float
    bench_n_bins: int
    bench_seed: int
    bench_eta_values: list[float]
    bench_d_rt_bins: list[int]
    bench_d_cut: int
    resolved: dict


def _require_mapping(value, path: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(value).__name__}")
    return value


def _resolve_section(raw: dict, section: str) -> dict:
    """Merge one section with its defaults, logging every fallback."""
    table = DEFAULTS[section]
    given = _require_mapping(raw.get(section), section)
    unknown = set(given) - set(table)
    if unknown:
        raise ConfigError(f"{section}: unknown key(s) {sorted(unknown)}")
    out = {}
    for key, (default, origin) in table.items():
        if key in given:
            out[key] = given[key]
        else:
            out[key] = default
            if default is not None:
                log.info("[default] %s.%s = %r (%s)", section, key, default, origin)
    return out


def _check_number(value, path: str, allow_inf: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        if isinstance(value, str) and allow_inf and value.lower() in ("inf", "infinity"):
            return math.inf
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    value = float(value)
    if math.isnan(value):
        raise ConfigError(f"{path}: NaN is not a valid value")
    if math.isinf(value) and not allow_inf:
        raise ConfigError(f"{path}: infinite value not allowed here")
    lo, hi = _RANGES.get(path, (-math.inf, math.inf))
    if not lo <= value <= hi:
        raise ConfigError(f"{path}: value {value} outside [{lo}, {hi}]")
    return value


def _station(raw: dict, path: str) -> GroundStation:
    raw = _require_mapping(raw, path)
    unknown = set(raw) - {"name", "lat_deg", "lon_deg"}
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")
    try:
        return GroundStation(
            name=str(raw.get("name", path.rsplit(".", 1)[-1])),
            lat_deg=_check_number(raw["lat_deg"], f"{path}.lat_deg"),
            lon_deg=_check_number(raw["lon_deg"], f"{path}.lon_deg"),
        )
    except KeyError as exc:
        raise ConfigError(f"{path}: missing required key {exc.args[0]!r}") from None


def _elements(raw, path: str) -> tuple[KeplerElements, ...]:
    if not isinstance(raw, list) or len(raw) != 3:
        raise ConfigError(f"{path}: expected a list of exactly 3 element mappings")
    out = []
    for i, entry in enumerate(raw):
        entry = _require_mapping(entry, f"{path}[{i}]")
        unknown = set(entry) - _ELEMENT_KEYS
        if unknown:
            raise ConfigError(f"{path}[{i}]: unknown key(s) {sorted(unknown)}")
        missing = _ELEMENT_KEYS - set(entry)
        if missing:
            raise ConfigError(f"{path}[{i}]: missing key(s) {sorted(missing)}")
        values = {k: _check_number(v, f"{path}[{i}].{k}") for k, v in entry.items()}
        if not 0.0 <= values["e"] < 1.0:
            raise ConfigError(f"{path}[{i}].e: eccentricity {values['e']} outside [0, 1)")
        out.append(KeplerElements(**values))
    return tuple(out)


def _parse_epoch(text, path: str) -> datetime:
    if isinstance(text, datetime):
        dt = text
    else:
        try:
            dt = datetime.fromisoformat(str(text).replace("Z", "+00:00"))
        except ValueError:
            raise ConfigError(f"{path}: invalid ISO date-time {text!r}") from None
    return dt if dt.tzinfo else dt.replace(tzinfo=timezone.utc)


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a scenario file into a ready-to-run bundle."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML syntax error: {exc}") from exc
    return parse_scenario_dict(raw, source=str(path))


def parse_scenario_dict(raw, source: str = "<dict>") -> RunConfig:
    raw = _require_mapping(raw, "top level")
    if not raw:
        required = ", ".join(DEFAULTS)
        raise ConfigError(
            f"{source}: empty configuration; provide at least an empty mapping with "
            f"any of the sections: {required}"
        )
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"{source}: unknown section(s) {sorted(unknown)}")

    sc = _resolve_section(raw, "scenario")
    epoch = _resolve_section(raw, "epoch")
    stations_raw = _require_mapping(raw.get("stations"), "stations")
    unknown = set(stations_raw) - {"alice", "bob"}
    if unknown:
        raise ConfigError(f"stations: unknown key(s) {sorted(unknown)}")
    const = _resolve_section(raw, "constellation")
    terms = _resolve_section(raw, "terminals")
    turb = _resolve_section(raw, "turbulence")
    wind = _resolve_section(raw, "wind")
    ao = _resolve_section(raw, "ao")
    dev = _resolve_section(raw, "devices")
    sweep_cfg = _resolve_section(raw, "sweep")
    annual_cfg = _resolve_section(raw, "annual")
    bench_cfg = _resolve_section(raw, "swap_bench")

    memory_raw = _require_mapping(raw.get("memory"), "memory")
    unknown = set(memory_raw) - (set(DEFAULTS["memory"]) | {"a", "b"})
    if unknown:
        raise ConfigError(f"memory: unknown key(s) {sorted(unknown)}")

    def memory_params(sub: dict, path: str) -> MemoryParams:
        merged = {k: v for k, (v, _) in DEFAULTS["memory"].items()}
        shared = {k: v for k, v in memory_raw.items() if k not in ("a", "b")}
        merged.update(shared)
        merged.update(_require_mapping(sub, path))
        unknown = set(merged) - set(DEFAULTS["memory"])
        if unknown:
            raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")
        return MemoryParams(
            decay_time_s=_check_number(merged["decay_time_ms"], f"{path}.decay_time_ms", True) / 1e3,
            coherence_time_s=_check_number(merged["coherence_time_ms"], f"{path}.coherence_time_ms", True) / 1e3,
            coupling_efficiency=_check_number(merged["coupling_efficiency"], "memory.coupling_efficiency"),
            flip_fidelity=_check_number(merged["flip_fidelity"], "memory.flip_fidelity"),
        )

    mem_a = memory_params(memory_raw.get("a"), "memory.a")
    mem_b = memory_params(memory_raw.get("b"), "memory.b")

    if "alice" in stations_raw:
        station_a = _station(stations_raw["alice"], "stations.alice")
    else:
        station_a = GroundStation(**DEFAULTS["stations"]["alice"][0])
        log.info("[default] stations.alice = %s (%s)", station_a.name, _ORBIT_TABLE)
    if "bob" in stations_raw:
        station_b = _station(stations_raw["bob"], "stations.bob")
    else:
        station_b = GroundStation(**DEFAULTS["stations"]["bob"][0])
        log.info("[default] stations.bob = %s (%s)", station_b.name, _ORBIT_TABLE)

    clock = EpochClock(_parse_epoch(epoch["initial_utc"], "epoch.initial_utc"))

    def terminal(spec_raw, defaults: dict, path: str) -> OpticalTerminal:
        merged = dict(defaults)
        merged.update(_require_mapping(spec_raw, path))
        unknown = set(merged) - {
            "aperture_diameter_m",
            "wavelength_m",
            "optical_coupling",
            "tx_gain_efficiency",
            "uplink_beam_waist_m",
        }
        if unknown:
            raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")
        kwargs = {k: _check_number(v, f"{path}.{k}") for k, v in merged.items() if v is not None}
        return OpticalTerminal(**kwargs)

    gs_term = terminal(terms["ground"], DEFAULTS["terminals"]["ground"][0], "terminals.ground")
    sat_term = terminal(terms["satellite"], DEFAULTS["terminals"]["satellite"][0], "terminals.satellite")

    if turb["ground_cn2"] is not None and turb["wind_rms_m_s"] is not None:
        profile = TurbulenceProfile(
            ground_cn2=_check_number(turb["ground_cn2"], "turbulence.ground_cn2"),
            wind_rms=_check_number(turb["wind_rms_m_s"], "turbulence.wind_rms_m_s"),
            label="custom",
        )
    else:
        profile = calibrate_hv(
            r0_target_m=_check_number(turb["r0_target_m"], "turbulence.r0_target_m"),
            theta0_target_rad=_check_number(
                turb["isoplanatic_target_rad"], "turbulence.isoplanatic_target_rad"
            ),
            label=str(turb["preset"]),
        )

    wind_model = WindModel(
        v_ground=_check_number(wind["v_ground_m_s"], "wind.v_ground_m_s"),
        v_tropopause_peak=_check_number(wind["v_tropopause_m_s"], "wind.v_tropopause_m_s"),
        h_peak_m=_check_number(wind["h_peak_km"], "wind.h_peak_km") * 1e3,
        h_scale_m=_check_number(wind["h_scale_km"], "wind.h_scale_km") * 1e3,
    )
    ao_cfg = AoConfig(
        n_max=int(_check_number(ao["n_max"], "ao.n_max")),
        z_max=int(_check_number(ao["z_max"], "ao.z_max")),
        bandwidth_hz=_check_number(ao["bandwidth_hz"], "ao.bandwidth_hz"),
        dl_bandwidth_hz=_check_number(ao["dl_bandwidth_hz"], "ao.dl_bandwidth_hz"),
        lgs_altitude_km=_check_number(ao["lgs_altitude_km"], "ao.lgs_altitude_km"),
        tilt_sensing_diameter_m=_check_number(
            ao["tilt_sensing_diameter_m"], "ao.tilt_sensing_diameter_m"
        ),
        centroid_error_factor=_check_number(ao["centroid_error_factor"], "ao.centroid_error_factor"),
        snr_error_factor=_check_number(ao["snr_error_factor"], "ao.snr_error_factor"),
        tilt_decorrelation_scale=_check_number(
            ao["tilt_decorrelation_scale"], "ao.tilt_decorrelation_scale"
        ),
    )
    channel = ChannelModel(
        gs_terminal=gs_term,
        sat_terminal=sat_term,
        profile=profile,
        wind=wind_model,
        ao=ao_cfg,
        eta_atm_zenith=_check_number(sc["eta_atm_zenith"], "scenario.eta_atm_zenith"),
    )
    devices = DeviceParams(
        source_efficiency=_check_number(dev["source_efficiency"], "devices.source_efficiency"),
        detector_efficiency=_check_number(dev["detector_efficiency"], "devices.detector_efficiency"),
        qnd_efficiency=_check_number(dev["qnd_efficiency"], "devices.qnd_efficiency"),
        bsm_efficiency=_check_number(dev["bsm_efficiency"], "devices.bsm_efficiency"),
        repetition_rate_hz=_check_number(dev["repetition_rate_hz"], "devices.repetition_rate_hz"),
    )

    kind = str(const["kind"])
    if kind not in ("aligned", "sso", "explicit"):
        raise ConfigError(f"constellation.kind: {kind!r} is not one of aligned|sso|explicit")
    elements = ()
    if kind == "explicit":
        if const["elements"] is None:
            raise ConfigError("constellation.elements: required for kind=explicit")
        elements = _elements(const["elements"], "constellation.elements")
    constellation = ConstellationSpec(
        kind=kind,
        altitude_km=_check_number(const["altitude_km"], "constellation.altitude_km"),
        separation_ratio=_check_number(const["separation_ratio"], "constellation.separation_ratio"),
        alignment_t_s=_check_number(const["alignment_t_s"], "constellation.alignment_t_s"),
        raan_offset_deg=_check_number(const["raan_offset_deg"], "constellation.raan_offset_deg"),
        elements=elements,
    )

    architecture = str(sc["architecture"]).upper()
    if architecture not in ("DL", "UL"):
        raise ConfigError(f"scenario.architecture: {sc['architecture']!r} is not DL or UL")
    objective = str(sc["cutoff_objective"])
    if objective not in ("secure", "correct", "successful"):
        raise ConfigError(
            f"scenario.cutoff_objective: {objective!r} is not secure|correct|successful"
        )

    scenario = Scenario(
        station_a=station_a,
        station_b=station_b,
        clock=clock,
        constellation=constellation,
        channel=channel,
        devices=devices,
        memory_a=mem_a,
        memory_b=mem_b,
        architecture=architecture,
        theta_min_deg=_check_number(sc["theta_min_deg"], "scenario.theta_min_deg"),
        grazing_altitude_km=_check_number(sc["grazing_altitude_km"], "scenario.grazing_altitude_km"),
        t_start_s=_check_number(sc["t_start_s"], "scenario.t_start_s"),
        t_end_s=_check_number(sc["t_end_s"], "scenario.t_end_s"),
        dt_s=_check_number(sc["dt_s"], "scenario.dt_s"),
        night_only=bool(sc["night_only"]),
        night_threshold_deg=_check_number(sc["night_threshold_deg"], "scenario.night_threshold_deg"),
        cutoff_objective=objective,
    )

    resolved = {
        "scenario": sc,
        "epoch": {"initial_utc": clock.initial_utc.isoformat()},
        "stations": {
            "alice": {"name": station_a.name, "lat_deg": station_a.lat_deg, "lon_deg": station_a.lon_deg},
            "bob": {"name": station_b.name, "lat_deg": station_b.lat_deg, "lon_deg": station_b.lon_deg},
        },
        "constellation": const,
        "terminals": terms,
        "turbulence": {
            "label": profile.label,
            "ground_cn2": profile.ground_cn2,
            "wind_rms_m_s": profile.wind_rms,
        },
        "wind": wind,
        "ao": ao,
        "devices": dev,
        "memory": {
            "a": {
                "decay_time_ms": mem_a.decay_time_s * 1e3,
                "coherence_time_ms": mem_a.coherence_time_s * 1e3,
                "coupling_efficiency": mem_a.coupling_efficiency,
                "flip_fidelity": mem_a.flip_fidelity,
            },
            "b": {
                "decay_time_ms": mem_b.decay_time_s * 1e3,
                "coherence_time_ms": mem_b.coherence_time_s * 1e3,
                "coupling_efficiency": mem_b.coupling_efficiency,
                "flip_fidelity": mem_b.flip_fidelity,
            },
        },
    }

    return RunConfig(
        scenario=scenario,
        sweep_altitudes_km=[float(v) for v in sweep_cfg["altitudes_km"]],
        sweep_ratios=[float(v) for v in sweep_cfg["ratios"]],
        annual_days=_check_number(annual_cfg["days"], "annual.days"),
        annual_coarse_dt_s=_check_number(annual_cfg["coarse_dt_s"], "annual.coarse_dt_s"),
        annual_integration_step_s=_check_number(
            annual_cfg["integration_step_s"], "annual.integration_step_s"
        ),
        bench_n_bins=int(_check_number(bench_cfg["n_bins"], "swap_bench.n_bins")),
        bench_seed=int(_check_number(bench_cfg["seed"], "swap_bench.seed")),
        bench_eta_values=[float(v) for v in bench_cfg["eta_values"]],
        bench_d_rt_bins=[int(v) for v in bench_cfg["d_rt_bins"]],
        bench_d_cut=int(_check_number(bench_cfg["d_cut_bins"], "swap_bench.d_cut_bins")),
        resolved=resolved,
    )

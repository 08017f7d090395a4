import math
from pathlib import Path

import numpy as np
import pytest
import yaml

from qrcsim.cli import main
from qrcsim.config import ConfigError, load_config, parse_scenario_dict
from qrcsim.engine import simulate_pass
from qrcsim.report import (
    TIMESERIES_COLUMNS,
    emit_pass_summary,
    emit_timeseries,
    parse_timeseries,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


class TestParsing:
    def test_shipped_ic_downlink_defaults(self):
        cfg = load_config(CONFIG_DIR / "ic_downlink_zenith.yaml")
        sc = cfg.scenario
        assert sc.theta_min_deg == 20.0
        assert sc.devices.repetition_rate_hz == 90e6
        assert sc.memory_a.decay_time_s == pytest.approx(0.100)
        assert sc.memory_a.coherence_time_s == pytest.approx(0.060)
        assert sc.memory_a.coupling_efficiency == 0.1
        assert sc.devices.source_efficiency == 0.2
        assert sc.devices.detector_efficiency == 0.95
        assert sc.devices.qnd_efficiency == 0.8
        assert sc.devices.bsm_efficiency == 0.5
        assert sc.channel.gs_terminal.aperture_diameter_m == 1.0
        assert sc.channel.sat_terminal.aperture_diameter_m == 0.5
        assert sc.channel.gs_terminal.wavelength_m == pytest.approx(1.55e-6)
        assert sc.architecture == "DL"
        assert sc.station_a.name == "New York City"

    def test_all_shipped_configs_parse(self):
        for path in sorted(CONFIG_DIR.glob("*.yaml")):
            cfg = load_config(path)
            assert cfg.scenario.dt_s > 0

    def test_empty_file_lists_sections(self, tmp_path):
        empty = tmp_path / "empty.yaml"
        empty.write_text("")
        with pytest.raises(ConfigError, match="scenario"):
            load_config(empty)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_scenario_dict({"scenario": {"theta_min": 20.0}})

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown section"):
            parse_scenario_dict({"scnario": {}})

    def test_eccentricity_range_error_names_field(self):
        raw = {
            "constellation": {
                "kind": "explicit",
                "elements": [
                    {"a_km": 6878.0, "e": 1.5, "inc_deg": 0, "raan_deg": 0,
                     "argp_deg": 0, "true_anomaly_deg": 0}
                ] * 3,
            }
        }
        with pytest.raises(ConfigError, match=r"elements\[0\].e"):
            parse_scenario_dict(raw)

    def test_latitude_range_error(self):
        raw = {"stations": {"alice": {"lat_deg": 95.0, "lon_deg": 0.0}}}
        with pytest.raises(ConfigError, match="lat_deg"):
            parse_scenario_dict(raw)

    def test_memory_inf_accepted(self):
        cfg = parse_scenario_dict(
            {"scenario": {}, "memory": {"decay_time_ms": "inf", "a": {}, "b": {}}}
        )
        assert math.isinf(cfg.scenario.memory_a.decay_time_s)

    def test_per_memory_overrides(self):
        cfg = parse_scenario_dict(
            {"scenario": {}, "memory": {"a": {"coupling_efficiency": 0.2}}}
        )
        assert cfg.scenario.memory_a.coupling_efficiency == 0.2
        assert cfg.scenario.memory_b.coupling_efficiency == 0.1

    def test_defaults_logged_with_table(self, caplog):
        import logging

        with caplog.at_level(logging.INFO, logger="qrcsim.config"):
            parse_scenario_dict({"scenario": {}})
        assert any("quantum-repeater defaults" in r.message for r in caplog.records)
        assert any("[default]" in r.message for r in caplog.records)


@pytest.fixture(scope="module")
def short_result(clock, channel_model):
    from tests.conftest import make_scenario

    sc = make_scenario(clock, channel_model, t_start_s=-30.0, t_end_s=30.0)
    return simulate_pass(sc)


class TestTimeseries:

    def test_column_contract(self, short_result, tmp_path):
        path = emit_timeseries(short_result, tmp_path / "ts.csv")
        header = path.read_text().splitlines()[0]
        assert header == ",".join(TIMESERIES_COLUMNS)

    def test_round_trip_preserves_values(self, short_result, tmp_path):
        path = emit_timeseries(short_result, tmp_path / "ts.csv")
        data = parse_timeseries(path)
        steps = short_result.steps
        assert np.allclose(data["t_s"], [s.t_s for s in steps], rtol=1e-12)
        assert np.allclose(data["r_sec_hz"], [s.rates_hz.secure for s in steps], rtol=1e-12)
        assert np.allclose(data["eta_A"], [s.eta_a for s in steps], rtol=1e-12)
        total = float(np.sum(data["r_sec_hz"])) * short_result.dt_s
        assert total == pytest.approx(short_result.total("secure"), rel=1e-12)

    def test_deterministic_bytes(self, short_result, tmp_path):
        a = emit_timeseries(short_result, tmp_path / "a.csv").read_bytes()
        b = emit_timeseries(short_result, tmp_path / "b.csv").read_bytes()
        assert a == b

    def test_summary_has_invariants(self, short_result, tmp_path):
        path = emit_pass_summary(short_result, tmp_path / "s.txt", {"scenario": {"x": 1}})
        text = path.read_text()
        assert "peak_secure_hz" in text and "[resolved configuration]" in text


class TestCli:
    def test_pass_mode_end_to_end(self, tmp_path):
        rc = main(
            [
                "--mode", "pass",
                "--config", str(CONFIG_DIR / "ic_downlink_zenith.yaml"),
                "--out-dir", str(tmp_path),
                "--step-s", "5.0",
            ]
        )
        assert rc == 0
        assert (tmp_path / "timeseries.csv").exists()
        assert (tmp_path / "pass_summary.txt").exists()
        assert (tmp_path / "pass_rates.png").exists()

    def test_no_figures_flag(self, tmp_path):
        rc = main(
            [
                "--mode", "pass",
                "--config", str(CONFIG_DIR / "eu_downlink_zenith.yaml"),
                "--out-dir", str(tmp_path),
                "--step-s", "5.0",
                "--no-figures",
            ]
        )
        assert rc == 0
        assert not list(tmp_path.glob("*.png"))

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("scenario: {theta_min_deg: 200.0}\n")
        assert main(["--mode", "pass", "--config", str(bad), "--out-dir", str(tmp_path)]) == 1

    def test_missing_file_exit_code(self, tmp_path):
        rc = main(["--mode", "pass", "--config", str(tmp_path / "nope.yaml"), "--out-dir", str(tmp_path)])
        assert rc == 1

    def test_runtime_error_exit_code(self, tmp_path):
        # valid config, but the explicit orbit impacts the Earth during the window
        bad = tmp_path / "impact.yaml"
        bad.write_text(
            yaml.safe_dump(
                {
                    # perigee dips below the surface ~1250 s into the window
                    "scenario": {"t_start_s": -100.0, "t_end_s": 1500.0},
                    "constellation": {
                        "kind": "explicit",
                        "elements": [
                            {"a_km": 6478.0, "e": 0.03, "inc_deg": 50.0, "raan_deg": 0.0,
                             "argp_deg": 0.0, "true_anomaly_deg": 270.0}
                        ] * 3,
                    },
                }
            )
        )
        assert main(["--mode", "pass", "--config", str(bad), "--out-dir", str(tmp_path)]) == 2

    def test_sweep_mode_small_grid(self, tmp_path):
        cfg = tmp_path / "sweep.yaml"
        cfg.write_text(
            yaml.safe_dump(
                {
                    "scenario": {"t_start_s": -400.0, "t_end_s": 400.0},
                    "sweep": {"altitudes_km": [500.0], "ratios": [0.95, 1.0]},
                }
            )
        )
        rc = main(["--mode", "sweep", "--config", str(cfg), "--out-dir", str(tmp_path)])
        assert rc == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert len(lines) == 3
        assert (tmp_path / "sweep_secure.png").exists()

    def test_annual_mode_short_range(self, tmp_path):
        cfg = tmp_path / "annual.yaml"
        cfg.write_text(yaml.safe_dump({"scenario": {}, "annual": {"days": 1.2}}))
        rc = main(["--mode", "annual", "--config", str(cfg), "--out-dir", str(tmp_path), "--no-figures"])
        assert rc == 0
        report = (tmp_path / "campaign_report.txt").read_text()
        assert "total_secure" in report
        assert (tmp_path / "passes.csv").exists()

    def test_swap_bench_mode_and_determinism(self, tmp_path):
        cfg = tmp_path / "bench.yaml"
        cfg.write_text(
            yaml.safe_dump(
                {
                    "scenario": {},
                    "swap_bench": {
                        "n_bins": 200000,
                        "eta_values": [0.01, 0.05],
                        "d_rt_bins": [0, 100],
                        "d_cut_bins": 500,
                    },
                }
            )
        )
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["--mode", "swap-bench", "--config", str(cfg), "--out-dir", str(out1),
                     "--seed", "7", "--no-figures"]) == 0
        assert main(["--mode", "swap-bench", "--config", str(cfg), "--out-dir", str(out2),
                     "--seed", "7", "--no-figures"]) == 0
        assert (out1 / "swap_bench.csv").read_bytes() == (out2 / "swap_bench.csv").read_bytes()
        header = (out1 / "swap_bench.csv").read_text().splitlines()
        assert len(header) == 1 + 2 * 2 * 2

    def test_night_only_override(self, tmp_path):
        cfg = CONFIG_DIR / "ic_downlink_zenith.yaml"
        rc = main(["--mode", "pass", "--config", str(cfg), "--out-dir", str(tmp_path),
                   "--step-s", "10.0", "--night-only", "--no-figures"])
        assert rc == 0
        # the reference pass is at night, so totals stay positive
        text = (tmp_path / "pass_summary.txt").read_text()
        total = float([l for l in text.splitlines() if l.startswith("total_secure")][0].split("=")[1])
        assert total > 0

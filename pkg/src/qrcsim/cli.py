"""Command-line entry point.

Four run modes: a single pass around the alignment epoch, an
altitude/separation sweep, a long-duration (annual) campaign, and the
analytic-vs-Monte-Carlo swap benchmark.  Each mode writes delimited
output plus rendered figures into the output directory.

Exit codes: 0 success, 1 configuration error, 2 runtime/model error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .engine import annual_campaign, longitude_offset_scan, simulate_pass, sweep
from .mc import OracleConfig, run_oracle
from .report import (
    bench_cell,
    emit_bench,
    emit_pass_summary,
    emit_report,
    emit_sweep,
    emit_timeseries,
    render_bench_figure,
    render_campaign_figure,
    render_pass_figures,
    render_sweep_figure,
)
from .swap import LinkState, MemoryParams, bsm_rates

log = logging.getLogger("qrcsim")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrcsim",
        description="Three-satellite quantum-repeater constellation simulator",
    )
    parser.add_argument(
        "--mode",
        required=True,
        choices=("pass", "sweep", "annual", "swap-bench"),
        help="what to run",
    )
    parser.add_argument("--config", required=True, help="scenario configuration file (YAML)")
    parser.add_argument("--out-dir", default=".", help="directory for results")
    parser.add_argument("--step-s", type=float, default=None, help="override scenario.dt_s")
    parser.add_argument("--seed", type=int, default=None, help="override swap-bench RNG seed")
    parser.add_argument(
        "--night-only", action="store_true", help="force night-only gating regardless of config"
    )
    parser.add_argument(
        "--no-figures", action="store_true", help="skip figure rendering, keep delimited output"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    scenario = cfg.scenario
    if args.step_s is not None:
        log.info("[override] scenario.dt_s = %s (from --step-s)", args.step_s)
        scenario = replace(scenario, dt_s=args.step_s)
    if args.night_only:
        log.info("[override] scenario.night_only = True (from --night-only)")
        scenario = replace(scenario, night_only=True)
    cfg.scenario = scenario
    if args.seed is not None:
        log.info("[override] swap_bench.seed = %s (from --seed)", args.seed)
        cfg.bench_seed = args.seed
    return cfg


def _run_pass(cfg: RunConfig, out_dir: Path, figures: bool) -> None:
    result = simulate_pass(cfg.scenario)
    emit_timeseries(result, out_dir / "timeseries.csv")
    emit_pass_summary(result, out_dir / "pass_summary.txt", cfg.resolved)
    if figures:
        render_pass_figures(result, out_dir)
    log.info(
        "pass: duration %.0f s, peak secure %.3f Hz, %d secure BSMs",
        result.duration_s,
        result.peak("secure"),
        round(result.total("secure")),
    )


def _run_sweep(cfg: RunConfig, out_dir: Path, figures: bool) -> None:
    rows = sweep(cfg.scenario, cfg.sweep_altitudes_km, cfg.sweep_ratios)
    emit_sweep(rows, out_dir / "sweep.csv")
    if figures:
        render_sweep_figure(rows, out_dir)
    best = max(rows, key=lambda r: r["secure"])
    log.info(
        "sweep: best %.0f secure BSMs at %.0f km, ratio %.2f",
        best["secure"],
        best["altitude_km"],
        best["ratio"],
    )


def _run_annual(cfg: RunConfig, out_dir: Path, figures: bool) -> None:
    sc = cfg.scenario
    # lead-in covers the aligned first pass completely
    sc = replace(
        sc,
        t_start_s=sc.constellation.alignment_t_s - 900.0,
        t_end_s=sc.constellation.alignment_t_s + cfg.annual_days * 86400.0,
    )
    campaign = annual_campaign(
        sc,
        coarse_dt_s=cfg.annual_coarse_dt_s,
        integration_step_s=cfg.annual_integration_step_s,
    )
    emit_report(campaign, out_dir / "campaign_report.txt", cfg.resolved)
    _emit_passes_csv(campaign, out_dir / "passes.csv")
    if figures:
        render_campaign_figure(campaign, out_dir)
    log.info(
        "campaign: %d passes, %.0f secure BSMs total (%.0f at night)",
        len(campaign.passes),
        campaign.total("secure"),
        campaign.total("secure", night_only=True),
    )


def _emit_passes_csv(campaign, path: Path) -> None:
    from .report import _fmt  # shared formatting

    lines = ["t_start_s,t_end_s,duration_s,peak_secure_hz,attempted,successful,correct,secure,night"]
    for p in sorted(campaign.passes, key=lambda p: p.t_start_s):
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    p.t_start_s, p.t_end_s, p.duration_s, p.peak_secure_hz,
                    p.attempted, p.successful, p.correct, p.secure, p.night,
                )
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _run_bench(cfg: RunConfig, out_dir: Path, figures: bool) -> None:
    mem = MemoryParams(
        decay_time_s=5000.0 / cfg.scenario.devices.repetition_rate_hz,
        coherence_time_s=3000.0 / cfg.scenario.devices.repetition_rate_hz,
        coupling_efficiency=0.6,
        flip_fidelity=0.95,
    )
    rate = cfg.scenario.devices.repetition_rate_hz
    cells = []
    seed = cfg.bench_seed
    for d_rt in cfg.bench_d_rt_bins:
        for eta_a in cfg.bench_eta_values:
            for eta_b in cfg.bench_eta_values:
                seed += 1
                counts = run_oracle(
                    OracleConfig(
                        eta_a, eta_b, d_rt, d_rt, cfg.bench_d_cut, cfg.bench_d_cut,
                        mem, mem, rate, cfg.bench_n_bins, seed,
                    )
                )
                analytic = bsm_rates(
                    LinkState(eta_a, eta_b, d_rt, d_rt, cfg.bench_d_cut, cfg.bench_d_cut),
                    mem, mem, rate,
                )
                cells.append(
                    bench_cell(
                        counts, analytic,
                        {
                            "eta_a": eta_a, "eta_b": eta_b, "d_rt": d_rt,
                            "d_cut": cfg.bench_d_cut, "n_bins": cfg.bench_n_bins, "seed": seed,
                        },
                    )
                )
    emit_bench(cells, out_dir / "swap_bench.csv")
    if figures:
        render_bench_figure(cells, out_dir)
    worst = max(
        abs(c[f"{name}_z"]) for c in cells for name in ("attempted", "successful", "correct", "erroneous")
    )
    log.info("swap-bench: %d cells, worst |z| = %.2f (rng %s)", len(cells), worst, "xoshiro256**")


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 1

    runner = {
        "pass": _run_pass,
        "sweep": _run_sweep,
        "annual": _run_annual,
        "swap-bench": _run_bench,
    }[args.mode]
    try:
        runner(cfg, out_dir, figures=not args.no_figures)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.error("run failed: %s", exc)
        if args.verbose:
            raise
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

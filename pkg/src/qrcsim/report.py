"""Result serialization: CSV time series, pass/campaign summaries, the
analytic-vs-Monte-Carlo benchmark table, and the figures rendered next
to each delimited output.

All text outputs are deterministic: fixed column order, '.' decimal
point, '\\n' newlines, UTF-8, repr-precision floats, no wall-clock
timestamps.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .channel import to_db
from .engine import CampaignResult, PassResult
from .mc import OracleCounts

TIMESERIES_COLUMNS = [
    "t_s",
    "theta_A_deg",
    "theta_B_deg",
    "L_A_km",
    "L_B_km",
    "L_IS_A_km",
    "L_IS_B_km",
    "eta_dl_or_ul_A_dB",
    "eta_dl_or_ul_B_dB",
    "eta_is_dB",
    "eta_A",
    "eta_B",
    "trt_A_ms",
    "trt_B_ms",
    "dcut_A",
    "dcut_B",
    "r_att_hz",
    "r_succ_hz",
    "r_corr_hz",
    "r_sec_hz",
    "qber_x",
    "night",
]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def emit_timeseries(result: PassResult, path: str | Path) -> Path:
    """Write the per-step link record with a fixed column contract."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TIMESERIES_COLUMNS)
        for s in result.steps:
            writer.writerow(
                [
                    _fmt(s.t_s),
                    _fmt(s.geom_a.elevation_deg),
                    _fmt(s.geom_b.elevation_deg),
                    _fmt(s.geom_a.slant_range_km),
                    _fmt(s.geom_b.slant_range_km),
                    _fmt(s.intersat_a_km),
                    _fmt(s.intersat_b_km),
                    _fmt(to_db(s.channel_a.eta_total) if s.channel_a else math.inf),
                    _fmt(to_db(s.channel_b.eta_total) if s.channel_b else math.inf),
                    _fmt(to_db(s.channel_is_a.eta_total) if s.channel_is_a else math.inf),
                    _fmt(s.eta_a),
                    _fmt(s.eta_b),
                    _fmt(s.trt_a_s * 1e3),
                    _fmt(s.trt_b_s * 1e3),
                    _fmt(s.d_cut_a),
                    _fmt(s.d_cut_b),
                    _fmt(s.rates_hz.attempted),
                    _fmt(s.rates_hz.successful),
                    _fmt(s.rates_hz.correct),
                    _fmt(s.rates_hz.secure),
                    _fmt(s.rates_hz.qber_x),
                    _fmt(s.night),
                ]
            )
    return path


def parse_timeseries(path: str | Path) -> dict[str, np.ndarray]:
    """Read a time-series CSV back into column arrays."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    data = np.asarray(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def _echo_config(lines: list[str], resolved: dict) -> None:
    lines.append("")
    lines.append("[resolved configuration]")
    for section, values in resolved.items():
        lines.append(f"{section}:")
        if isinstance(values, dict):
            for key, val in values.items():
                lines.append(f"  {key} = {val!r}")
        else:
            lines.append(f"  {values!r}")


def emit_pass_summary(result: PassResult, path: str | Path, resolved: dict | None = None) -> Path:
    path = Path(path)
    gated = result.gated_steps
    lines = ["[pass summary]"]
    lines.append(f"steps = {len(result.steps)}")
    lines.append(f"gated_steps = {len(gated)}")
    lines.append(f"duration_s = {result.duration_s!r}")
    lines.append(f"night = {1 if result.is_night else 0}")
    for which in ("attempted", "successful", "correct", "secure"):
        lines.append(f"peak_{which}_hz = {result.peak(which)!r}")
        lines.append(f"total_{which} = {result.total(which)!r}")
    if resolved:
        _echo_config(lines, resolved)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def emit_report(campaign: CampaignResult, path: str | Path, resolved: dict | None = None) -> Path:
    """Campaign report: per-pass table plus night/day cumulative totals."""
    path = Path(path)
    night_secure = campaign.total("secure", night_only=True)
    total_secure = campaign.total("secure")
    assert night_secure <= total_secure + 1e-9, "night totals exceed all-pass totals"
    lines = ["[campaign summary]"]
    lines.append(f"passes = {len(campaign.passes)}")
    lines.append(f"night_passes = {sum(1 for p in campaign.passes if p.night)}")
    for which in ("attempted", "successful", "correct", "secure"):
        lines.append(f"total_{which} = {campaign.total(which)!r}")
        lines.append(f"night_total_{which} = {campaign.total(which, night_only=True)!r}")
    lines.append(f"peak_secure_hz = {max((p.peak_secure_hz for p in campaign.passes), default=0.0)!r}")
    lines.append("")
    lines.append("[passes]")
    lines.append("t_start_s,t_end_s,duration_s,peak_secure_hz,attempted,successful,correct,secure,night")
    for p in sorted(campaign.passes, key=lambda p: p.t_start_s):
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    p.t_start_s,
                    p.t_end_s,
                    p.duration_s,
                    p.peak_secure_hz,
                    p.attempted,
                    p.successful,
                    p.correct,
                    p.secure,
                    p.night,
                )
            )
        )
    if resolved:
        _echo_config(lines, resolved)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def emit_sweep(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    fields = ["altitude_km", "ratio", "secure", "correct", "successful", "attempted", "duration_s", "los_blocked"]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(row[f]) for f in fields])
    return path


def emit_bench(cells: list[dict], path: str | Path) -> Path:
    """Analytic vs Monte-Carlo comparison table."""
    path = Path(path)
    fields = [
        "eta_a", "eta_b", "d_rt", "d_cut", "n_bins", "seed",
        "attempted_mc", "attempted_an", "attempted_z",
        "successful_mc", "successful_an", "successful_z",
        "correct_mc", "correct_an", "correct_z",
        "erroneous_mc", "erroneous_an", "erroneous_z",
    ]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for cell in cells:
            writer.writerow([_fmt(cell[f]) for f in fields])
    return path


def bench_cell(counts: OracleCounts, analytic_per_trial, meta: dict) -> dict:
    """One comparison row: empirical counts vs expected counts with z-scores."""
    out = dict(meta)
    for name in ("attempted", "successful", "correct", "erroneous"):
        mc = getattr(counts, name)
        expected = getattr(analytic_per_trial, name) * counts.n_bins
        out[f"{name}_mc"] = mc
        out[f"{name}_an"] = expected
        out[f"{name}_z"] = (mc - expected) / counts.se(mc)
    return out


# --- figures ---

def render_pass_figures(result: PassResult, out_dir: str | Path, prefix: str = "pass") -> list[Path]:
    """Geometry, channel-loss and rate figures for a single pass."""
    out_dir = Path(out_dir)
    t = np.array([s.t_s for s in result.steps])
    gated = np.array([s.gated for s in result.steps])
    paths = []

    fig, ax1 = plt.subplots(figsize=(7, 4))
    ax1.plot(t, [s.geom_a.elevation_deg for s in result.steps], "C0-", label="elevation A")
    ax1.plot(t, [s.geom_b.elevation_deg for s in result.steps], "C0--", label="elevation B")
    ax1.set_xlabel("time [s]")
    ax1.set_ylabel("elevation [deg]", color="C0")
    ax1.set_ylim(0, 95)
    ax2 = ax1.twinx()
    ax2.plot(t, [s.geom_a.slant_range_km for s in result.steps], "C1-", label="range A")
    ax2.plot(t, [s.geom_b.slant_range_km for s in result.steps], "C1--", label="range B")
    ax2.set_ylabel("slant range [km]", color="C1")
    fig.legend(loc="upper center", ncol=4, fontsize=8)
    fig.tight_layout()
    p = out_dir / f"{prefix}_geometry.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    paths.append(p)

    if np.any(gated):
        fig, ax = plt.subplots(figsize=(7, 4))
        tg = t[gated]
        steps = [s for s in result.steps if s.gated]
        ax.plot(tg, [to_db(s.channel_a.eta_total) for s in steps], label="ground link A")
        ax.plot(tg, [to_db(s.channel_b.eta_total) for s in steps], label="ground link B")
        ax.plot(tg, [to_db(s.channel_is_a.eta_total) for s in steps], label="inter-satellite A")
        ax.set_xlabel("time [s]")
        ax.set_ylabel("channel loss [dB]")
        ax.invert_yaxis()
        ax.legend(fontsize=8)
        fig.tight_layout()
        p = out_dir / f"{prefix}_loss.png"
        fig.savefig(p, dpi=120)
        plt.close(fig)
        paths.append(p)

        fig, axes = plt.subplots(2, 2, figsize=(9, 6), sharex=True)
        for ax, which, label in zip(
            axes.flat,
            ("attempted", "successful", "correct", "secure"),
            ("attempted", "successful", "correct", "secure"),
        ):
            ax.plot(t, [getattr(s.rates_hz, which) for s in result.steps])
            ax.set_title(f"{label} BSMs per second", fontsize=9)
            ax.set_xlabel("time [s]")
        fig.tight_layout()
        p = out_dir / f"{prefix}_rates.png"
        fig.savefig(p, dpi=120)
        plt.close(fig)
        paths.append(p)
    return paths


def render_sweep_figure(rows: list[dict], out_dir: str | Path, prefix: str = "sweep") -> Path:
    out_dir = Path(out_dir)
    altitudes = sorted({row["altitude_km"] for row in rows})
    fig, ax = plt.subplots(figsize=(7, 4))
    for h in altitudes:
        sub = sorted((r for r in rows if r["altitude_km"] == h), key=lambda r: r["ratio"])
        ax.plot([r["ratio"] for r in sub], [r["secure"] for r in sub], "o-", label=f"{h:.0f} km")
    ax.set_xlabel("outer-satellite separation / station separation")
    ax.set_ylabel("secure BSMs per pass")
    ax.legend(fontsize=8)
    fig.tight_layout()
    p = out_dir / f"{prefix}_secure.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    return p


def render_campaign_figure(
    campaign: CampaignResult, out_dir: str | Path, prefix: str = "annual"
) -> Path:
    out_dir = Path(out_dir)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
    days = [p.t_start_s / 86400.0 for p in campaign.passes]
    peaks = [p.peak_secure_hz for p in campaign.passes]
    night = [p.night for p in campaign.passes]
    ax1.vlines(days, 0, peaks, colors=["C0" if n else "0.7" for n in night], lw=1)
    ax1.set_ylabel("peak secure rate [Hz]")

    t_all, c_all = campaign.cumulative("secure")
    t_night, c_night = campaign.cumulative("secure", night_only=True)
    if len(t_all):
        ax2.step(t_all / 86400.0, c_all, "C3--", where="post", label="all passes")
    if len(t_night):
        ax2.step(t_night / 86400.0, c_night, "C3-", where="post", label="night passes")
    ax2.set_xlabel("time [days]")
    ax2.set_ylabel("accumulated secure BSMs")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    p = out_dir / f"{prefix}_secure.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    return p


def render_bench_figure(cells: list[dict], out_dir: str | Path, prefix: str = "swap_bench") -> Path:
    out_dir = Path(out_dir)
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, name in enumerate(("attempted", "successful", "correct", "erroneous")):
        ax.plot([c[f"{name}_z"] for c in cells], "o", ms=3, label=name)
    ax.axhline(3.0, color="r", ls=":")
    ax.axhline(-3.0, color="r", ls=":")
    ax.set_xlabel("grid cell")
    ax.set_ylabel("(MC - analytic) / standard error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    p = out_dir / f"{prefix}_z.png"
    fig.savefig(p, dpi=120)
    plt.close(fig)
    return p

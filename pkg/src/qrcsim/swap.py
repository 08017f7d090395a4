"""Closed-form rates for memory-assisted entanglement swapping in
discrete time bins: attempted, successful, correct/erroneous and secure
Bell-state measurements per source trial, plus cutoff optimization.

All rates are per trial; multiply by the repetition rate for Hz.  The
geometric sums are evaluated through expm1/log1p so the expressions
stay stable for success probabilities down to 1e-12 and round trips up
to 1e9 bins.  Infinite decay or coherence times are represented exactly
(per-bin log-decay zero), not by large floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MemoryParams:
    """Quantum memory figure of merit.

    decay_time_s: exponential photon-loss time constant (inf allowed);
    coherence_time_s: exponential dephasing time constant (inf allowed);
    coupling_efficiency: probability a heralded photon is retrievable;
    flip_fidelity: no-flip amplitude on combined read-in/read-out.
    """

    decay_time_s: float = 0.100
    coherence_time_s: float = 0.060
    coupling_efficiency: float = 0.1
    flip_fidelity: float = 1.0

    def __post_init__(self):
        if self.decay_time_s <= 0 or self.coherence_time_s <= 0:
            raise ValueError("memory time constants must be positive (inf allowed)")
        if not 0.0 <= self.coupling_efficiency <= 1.0:
            raise ValueError("coupling efficiency must lie in [0, 1]")
        if not 0.0 <= self.flip_fidelity <= 1.0:
            raise ValueError("flip fidelity must lie in [0, 1]")


@dataclass(frozen=True)
class DeviceParams:
    """Source/detector efficiencies and the trial repetition rate."""

    source_efficiency: float = 0.2
    detector_efficiency: float = 0.95
    qnd_efficiency: float = 0.8
    bsm_efficiency: float = 0.5
    repetition_rate_hz: float = 90e6

    def __post_init__(self):
        for name in ("source_efficiency", "detector_efficiency", "qnd_efficiency", "bsm_efficiency"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.repetition_rate_hz <= 0:
            raise ValueError("repetition rate must be positive")


@dataclass(frozen=True)
class LinkState:
    """Per-trial link success probabilities plus bin-domain timing."""

    eta_a: float
    eta_b: float
    d_rt_a: int
    d_rt_b: int
    d_cut_a: int
    d_cut_b: int

    def __post_init__(self):
        for name in ("eta_a", "eta_b"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("d_rt_a", "d_rt_b", "d_cut_a", "d_cut_b"):
            v = getattr(self, name)
            if v < 0 or v != int(v):
                raise ValueError(f"{name} must be a nonnegative integer")


@dataclass(frozen=True)
class BsmRates:
    """Per-trial event probabilities for the four BSM classes."""

    attempted: float
    successful: float
    correct: float
    erroneous: float
    secure: float
    qber_x: float

    def scaled(self, rate_hz: float) -> "BsmRates":
        """Same rates expressed per second."""
        return BsmRates(
            self.attempted * rate_hz,
            self.successful * rate_hz,
            self.correct * rate_hz,
            self.erroneous * rate_hz,
            self.secure * rate_hz,
            self.qber_x,
        )


ZERO_RATES = BsmRates(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def link_success(
    eta_ch_ground: float,
    eta_ch_intersat: float,
    dev: DeviceParams,
    architecture: str,
) -> float:
    """Per-trial success probability of one half of the repeater.

    Downlink heralds through a QND detection on the central satellite;
    uplink heralds through a photonic BSM on the outer satellite, which
    costs a second detection and the conclusive-BSM factor.
    """
    if architecture == "DL":
        device = dev.source_efficiency * dev.detector_efficiency * dev.qnd_efficiency
    elif architecture == "UL":
        device = dev.source_efficiency * dev.detector_efficiency**2 * dev.bsm_efficiency
    else:
        raise ValueError(f"unknown architecture {architecture!r} (DL or UL)")
    return eta_ch_ground * eta_ch_intersat * device


def binary_entropy(x) -> float:
    """H(x) = -x log2 x - (1-x) log2 (1-x), with H(0) = H(1) = 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inner = (x > 0.0) & (x < 1.0)
    xi = x[inner]
    out[inner] = -(xi * np.log2(xi) + (1.0 - xi) * np.log2(1.0 - xi))
    return float(out) if out.ndim == 0 else out


def _log1m(eta: float) -> float:
    """log(1 - eta), returning -inf at eta = 1 instead of raising."""
    return -math.inf if eta >= 1.0 else math.log1p(-eta)


def _geom(log_ratio, d):
    """Sum_{k=1..d} ratio^(k-1), stable for ratio -> 1 and huge d.

    Scalar log_ratio; d scalar or array.  Callers hold an errstate
    guard for the 0 * inf corner.
    """
    if log_ratio == 0.0:
        return np.asarray(d, dtype=float) if np.ndim(d) else float(d)
    den = math.expm1(log_ratio)
    d = np.asarray(d, dtype=float)
    num = np.expm1(np.where(d > 0.0, d, 1.0) * log_ratio)
    return np.where(d > 0.0, num / den, 0.0)


def p_event(eta_a: float, eta_b: float, d: int) -> tuple[float, float]:
    """Probabilities that a fresh herald in one memory finds the most
    recent event in the other memory within ``d`` bins (and vice versa)."""
    lq = _log1m(eta_a) + _log1m(eta_b)
    with np.errstate(invalid="ignore", over="ignore"):
        g = float(_geom(lq, d))
    return eta_a * (1.0 - eta_b) * g, (1.0 - eta_a) * eta_b * g


def _log_decay(time_s: float, rate_hz: float) -> float:
    """Per-bin log decay -1/(time * R); exactly zero for infinite time."""
    return 0.0 if math.isinf(time_s) else -1.0 / (time_s * rate_hz)


def _rates_arrays(
    eta_a: float,
    eta_b: float,
    d_rt_a: float,
    d_rt_b: float,
    d_cut_a,
    d_cut_b,
    mem_a: MemoryParams,
    mem_b: MemoryParams,
    rate_hz: float,
):
    """Vectorized core: cutoffs may be arrays, everything else scalar.

    Returns (attempted, successful, correct, erroneous) per trial.
    """
    da = np.asarray(d_cut_a, dtype=float)
    db = np.asarray(d_cut_b, dtype=float)

    lqa = _log1m(eta_a)
    lqb = _log1m(eta_b)
    lq = lqa + lqb
    lpa = _log_decay(mem_a.decay_time_s, rate_hz)
    lpb = _log_decay(mem_b.decay_time_s, rate_hz)
    lca = _log_decay(mem_a.coherence_time_s, rate_hz)
    lcb = _log_decay(mem_b.coherence_time_s, rate_hz)

    n_ab = eta_a * eta_b
    n_a = eta_a * (1.0 - eta_b)
    n_b = (1.0 - eta_a) * eta_b

    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        p_a = n_a * _geom(lq, da)
        p_b = n_b * _geom(lq, db)
        denom = 1.0 - p_a * p_b
        p_bsm_a = (1.0 - p_a) * p_b / denom  # fresh herald in A pairs backwards
        p_bsm_b = p_a * (1.0 - p_b) / denom
        attempted = n_ab + n_a * p_bsm_a + n_b * p_bsm_b

        retr_a = mem_a.coupling_efficiency * math.exp(lpa * d_rt_a)
        retr_b = mem_b.coupling_efficiency * math.exp(lpb * d_rt_b)
        ps_a = n_a * retr_a * _geom(lq + lpa, da)  # stored-in-A branch
        ps_b = n_b * retr_b * _geom(lq + lpb, db)
        successful = (
            n_ab * retr_a * retr_b
            + n_a * ps_b * retr_a / denom * (1.0 - p_a)
            + n_b * ps_a * retr_b / denom * (1.0 - p_b)
        )

        # correlated part of the correct/erroneous split
        deph_a = mem_a.flip_fidelity * math.exp(lca * d_rt_a)
        deph_b = mem_b.flip_fidelity * math.exp(lcb * d_rt_b)
        fid = mem_a.flip_fidelity * mem_b.flip_fidelity
        dps_a = (
            n_a
            * mem_a.coupling_efficiency
            * fid
            * math.exp((lpa + lca) * d_rt_a)
            * math.exp(lcb * d_rt_b)
            * _geom(lq + lpa + lca, da)
        )
        dps_b = (
            n_b
            * mem_b.coupling_efficiency
            * fid
            * math.exp((lpb + lcb) * d_rt_b)
            * math.exp(lca * d_rt_a)
            * _geom(lq + lpb + lcb, db)
        )
        delta = (
            n_ab * retr_a * retr_b * deph_a * deph_b
            + n_a * dps_b * retr_a / denom * (1.0 - p_a)
            + n_b * dps_a * retr_b / denom * (1.0 - p_b)
        )
        delta = np.minimum(delta, successful)
        correct = 0.5 * (successful + delta)
        erroneous = 0.5 * (successful - delta)
    return attempted, successful, correct, erroneous


def _secure_from(successful, erroneous):
    with np.errstate(invalid="ignore", divide="ignore"):
        qber = np.where(successful > 0.0, erroneous / np.where(successful > 0, successful, 1.0), 0.0)
    return successful * (1.0 - binary_entropy(qber)), qber


def bsm_rates(state: LinkState, mem_a: MemoryParams, mem_b: MemoryParams, rate_hz: float) -> BsmRates:
    """All four BSM event classes per trial for one link state."""
    att, succ, corr, err = _rates_arrays(
        state.eta_a,
        state.eta_b,
        state.d_rt_a,
        state.d_rt_b,
        state.d_cut_a,
        state.d_cut_b,
        mem_a,
        mem_b,
        rate_hz,
    )
    secure, qber = _secure_from(succ, err)
    return BsmRates(float(att), float(succ), float(corr), float(err), float(secure), float(qber))


def attempted_rate(state: LinkState) -> float:
    """Attempted BSMs per trial (memory-quality independent)."""
    p_a, _ = p_event(state.eta_a, state.eta_b, state.d_cut_a)
    _, p_b = p_event(state.eta_a, state.eta_b, state.d_cut_b)
    denom = 1.0 - p_a * p_b
    n_ab = state.eta_a * state.eta_b
    n_a = state.eta_a * (1.0 - state.eta_b)
    n_b = (1.0 - state.eta_a) * state.eta_b
    return n_ab + n_a * (1.0 - p_a) * p_b / denom + n_b * p_a * (1.0 - p_b) / denom


def secure_rate(n_successful: float, n_erroneous: float) -> float:
    """Successful BSMs discounted by the binary-entropy error penalty."""
    if n_successful < 0 or n_erroneous < 0 or n_erroneous > n_successful:
        raise ValueError("need 0 <= erroneous <= successful")
    if n_successful == 0.0:
        return 0.0
    return n_successful * (1.0 - float(binary_entropy(n_erroneous / n_successful)))


# --- cutoff optimization ---

_OBJECTIVES = ("secure", "correct", "successful")


def _objective_grid(
    eta_a, eta_b, d_rt_a, d_rt_b, da_grid, db_grid, mem_a, mem_b, rate_hz, objective
):
    da = np.asarray(da_grid, dtype=float)[:, None]
    db = np.asarray(db_grid, dtype=float)[None, :]
    att, succ, corr, err = _rates_arrays(
        eta_a, eta_b, d_rt_a, d_rt_b, da, db, mem_a, mem_b, rate_hz
    )
    if objective == "successful":
        return succ
    if objective == "correct":
        return corr
    secure, _ = _secure_from(succ, err)
    return secure


def _candidate_axis(d_max: int, n_log: int = 56) -> np.ndarray:
    small = np.arange(0, min(9, d_max + 1))
    if d_max <= 8:
        return small
    logs = np.unique(np.round(np.geomspace(9, d_max, n_log)).astype(np.int64))
    return np.unique(np.concatenate([small, logs, [d_max]]))


def optimize_cutoffs(
    eta_a: float,
    eta_b: float,
    d_rt_a: int,
    d_rt_b: int,
    mem_a: MemoryParams,
    mem_b: MemoryParams,
    rate_hz: float,
    objective: str = "secure",
    warm_start: tuple[int, int] | None = None,
) -> tuple[int, int, BsmRates]:
    """Maximize a BSM rate over the nonnegative integer effective cutoffs.

    Coarse logarithmic grid followed by local pattern refinement with
    diagonal moves; ties break toward the smaller cutoffs.  With a
    ``warm_start`` the grid stage is skipped (intended for slowly
    varying link parameters).
    """
    if objective not in _OBJECTIVES:
        raise ValueError(f"objective must be one of {_OBJECTIVES}")
    if eta_a <= 0.0 or eta_b <= 0.0:
        state = LinkState(eta_a, eta_b, d_rt_a, d_rt_b, 0, 0)
        return 0, 0, bsm_rates(state, mem_a, mem_b, rate_hz)

    lq = abs(_log1m(eta_a) + _log1m(eta_b))
    scales = [45.0 / max(lq, 1e-12)]
    for mem in (mem_a, mem_b):
        if not math.isinf(mem.decay_time_s):
            scales.append(20.0 * mem.decay_time_s * rate_hz)
        if not math.isinf(mem.coherence_time_s):
            scales.append(20.0 * mem.coherence_time_s * rate_hz)
    d_max = int(min(min(scales), 1e12)) + 1

    def evaluate(da_arr, db_arr):
        return _objective_grid(
            eta_a, eta_b, d_rt_a, d_rt_b, da_arr, db_arr, mem_a, mem_b, rate_hz, objective
        )

    if warm_start is None:
        axis = _candidate_axis(d_max)
        grid = evaluate(axis, axis)
        flat = int(np.argmax(grid))  # first max in row-major order = smaller cutoffs
        best_a = int(axis[flat // len(axis)])
        best_b = int(axis[flat % len(axis)])
        best_val = float(grid.flat[flat])
        step = max(best_a, best_b, 8)
    else:
        best_a = int(min(max(warm_start[0], 0), d_max))
        best_b = int(min(max(warm_start[1], 0), d_max))
        best_val = float(evaluate(np.array([best_a]), np.array([best_b]))[0, 0])
        # parameters drift slowly between steps: search a narrow neighborhood
        step = max(1, (max(best_a, best_b) + 9) // 10)

    # pattern search: shrinking neighborhood with diagonal moves; ties
    # resolve once per evaluation toward the smaller cutoff (argmax takes
    # the first, i.e. smallest, grid point) without iterative tie-walking
    while True:
        half = max(1, step // 2)
        offsets = sorted({-step, -half, 0, half, step})
        cand_a = sorted({min(max(best_a + o, 0), d_max) for o in offsets})
        cand_b = sorted({min(max(best_b + o, 0), d_max) for o in offsets})
        vals = evaluate(cand_a, cand_b)
        idx = int(np.argmax(vals))
        ia, ib = idx // len(cand_b), idx % len(cand_b)
        val = float(vals[ia, ib])
        new_a, new_b = int(cand_a[ia]), int(cand_b[ib])
        if val > best_val and (new_a, new_b) != (best_a, best_b):
            best_a, best_b, best_val = new_a, new_b, val
            continue
        if step <= 1:
            break
        step = max(1, step // 3)

    # symmetric parameters admit a symmetric optimum; prefer it on ties
    if eta_a == eta_b and d_rt_a == d_rt_b and mem_a == mem_b and best_a != best_b:
        diag = (best_a + best_b) // 2
        dvals = evaluate(np.array([diag]), np.array([diag]))[0, 0]
        if dvals >= best_val * (1.0 - 1e-12):
            best_a = best_b = diag
            best_val = float(dvals)

    state = LinkState(eta_a, eta_b, d_rt_a, d_rt_b, best_a, best_b)
    return best_a, best_b, bsm_rates(state, mem_a, mem_b, rate_hz)

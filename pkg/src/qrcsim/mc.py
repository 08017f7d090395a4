"""Discrete-event, time-binned stochastic simulation of the
memory-assisted swapping protocol.

This is the brute-force oracle for the closed-form rates: every bin,
each link heralds independently; a fresh herald pairs with the most
recent unpaired herald in the other memory when that one is still
within its cutoff, newer heralds displace older unpaired ones, and
retrieval/flip outcomes are sampled from the exponential memory laws.

The generator is an inline xoshiro256** seeded through splitmix64, so
identical seeds give bit-identical counts on any platform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .swap import MemoryParams

RNG_ALGORITHM = "xoshiro256**/splitmix64"


@dataclass(frozen=True)
class OracleConfig:
    """One oracle run: link probabilities, bin-domain timing, memories."""

    eta_a: float
    eta_b: float
    d_rt_a: int
    d_rt_b: int
    d_cut_a: int
    d_cut_b: int
    mem_a: MemoryParams
    mem_b: MemoryParams
    rate_hz: float
    n_bins: int = 10_000_000
    seed: int = 1

    def __post_init__(self):
        if self.n_bins < 1:
            raise ValueError("n_bins must be >= 1")


@dataclass(frozen=True)
class OracleCounts:
    """Empirical counts with binomial standard errors."""

    attempted: int
    successful: int
    correct: int
    erroneous: int
    n_bins: int
    algorithm: str = RNG_ALGORITHM

    def se(self, count: int) -> float:
        p = count / self.n_bins
        return math.sqrt(max(p * (1.0 - p) * self.n_bins, 1.0))

    def rate(self, count: int) -> float:
        return count / self.n_bins


@njit(cache=True, inline="always")
def _splitmix64(x):
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = x
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(
        0xFFFFFFFFFFFFFFFF
    )
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(
        0xFFFFFFFFFFFFFFFF
    )
    return x, z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _rotl(x, k):
    return ((x << np.uint64(k)) | (x >> np.uint64(64 - k))) & np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True, inline="always")
def _xoshiro_next(s):
    result = (_rotl((s[1] * np.uint64(5)) & np.uint64(0xFFFFFFFFFFFFFFFF), 7) * np.uint64(9)) & np.uint64(
        0xFFFFFFFFFFFFFFFF
    )
    t = (s[1] << np.uint64(17)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True, inline="always")
def _uniform(s):
    return (_xoshiro_next(s) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _oracle_kernel(
    n_bins,
    eta_a,
    eta_b,
    d_cut_a,
    d_cut_b,
    d_rt_a,
    d_rt_b,
    coup_a,
    coup_b,
    lp_a,
    lp_b,
    lc_a,
    lc_b,
    fid_a,
    fid_b,
    seed,
):
    s = np.empty(4, dtype=np.uint64)
    x = np.uint64(seed)
    for i in range(4):
        x, v = _splitmix64(x)
        s[i] = v

    none = np.int64(-(1 << 62))
    slot_a = none  # bin index of the unpaired herald in each memory
    slot_b = none

    attempted = 0
    successful = 0
    correct = 0

    for n in range(n_bins):
        herald_a = _uniform(s) < eta_a
        herald_b = _uniform(s) < eta_b

        paired = False
        store_a = 0.0  # storage durations in bins at BSM time
        store_b = 0.0
        if herald_a and herald_b:
            paired = True
            store_a = d_rt_a
            store_b = d_rt_b
            slot_a = none
            slot_b = none
        elif herald_a:
            lag = n - slot_b
            if slot_b != none and lag <= d_cut_b:
                paired = True
                store_a = d_rt_a
                store_b = d_rt_b + lag - 1
                slot_b = none
                slot_a = none
            else:
                slot_a = n  # newest herald displaces any older unpaired one
        elif herald_b:
            lag = n - slot_a
            if slot_a != none and lag <= d_cut_a:
                paired = True
                store_a = d_rt_a + lag - 1
                store_b = d_rt_b
                slot_a = none
                slot_b = none
            else:
                slot_b = n

        if paired:
            attempted += 1
            ok_a = _uniform(s) < coup_a * math.exp(lp_a * store_a)
            ok_b = _uniform(s) < coup_b * math.exp(lp_b * store_b)
            if ok_a and ok_b:
                successful += 1
                flip_a = _uniform(s) < 0.5 * (1.0 - fid_a * math.exp(lc_a * store_a))
                flip_b = _uniform(s) < 0.5 * (1.0 - fid_b * math.exp(lc_b * store_b))
                if flip_a == flip_b:
                    correct += 1
    return attempted, successful, correct


def run_oracle(cfg: OracleConfig) -> OracleCounts:
    """Simulate the protocol bin by bin and count the four BSM classes."""

    def log_decay(t):
        return 0.0 if math.isinf(t) else -1.0 / (t * cfg.rate_hz)

    attempted, successful, correct = _oracle_kernel(
        cfg.n_bins,
        cfg.eta_a,
        cfg.eta_b,
        cfg.d_cut_a,
        cfg.d_cut_b,
        cfg.d_rt_a,
        cfg.d_rt_b,
        cfg.mem_a.coupling_efficiency,
        cfg.mem_b.coupling_efficiency,
        log_decay(cfg.mem_a.decay_time_s),
        log_decay(cfg.mem_b.decay_time_s),
        log_decay(cfg.mem_a.coherence_time_s),
        log_decay(cfg.mem_b.coherence_time_s),
        cfg.mem_a.flip_fidelity,
        cfg.mem_b.flip_fidelity,
        cfg.seed,
    )
    return OracleCounts(attempted, successful, correct, successful - correct, cfg.n_bins)

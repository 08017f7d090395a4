import math

import numpy as np
import pytest

from qrcsim.mc import RNG_ALGORITHM, OracleConfig, OracleCounts, run_oracle
from qrcsim.swap import LinkState, MemoryParams, bsm_rates

R = 90e6
PERFECT = MemoryParams(math.inf, math.inf, 1.0, 1.0)


def finite_mem(decay_bins=5000.0, coh_bins=3000.0, coupling=0.6, fidelity=0.95):
    return MemoryParams(decay_bins / R, coh_bins / R, coupling, fidelity)


def z_scores(counts: OracleCounts, state: LinkState, mem_a, mem_b) -> dict[str, float]:
    analytic = bsm_rates(state, mem_a, mem_b, R)
    out = {}
    for name in ("attempted", "successful", "correct", "erroneous"):
        mc = getattr(counts, name)
        expected = getattr(analytic, name) * counts.n_bins
        out[name] = (mc - expected) / counts.se(mc)
    return out


class TestTrivialLimits:
    def test_dead_link(self):
        cfg = OracleConfig(0.0, 0.9, 0, 0, 100, 100, PERFECT, PERFECT, R, 2000, seed=5)
        counts = run_oracle(cfg)
        assert counts.attempted == counts.successful == counts.correct == 0

    def test_lossless_lockstep(self):
        cfg = OracleConfig(1.0, 1.0, 0, 0, 0, 0, PERFECT, PERFECT, R, 1500, seed=5)
        counts = run_oracle(cfg)
        assert counts.attempted == counts.successful == counts.correct == 1500
        assert counts.erroneous == 0

    def test_zero_cutoff_only_simultaneous(self):
        cfg = OracleConfig(0.5, 0.5, 0, 0, 0, 0, PERFECT, PERFECT, R, 200_000, seed=5)
        counts = run_oracle(cfg)
        expected = 0.25 * cfg.n_bins
        assert abs(counts.attempted - expected) < 4 * math.sqrt(expected)


class TestReproducibility:
    def test_identical_seed_identical_counts(self):
        mem = finite_mem()
        cfg = OracleConfig(0.01, 0.02, 100, 100, 500, 500, mem, mem, R, 1_000_000, seed=42)
        assert run_oracle(cfg) == run_oracle(cfg)

    def test_different_seed_differs(self):
        mem = finite_mem()
        a = run_oracle(OracleConfig(0.01, 0.02, 100, 100, 500, 500, mem, mem, R, 1_000_000, seed=1))
        b = run_oracle(OracleConfig(0.01, 0.02, 100, 100, 500, 500, mem, mem, R, 1_000_000, seed=2))
        assert a.attempted != b.attempted

    def test_algorithm_recorded(self):
        mem = finite_mem()
        counts = run_oracle(OracleConfig(0.1, 0.1, 0, 0, 10, 10, mem, mem, R, 1000, seed=3))
        assert counts.algorithm == RNG_ALGORITHM == "xoshiro256**/splitmix64"


class TestStatisticalAgreement:
    def test_reference_cell(self):
        mem = finite_mem()
        cfg = OracleConfig(0.01, 0.02, 100, 100, 500, 500, mem, mem, R, 10_000_000, seed=42)
        counts = run_oracle(cfg)
        state = LinkState(0.01, 0.02, 100, 100, 500, 500)
        for name, z in z_scores(counts, state, mem, mem).items():
            assert abs(z) < 3.0, f"{name}: z = {z:.2f}"

    def test_counts_scale_linearly(self):
        mem = finite_mem()
        small = run_oracle(OracleConfig(0.02, 0.03, 50, 50, 400, 400, mem, mem, R, 1_000_000, seed=9))
        large = run_oracle(OracleConfig(0.02, 0.03, 50, 50, 400, 400, mem, mem, R, 4_000_000, seed=10))
        ratio = large.attempted / small.attempted
        assert ratio == pytest.approx(4.0, rel=0.02)

    def test_exchange_symmetry_within_noise(self):
        mem_a = finite_mem(4000, 2000, 0.7, 0.9)
        mem_b = finite_mem(8000, 1200, 0.4, 0.8)
        fwd = run_oracle(OracleConfig(0.015, 0.03, 200, 80, 600, 900, mem_a, mem_b, R, 4_000_000, seed=21))
        rev = run_oracle(OracleConfig(0.03, 0.015, 80, 200, 900, 600, mem_b, mem_a, R, 4_000_000, seed=22))
        for name in ("attempted", "successful", "correct", "erroneous"):
            a, b = getattr(fwd, name), getattr(rev, name)
            se = math.sqrt(fwd.se(a) ** 2 + rev.se(b) ** 2)
            assert abs(a - b) < 3.5 * se, name

    def test_asymmetric_round_trips(self):
        mem_a = finite_mem(3000, 2500, 0.8, 0.92)
        mem_b = finite_mem(12000, 1800, 0.5, 0.97)
        cfg = OracleConfig(0.008, 0.04, 0, 2000, 1500, 300, mem_a, mem_b, R, 8_000_000, seed=33)
        counts = run_oracle(cfg)
        state = LinkState(0.008, 0.04, 0, 2000, 1500, 300)
        for name, z in z_scores(counts, state, mem_a, mem_b).items():
            assert abs(z) < 3.0, f"{name}: z = {z:.2f}"

    def test_invariant_partition(self):
        mem = finite_mem()
        counts = run_oracle(OracleConfig(0.05, 0.01, 30, 70, 800, 100, mem, mem, R, 2_000_000, seed=8))
        assert counts.correct + counts.erroneous == counts.successful
        assert counts.successful <= counts.attempted <= counts.n_bins


class TestValidation:
    def test_rejects_empty_run(self):
        with pytest.raises(ValueError):
            OracleConfig(0.1, 0.1, 0, 0, 10, 10, PERFECT, PERFECT, R, 0, seed=1)

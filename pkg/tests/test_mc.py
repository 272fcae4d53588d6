"""Terminal sampling, importance estimators, and pathwise tempering.

Statistical assertions compare against analytic values (cumulants are
verified elsewhere against closed forms) with bounds of five standard
errors, so spurious failures are one-in-millions events at the fixed
seeds.  The pathwise tempering density test is exact, not statistical.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from levy_emm import (
    FiniteAtomic,
    LevyTriplet,
    PenaltyFamily,
    SimConfig,
    SamplePack,
    cumulant,
    cumulant_derivative,
    entropy_estimate,
    esscher_entropy,
    martingale_defect,
    pathwise_log_zn,
    perturbed_triplet,
    sample_terminal,
    solve_linear_emm,
)
from levy_emm.errors import DegenerateWeights, MissingJumpRecords


def _mgf_z(pack, t, k):
    """z-score of the empirical mgf against ``exp(T c(k))``."""
    w = np.exp(k * pack.values)
    se = w.std(ddof=1) / math.sqrt(w.size)
    want = math.exp(pack.T * cumulant(t, k).value)
    return (w.mean() - want) / se


@pytest.fixture(scope="module")
def kou_pack(kou):
    return sample_terminal(kou, SimConfig(T=1.0, n_samples=200_000, seed=7))


@pytest.fixture(scope="module")
def outer_atom():
    return LevyTriplet(0.0, 0.0, FiniteAtomic(((2.0, 0.5), (-0.5, 1.0))))


@pytest.fixture(scope="module")
def outer_atom_pack(outer_atom):
    return sample_terminal(
        outer_atom, SimConfig(T=1.0, n_samples=20_000, seed=2,
                              record_jumps=True))


class TestSimConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SimConfig(T=0.0, n_samples=10)
        with pytest.raises(ValueError):
            SimConfig(T=1.0, n_samples=0)
        with pytest.raises(ValueError):
            SimConfig(T=1.0, n_samples=10.5)
        with pytest.raises(ValueError):
            SimConfig(T=1.0, n_samples=10, epsilon=0.0)
        with pytest.raises(ValueError):
            SimConfig(T=1.0, n_samples=10, epsilon=1.5)
        with pytest.raises(ValueError):
            SimConfig(T=1.0, n_samples=10, small_jump_mode="exact")


class TestReproducibility:
    def test_worker_count_does_not_change_draws(self, kou, monkeypatch):
        cfg = SimConfig(T=1.0, n_samples=3 * 8192 + 100, seed=42,
                        record_jumps=True)
        monkeypatch.setenv("LEVY_EMM_THREADS", "1")
        serial = sample_terminal(kou, cfg)
        monkeypatch.setenv("LEVY_EMM_THREADS", "4")
        threaded = sample_terminal(kou, cfg)
        assert np.array_equal(serial.values, threaded.values)
        assert all(np.array_equal(a, b) for a, b in
                   zip(serial.jump_records, threaded.jump_records))

    def test_seed_controls_the_draws(self, kou):
        a = sample_terminal(kou, SimConfig(T=1.0, n_samples=1000, seed=5))
        b = sample_terminal(kou, SimConfig(T=1.0, n_samples=1000, seed=5))
        c = sample_terminal(kou, SimConfig(T=1.0, n_samples=1000, seed=6))
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)

    def test_pack_shape(self, kou):
        pack = sample_terminal(kou, SimConfig(T=2.0, n_samples=300, seed=1,
                                              record_jumps=True))
        assert isinstance(pack, SamplePack)
        assert pack.n == 300 and pack.values.shape == (300,)
        assert pack.T == 2.0 and pack.seed == 1
        assert len(pack.jump_records) == 300
        assert all(r.ndim == 2 and r.shape[1] == 2 for r in pack.jump_records)


class TestDistributions:
    def test_brownian_exact_moments(self):
        t = LevyTriplet(0.05, 0.09, FiniteAtomic(()))
        pack = sample_terminal(t, SimConfig(T=4.0, n_samples=200_000, seed=11))
        v = pack.values
        mean_se = v.std(ddof=1) / math.sqrt(v.size)
        assert abs(v.mean() - 0.2) <= 5 * mean_se
        var_se = 0.36 * math.sqrt(2.0 / (v.size - 1))
        assert abs(v.var(ddof=1) - 0.36) <= 5 * var_se
        assert abs(_mgf_z(pack, t, 1.0)) <= 5

    def test_atom_jump_counts_and_sizes(self, two_atom):
        pack = sample_terminal(
            two_atom, SimConfig(T=1.5, n_samples=20_000, seed=3,
                                record_jumps=True))
        counts = np.array([r.shape[0] for r in pack.jump_records])
        lam = 2.0 * 1.5  # total atomic mass times horizon
        assert abs(counts.mean() - lam) <= 5 * math.sqrt(lam / counts.size)
        sizes = np.concatenate([r[:, 1] for r in pack.jump_records])
        assert set(np.unique(np.abs(sizes))) == {0.5}
        for r in pack.jump_records[:50]:
            times = r[:, 0]
            assert np.all((0 <= times) & (times <= 1.5))
            assert np.all(np.diff(times) >= 0)

    def test_empirical_mgf_kou(self, kou):
        pack = sample_terminal(kou, SimConfig(T=1.0, n_samples=200_000, seed=7))
        for k in (0.5, 1.0):
            assert abs(_mgf_z(pack, kou, k)) <= 5

    def test_empirical_mgf_merton(self, merton):
        pack = sample_terminal(merton,
                               SimConfig(T=1.0, n_samples=150_000, seed=9))
        assert abs(_mgf_z(pack, merton, 1.0)) <= 5

    def test_empirical_mgf_vg_and_cgmy(self, vg, cgmy_y05):
        for t in (vg, cgmy_y05):
            pack = sample_terminal(t, SimConfig(T=1.0, n_samples=150_000,
                                                seed=5))
            assert abs(_mgf_z(pack, t, 1.0)) <= 5

    def test_empirical_mgf_tempered(self, stable08):
        pert = perturbed_triplet(stable08, PenaltyFamily.default_quadratic(), 4)
        pack = sample_terminal(pert, SimConfig(T=1.0, n_samples=150_000,
                                               seed=13))
        assert np.isfinite(pack.values).all()
        assert abs(_mgf_z(pack, pert, 0.5)) <= 5

    def test_small_jump_remainder_modes(self, vg):
        full_var = 1.0 / 81.0 + 1.0 / 36.0  # T * int x^2 nu for these rates
        removed = (integrate.quad(lambda x: x * math.exp(-9 * x), 0, 0.3)[0]
                   + integrate.quad(lambda x: x * math.exp(-6 * x), 0, 0.3)[0])
        shared = dict(T=1.0, n_samples=150_000, seed=3, epsilon=0.3)
        matched = sample_terminal(vg, SimConfig(**shared))
        dropped = sample_terminal(vg, SimConfig(small_jump_mode="drop",
                                                **shared))
        assert abs(matched.values.var(ddof=1) - full_var) <= 2e-3
        assert abs(dropped.values.var(ddof=1) - (full_var - removed)) <= 2e-3


class TestEstimators:
    def test_defect_vanishes_at_the_tilt_root(self, kou, kou_pack):
        k0 = solve_linear_emm(kou, 1.0).kappa0
        est, se = martingale_defect(kou_pack, k0)
        assert se > 0.0
        assert abs(est) <= 5 * se

    def test_defect_at_zero_is_the_mean_rate(self, kou, kou_pack):
        est, se = martingale_defect(kou_pack, 0.0)
        want = cumulant_derivative(kou, 0.0).value  # times T = 1
        assert abs(est - want) <= 5 * se

    def test_entropy_estimate_matches_analytic(self, kou, kou_pack):
        k0 = solve_linear_emm(kou, 1.0).kappa0
        est, se = entropy_estimate(kou_pack, k0)
        want = esscher_entropy(kou, 1.0, k0)
        assert abs(est - want) <= 5 * se
        assert abs(est - want) <= 0.02 * want

    def test_entropy_at_zero_tilt(self, kou_pack):
        assert entropy_estimate(kou_pack, 0.0) == (0.0, 0.0)

    def test_degenerate_weights_guard(self, merton):
        pack = sample_terminal(merton,
                               SimConfig(T=1.0, n_samples=50_000, seed=1))
        with pytest.raises(DegenerateWeights):
            martingale_defect(pack, 50.0)
        with pytest.raises(DegenerateWeights):
            entropy_estimate(pack, 50.0)


class TestPathwiseZn:
    def test_exact_pathwise_values(self, outer_atom, outer_atom_pack):
        p = PenaltyFamily.default_quadratic()
        out = pathwise_log_zn(outer_atom_pack, p, 4, outer_atom.nu)
        # only the atom at 2 is penalized: rho_4(2) = 1, rho_4(-0.5) = 0
        gap4 = 0.5 * -math.expm1(-1.0)
        want = np.array([gap4 - np.sum(rec[:, 1] == 2.0)
                         for rec in outer_atom_pack.jump_records])
        assert np.max(np.abs(out.log_zn - want)) <= 1e-13

    def test_unit_mean_and_uniform_bound(self, outer_atom, outer_atom_pack):
        p = PenaltyFamily.default_quadratic()
        out = pathwise_log_zn(outer_atom_pack, p, 4, outer_atom.nu)
        assert abs(out.zn_mean - 1.0) <= 5 * out.zn_se
        want_bound = math.exp(0.5 * -math.expm1(-4.0))
        assert math.isclose(out.uniform_bound, want_bound, rel_tol=1e-12)
        assert np.all(np.exp(out.log_zn) <= out.uniform_bound * (1 + 1e-12))

    def test_records_required(self, outer_atom):
        pack = sample_terminal(outer_atom,
                               SimConfig(T=1.0, n_samples=100, seed=2))
        p = PenaltyFamily.default_quadratic()
        with pytest.raises(MissingJumpRecords):
            pathwise_log_zn(pack, p, 4, outer_atom.nu)

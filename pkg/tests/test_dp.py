from __future__ import annotations

import numpy as np
import pytest
import scipy.stats

from civicdp import dp
from civicdp.dataset import generate_synthetic
from civicdp.errors import BudgetExceeded, EpsilonOutsideSafeRange, NoisingNoisyData
from conftest import make_store


class TestSampleLaplace:
    def test_inverse_cdf_median_is_zero(self):
        assert dp.laplace_inverse_cdf(0.0, 10.0) == 0.0

    def test_inverse_cdf_is_antisymmetric(self):
        u = np.linspace(-0.49, 0.49, 99)
        x = dp.laplace_inverse_cdf(u, 3.0)
        assert np.allclose(x, -x[::-1], atol=1e-12)

    def test_analytic_moments(self):
        # E|X| = b, Var = 2 b^2
        x = dp.sample_laplace(10.0, 200_000, seed=1234)
        assert abs(np.abs(x).mean() - 10.0) / 10.0 < 0.02
        assert abs(x.var() - 200.0) / 200.0 < 0.03

    def test_deterministic_for_fixed_seed(self):
        a = dp.sample_laplace(2.5, 1000, seed=99)
        b = dp.sample_laplace(2.5, 1000, seed=99)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, dp.sample_laplace(2.5, 1000, seed=100))

    def test_mechanism_matches_free_function(self):
        mech = dp.LaplaceMechanism(scale=2.5, seed=99)
        assert np.array_equal(mech.sample(1000), dp.sample_laplace(2.5, 1000, 99))

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            dp.sample_laplace(0.0, 10, seed=0)
        with pytest.raises(ValueError):
            dp.sample_laplace(1.0, 0, seed=0)
        with pytest.raises(ValueError):
            dp.sample_laplace(1.0, 10, seed=-1)

    @pytest.mark.parametrize("b, seed", [(0.5, 11), (5.0, 12), (100.0, 13)])
    def test_goodness_of_fit(self, b, seed):
        x = dp.sample_laplace(b, 100_000, seed=seed)
        result = scipy.stats.kstest(x, "laplace", args=(0.0, b))
        assert result.pvalue >= 0.001

    def test_lag_one_autocorrelation_near_zero(self):
        x = dp.sample_laplace(1.0, 100_000, seed=21)
        centered = x - x.mean()
        rho = float((centered[:-1] @ centered[1:]) / (centered @ centered))
        assert abs(rho) < 0.01


class TestPrivatize:
    def test_structure_and_ledger(self):
        store = make_store(np.zeros((200, 144)), 0.0, 10.0)
        ledger = dp.BudgetLedger(total_budget=4.0)
        noisy = dp.privatize(store, store.root(), 2.0, 10.0, ledger, seed=7)
        assert noisy.payload.shape == (200, 144)
        assert noisy.version_id == 1
        assert noisy.parent_id == 0
        assert noisy.provenance.epsilon_used == 2.0
        assert noisy.provenance.seed == 7
        assert ledger.spent == 2.0

    def test_budget_exceeded(self):
        store = make_store(np.zeros((2, 3)), 0.0, 10.0)
        ledger = dp.BudgetLedger(total_budget=4.0)
        dp.privatize(store, store.root(), 2.0, 10.0, ledger, seed=1)
        dp.privatize(store, store.root(), 1.5, 10.0, ledger, seed=2)
        with pytest.raises(BudgetExceeded):
            dp.privatize(store, store.root(), 1.0, 10.0, ledger, seed=3)

    def test_rejection_leaves_state_unchanged(self):
        store = make_store(np.zeros((2, 3)), 0.0, 10.0)
        ledger = dp.BudgetLedger(total_budget=1.0)
        dp.privatize(store, store.root(), 1.0, 10.0, ledger, seed=1)
        spent_before, versions_before = ledger.spent, len(store)
        with pytest.raises(BudgetExceeded):
            dp.privatize(store, store.root(), 0.5, 10.0, ledger, seed=2)
        assert ledger.spent == spent_before
        assert len(store) == versions_before

    def test_epsilon_outside_safe_range(self):
        store = make_store(np.zeros((2, 3)), 0.0, 10.0)
        ledger = dp.BudgetLedger()
        with pytest.raises(EpsilonOutsideSafeRange):
            dp.privatize(store, store.root(), 0.05, 10.0, ledger, seed=1)
        with pytest.raises(EpsilonOutsideSafeRange):
            dp.privatize(store, store.root(), 2.5, 10.0, ledger, seed=1)

    def test_noise_never_compounds(self):
        store = make_store(np.zeros((2, 3)), 0.0, 10.0)
        ledger = dp.BudgetLedger()
        noisy = dp.privatize(store, store.root(), 1.0, 10.0, ledger, seed=1)
        with pytest.raises(NoisingNoisyData):
            dp.privatize(store, noisy, 1.0, 10.0, ledger, seed=2)

    def test_original_untouched(self):
        store = make_store(np.full((3, 4), 5.0), 0.0, 10.0)
        before = store.root().payload.checksum()
        dp.privatize(store, store.root(), 1.0, 10.0, dp.BudgetLedger(), seed=4)
        assert store.root().payload.checksum() == before

    def test_empirical_mae_matches_scale(self):
        values = generate_synthetic(200, 1, seed=0).values
        store = make_store(values, 0.0, 10_000.0)
        noisy = dp.privatize(store, store.root(), 1.0, 10.0, dp.BudgetLedger(), seed=5)
        mae = np.abs(noisy.payload.values - store.root().payload.values).mean()
        assert abs(mae - 10.0) / 10.0 < 0.05

    def test_noisy_values_not_reclamped(self):
        # at a strong privacy level the noise dwarfs the clamp range
        store = make_store(np.full((50, 50), 5.0), 0.0, 10.0)
        noisy = dp.privatize(store, store.root(), 0.1, 10.0, dp.BudgetLedger(), seed=6)
        assert noisy.payload.values.min() < 0.0 or noisy.payload.values.max() > 10.0

    def test_same_seed_same_noise(self):
        store_a = make_store(np.zeros((4, 5)), 0.0, 10.0)
        store_b = make_store(np.zeros((4, 5)), 0.0, 10.0)
        a = dp.privatize(store_a, store_a.root(), 1.0, 10.0, dp.BudgetLedger(), seed=11)
        b = dp.privatize(store_b, store_b.root(), 1.0, 10.0, dp.BudgetLedger(), seed=11)
        assert np.array_equal(a.payload.values, b.payload.values)

    def test_scale_law_doubling_epsilon_halves_mae(self):
        store = make_store(np.zeros((400, 300)), 0.0, 10.0)  # 120k cells
        ledger = dp.BudgetLedger(total_budget=4.0)
        mae_1 = np.abs(
            dp.privatize(store, store.root(), 1.0, 10.0, ledger, seed=8).payload.values
        ).mean()
        mae_2 = np.abs(
            dp.privatize(store, store.root(), 2.0, 10.0, ledger, seed=9).payload.values
        ).mean()
        assert abs(mae_1 / mae_2 - 2.0) / 2.0 < 0.05


class TestBudgetLedger:
    def test_fresh_ledger(self):
        ledger = dp.BudgetLedger(total_budget=4.0)
        assert dp.remaining_budget(ledger) == 4.0
        assert ledger.spent == 0.0

    def test_sequential_composition_arithmetic(self):
        store = make_store(np.zeros((1, 2)), 0.0, 1.0)
        ledger = dp.BudgetLedger(total_budget=4.0)
        dp.privatize(store, store.root(), 2.0, 1.0, ledger, seed=0)
        dp.privatize(store, store.root(), 1.5, 1.0, ledger, seed=1)
        assert ledger.spent == 3.5
        assert dp.remaining_budget(ledger) == 0.5

    def test_rejected_release_keeps_remaining(self):
        ledger = dp.BudgetLedger(total_budget=1.0)
        with pytest.raises(BudgetExceeded):
            ledger.record(2.0, version_id=1)
        assert dp.remaining_budget(ledger) == 1.0
        assert ledger.entries == []

    def test_entry_records_version(self):
        ledger = dp.BudgetLedger(total_budget=4.0)
        entry = ledger.record(1.0, version_id=3)
        assert entry.version_id == 3
        assert ledger.entries[0].epsilon == 1.0

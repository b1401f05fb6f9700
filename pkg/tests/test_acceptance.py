"""Acceptance suite: one test per release criterion, each at its stated
tolerance, printing a `[PASS]` line with the measured values.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines.
"""

from __future__ import annotations

import itertools
import json
import random
import time

import numpy as np
import pytest
import scipy.stats

from civicdp import analysis, dp, mcda
from civicdp.cli import main
from civicdp.dataset import ClampBounds, generate_synthetic, to_csv_bytes
from civicdp.errors import BudgetExceeded, NoDatasetUploaded, NoSelection
from civicdp.explain import template_score
from civicdp.service.config import ServiceConfig
from civicdp.service.sessions import SessionManager
from conftest import make_store
from oracles import reference_topsis


def report(criterion: str, detail: str) -> None:
    print(f"[PASS] {criterion}: {detail}")


def test_a01_table_epsilon_mapping_via_cli_profiles(synthetic_csv_path, tmp_path):
    """Canonical profiles select epsilon (0.1, 1.0, 2.0) exactly, in < 10 s."""
    out = tmp_path / "profiles.json"
    start = time.monotonic()
    rc = main(["profiles", str(synthetic_csv_path), "--seed", "0", "--out", str(out)])
    elapsed = time.monotonic() - start
    assert rc == 0
    doc = json.loads(out.read_text())["profiles"]
    selected = [
        doc[name]["selected_epsilon"] for name in ("privacy-first", "balanced", "utility-first")
    ]
    assert selected == [0.1, 1.0, 2.0]
    assert elapsed < 10.0
    report("A1 table epsilon mapping", f"selected={selected} in {elapsed:.2f}s on 200x144 data")


def test_a02_table_privacy_scores_exact():
    """Template provider emits (4.8, 3.2, 2.1) exactly for the anchor budgets."""
    scores = [template_score(e) for e in (0.1, 1.0, 2.0)]
    assert scores == [4.8, 3.2, 2.1]
    report("A2 table privacy scores", f"scores={scores}")


@pytest.fixture(scope="module")
def big_sweep():
    """Sweep over >=100k cells, 20 seeds per point, delta_f = 10."""
    dataset = generate_synthetic(700, 1, seed=12)  # 700 x 144 = 100800 cells
    store = make_store(dataset.values, 0.0, 10.0)
    start = time.monotonic()
    sweep = analysis.sweep_epsilon(
        store.root(), mcda.DEFAULT_GRID, delta_f=10.0, seeds_per_point=20, base_seed=2024
    )
    return sweep, time.monotonic() - start, dataset.values.size


def test_a03_mae_law(big_sweep):
    """Mean MAE within 5% of delta_f/epsilon at every grid point, in < 60 s."""
    sweep, elapsed, cells = big_sweep
    assert cells >= 100_000
    deviations = []
    for eps, observed in zip(sweep.grid, sweep.mae_curve):
        analytic = 10.0 / eps
        deviation = abs(observed - analytic) / analytic
        deviations.append(deviation)
        assert deviation < 0.05
    assert elapsed < 60.0
    report(
        "A3 MAE law",
        f"max deviation {max(deviations):.4%} over grid {list(sweep.grid)} "
        f"({cells} cells, 20 seeds/point, {elapsed:.1f}s)",
    )


def test_a04_correlation_property(big_sweep):
    """Spearman rho exactly -1.0 and Pearson r <= -0.75 on the sweep."""
    sweep, _, _ = big_sweep
    assert sweep.spearman_rho == -1.0
    assert sweep.pearson_r <= -0.75
    report(
        "A4 correlation property",
        f"spearman={sweep.spearman_rho} pearson={sweep.pearson_r:.4f}",
    )


def test_a05_topsis_oracle_equivalence():
    """1000 random matrices match the independently coded TOPSIS within 1e-9, < 5 s."""
    rng = np.random.default_rng(314159)
    start = time.monotonic()
    worst = 0.0
    for _ in range(1000):
        values = rng.uniform(0.0, 10.0, size=(5, 4))
        orientations = rng.choice(["benefit", "cost"], size=4)
        criteria = tuple(mcda.Criterion(f"c{j}", orientations[j]) for j in range(4))
        alternatives = tuple(sorted(rng.uniform(0.1, 2.0, size=5).tolist()))
        raw = rng.uniform(0.05, 1.0, size=4)
        weights = mcda.CriterionWeights(*(raw / raw.sum()).tolist())
        matrix = mcda.DecisionMatrix(alternatives, criteria, values)
        observed = mcda.topsis_select(matrix, weights).closeness
        expected = reference_topsis(
            values.tolist(), weights.as_array().tolist(),
            [c.orientation == "benefit" for c in criteria],
        )
        worst = max(worst, float(np.max(np.abs(np.array(observed) - np.array(expected)))))
        assert worst <= 1e-9
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    report("A5 TOPSIS oracle equivalence", f"1000 matrices, worst gap {worst:.2e}, {elapsed:.1f}s")


def test_a06_laplace_distribution():
    """K-S goodness of fit at alpha=0.001 and variance within 3% of 2 b^2, < 10 s."""
    start = time.monotonic()
    details = []
    for b, seed in ((0.5, 101), (5.0, 102), (100.0, 103)):
        x = dp.sample_laplace(b, 100_000, seed=seed)
        ks = scipy.stats.kstest(x, "laplace", args=(0.0, b))
        assert ks.pvalue >= 0.001
        var_err = abs(x.var() - 2 * b * b) / (2 * b * b)
        assert var_err < 0.03
        details.append(f"b={b}: p={ks.pvalue:.3f}, var err {var_err:.3%}")
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    report("A6 Laplace distribution", "; ".join(details) + f" ({elapsed:.1f}s)")


def test_a07_budget_safety_random_sequences():
    """>= 500 random request sequences never drive spend above the budget."""
    manager = SessionManager(ServiceConfig())
    csv_small = to_csv_bytes(generate_synthetic(2, 1, seed=0))
    rng = random.Random(20240915)
    rejected = 0
    for _ in range(500):
        session = manager.create_session(total_budget=rng.choice([0.3, 1.0, 2.0, 4.0, 5.5]))
        session.upload_dataset(csv_small, ClampBounds(0.0, 10.0))
        for _ in range(rng.randint(1, 7)):
            op = rng.random()
            spent_before = session.ledger.spent
            versions_before = len(session.store)
            try:
                if op < 0.4:
                    session.set_preferences(
                        mcda.PreferenceProfile(
                            rng.randint(1, 5), rng.randint(1, 5),
                            rng.random() < 0.5, rng.randint(1, 3),
                        )
                    )
                else:
                    session.execute_release(seed=rng.getrandbits(32))
            except BudgetExceeded:
                rejected += 1
                assert session.ledger.spent == spent_before
                assert len(session.store) == versions_before
            except (NoSelection, NoDatasetUploaded):
                pass
            assert session.ledger.spent <= session.ledger.total_budget
    assert rejected > 0  # the scenario space must actually exercise the limit
    report("A7 budget safety", f"500 sequences, {rejected} over-budget releases all rejected cleanly")


def test_a08_compliance_cap_dominance():
    """Exhaustive 5x5x3 slider grid respects caps 1.0 and 0.5."""
    checked = 0
    for cap in (1.0, 0.5):
        policy = mcda.CompliancePolicy("test", cap)
        for p, a, s in itertools.product(range(1, 6), range(1, 6), range(1, 4)):
            profile = mcda.PreferenceProfile(p, a, True, s)
            result = mcda.select_epsilon(profile, 10.0, policy)
            assert result.epsilon_star <= cap
            checked += 1
    report("A8 compliance cap dominance", f"{checked} profile/cap combinations respected the cap")


def test_a09_selection_monotonicity():
    """Epsilon* non-increasing in privacy and non-decreasing in accuracy, exhaustively."""
    selections = {}
    for p, a, c, s in itertools.product(range(1, 6), range(1, 6), (False, True), range(1, 4)):
        profile = mcda.PreferenceProfile(p, a, c, s)
        selections[(p, a, c, s)] = mcda.select_epsilon(profile, 10.0).epsilon_star
    comparisons = 0
    for a, c, s in itertools.product(range(1, 6), (False, True), range(1, 4)):
        for p in range(1, 5):
            assert selections[(p + 1, a, c, s)] <= selections[(p, a, c, s)]
            comparisons += 1
    for p, c, s in itertools.product(range(1, 6), (False, True), range(1, 4)):
        for a in range(1, 5):
            assert selections[(p, a + 1, c, s)] >= selections[(p, a, c, s)]
            comparisons += 1
    report("A9 selection monotonicity", f"{comparisons} adjacent-profile comparisons hold")


def test_a10_cli_run_determinism(synthetic_csv_path, tmp_path):
    """`run` with a fixed seed produces byte-identical noisy CSVs."""
    blobs = []
    for sub in ("first", "second"):
        rc = main([
            "run", str(synthetic_csv_path), "--seed", "31337",
            "--out-dir", str(tmp_path / sub),
        ])
        assert rc == 0
        blobs.append((tmp_path / sub / "noisy.csv").read_bytes())
    assert blobs[0] == blobs[1]
    report("A10 CLI determinism", f"two runs, {len(blobs[0])} bytes, identical")

"""Privacy-utility trade-off quantification.

MAE between original and noisy versions, epsilon-sweep curves with analytic
overlays, and correlation statistics, emitted in a chart-ready JSON schema:

    {"grid": [...], "mae": [...], "expected_mae": [...],
     "pearson": x, "spearman": y, "units": "..."}

(the correlation keys are omitted when undefined, i.e. fewer than three grid
points). The CSV export uses the header ``epsilon,mae,expected_mae``.

Sweeps are what-if simulations: they never touch the budget ledger.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import DatasetVersion
from .dp import sample_laplace
from .errors import DegenerateInput, ShapeMismatch, UnrelatedVersions
from .mcda import validate_grid

DEFAULT_SEEDS_PER_POINT = 20
_MAX_SEED = 2 ** 64


@dataclass(frozen=True)
class UtilityReport:
    """Observed error of one noisy release against its original."""

    epsilon: float
    mae: float
    expected_mae: float
    per_series_mae: tuple[float, ...]
    max_abs_error: float

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "mae": self.mae,
            "expected_mae": self.expected_mae,
            "per_series_mae": list(self.per_series_mae),
            "max_abs_error": self.max_abs_error,
        }


@dataclass(frozen=True)
class SweepResult:
    """Mean MAE per grid point, averaged over several seeds."""

    grid: tuple[float, ...]
    mae_curve: tuple[float, ...]
    expected_curve: tuple[float, ...]
    pearson_r: Optional[float]
    spearman_rho: Optional[float]
    seeds_per_point: int
    unit_label: str = ""


@dataclass(frozen=True)
class CorrelationResult:
    pearson: float
    spearman: float


def compute_mae(original: DatasetVersion, noisy: DatasetVersion) -> UtilityReport:
    """Exact mean absolute difference over all cells.

    ``noisy`` must be a direct fork of ``original``; the expected MAE comes
    from its provenance (delta_f / epsilon).
    """
    if noisy.provenance is None or noisy.parent_id != original.version_id:
        raise UnrelatedVersions(
            f"version {noisy.version_id} is not a direct noisy fork of version {original.version_id}"
        )
    if original.payload.shape != noisy.payload.shape:
        raise ShapeMismatch(
            f"shapes differ: {original.payload.shape} vs {noisy.payload.shape}"
        )
    diff = np.abs(original.payload.values - noisy.payload.values)
    prov = noisy.provenance
    return UtilityReport(
        epsilon=prov.epsilon_used,
        mae=float(diff.mean()),
        expected_mae=prov.delta_f / prov.epsilon_used,
        per_series_mae=tuple(diff.mean(axis=1).tolist()),
        max_abs_error=float(diff.max()),
    )


def sweep_epsilon(
    version: DatasetVersion,
    grid: Sequence[float],
    delta_f: float,
    seeds_per_point: int = DEFAULT_SEEDS_PER_POINT,
    base_seed: int = 0,
) -> SweepResult:
    """Average MAE of simulated releases at every grid point.

    The MAE between a noisy release and its original equals the mean
    absolute noise, so the sweep samples noise directly instead of forking
    dataset versions. Seeds are derived deterministically from ``base_seed``
    and results reduce by grid index, independent of evaluation order.
    """
    alternatives = validate_grid(grid)
    if not delta_f > 0:
        raise ValueError("delta_f must be positive")
    if seeds_per_point < 1:
        raise ValueError("seeds_per_point must be >= 1")
    if not 0 <= base_seed < _MAX_SEED:
        raise ValueError("base_seed must fit in 64 unsigned bits")

    cells = int(version.payload.values.size)
    seed_rng = np.random.default_rng(base_seed)
    seeds = seed_rng.integers(0, 2 ** 63, size=(len(alternatives), seeds_per_point))

    curve = []
    for i, epsilon in enumerate(alternatives):
        scale = delta_f / epsilon
        maes = [
            float(np.abs(sample_laplace(scale, cells, int(seeds[i, k]))).mean())
            for k in range(seeds_per_point)
        ]
        curve.append(float(np.mean(maes)))

    pearson = spearman = None
    if len(alternatives) >= 3:
        stats = correlation(alternatives, curve)
        pearson, spearman = stats.pearson, stats.spearman
    return SweepResult(
        grid=alternatives,
        mae_curve=tuple(curve),
        expected_curve=tuple(delta_f / e for e in alternatives),
        pearson_r=pearson,
        spearman_rho=spearman,
        seeds_per_point=seeds_per_point,
        unit_label=version.payload.unit_label,
    )


def _rank(values: np.ndarray) -> np.ndarray:
    """Average ranks (1-based), ties share the mean of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _pearson(xs: np.ndarray, ys: np.ndarray) -> float:
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    return float((dx @ dy) / np.sqrt((dx @ dx) * (dy @ dy)))


def correlation(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """Pearson product-moment and Spearman rank coefficients."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if len(x) != len(y):
        raise DegenerateInput(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 3:
        raise DegenerateInput("correlation needs at least 3 points")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInput("correlation is undefined for constant input")

    rank_x = _rank(x)
    rank_y = _rank(y)
    n = len(x)
    if len(set(rank_x)) == n and len(set(rank_y)) == n:
        # no ties: the closed form is exact (integer arithmetic), so a strictly
        # monotone relationship yields exactly +/-1
        d_sq = float(((rank_x - rank_y) ** 2).sum())
        spearman = 1.0 - 6.0 * d_sq / (n * (n * n - 1))
    else:
        spearman = _pearson(rank_x, rank_y)
    return CorrelationResult(pearson=_pearson(x, y), spearman=spearman)


def chart_data(sweep: SweepResult) -> dict:
    """Chart document in the documented JSON schema."""
    doc = {
        "grid": list(sweep.grid),
        "mae": list(sweep.mae_curve),
        "expected_mae": list(sweep.expected_curve),
        "units": sweep.unit_label,
    }
    if sweep.pearson_r is not None:
        doc["pearson"] = sweep.pearson_r
    if sweep.spearman_rho is not None:
        doc["spearman"] = sweep.spearman_rho
    return doc


def chart_json(sweep: SweepResult) -> str:
    return json.dumps(chart_data(sweep), indent=2)


def chart_csv(sweep: SweepResult) -> str:
    """CSV export with the ``epsilon,mae,expected_mae`` header."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["epsilon", "mae", "expected_mae"])
    for eps, mae, expected in zip(sweep.grid, sweep.mae_curve, sweep.expected_curve):
        writer.writerow([repr(eps), repr(mae), repr(expected)])
    return out.getvalue()

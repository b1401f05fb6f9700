"""Seedable Laplace mechanism and the per-dataset privacy-budget ledger.

Sampling is inverse-CDF over a seeded PCG64 stream (numpy's default
generator), so every release is bit-reproducible within this implementation.
Budget accounting uses sequential composition: spend is the plain sum of the
epsilons of all recorded releases.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import (
    MECHANISM_LAPLACE,
    DatasetVersion,
    Provenance,
    TimeSeriesDataset,
    VersionStore,
)
from .errors import BudgetExceeded, EpsilonOutsideSafeRange, NoisingNoisyData
from .mcda import SAFE_RANGE

DEFAULT_TOTAL_BUDGET = 4.0
_MAX_SEED = 2 ** 64


def laplace_inverse_cdf(u: np.ndarray | float, b: float) -> np.ndarray | float:
    """Map u in (-1/2, 1/2) to a Laplace(0, b) quantile:
    -b * sign(u) * ln(1 - 2|u|); u = 0 maps to the median 0."""
    return -b * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def sample_laplace(b: float, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` independent Laplace(0, b) samples by inverse CDF."""
    if not b > 0:
        raise ValueError("scale b must be positive")
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 0 <= seed < _MAX_SEED:
        raise ValueError("seed must fit in 64 unsigned bits")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-0.5, 0.5, size=count)
    return laplace_inverse_cdf(u, b)


@dataclass(frozen=True)
class LaplaceMechanism:
    """Laplace noise at scale b = delta_f / epsilon, bound to one seed."""

    scale: float
    seed: int

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if not 0 <= self.seed < _MAX_SEED:
            raise ValueError("seed must fit in 64 unsigned bits")

    def sample(self, count: int) -> np.ndarray:
        return sample_laplace(self.scale, count, self.seed)

    def sample_matrix(self, shape: tuple[int, int]) -> np.ndarray:
        rows, cols = shape
        return self.sample(rows * cols).reshape(rows, cols)


@dataclass(frozen=True)
class BudgetEntry:
    epsilon: float
    version_id: int
    timestamp: float


@dataclass
class BudgetLedger:
    """Cumulative epsilon spend for one dataset under sequential composition."""

    total_budget: float = DEFAULT_TOTAL_BUDGET
    entries: list[BudgetEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.total_budget > 0:
            raise ValueError("total_budget must be positive")

    @property
    def spent(self) -> float:
        return sum(entry.epsilon for entry in self.entries)

    def can_afford(self, epsilon: float) -> bool:
        return self.spent + epsilon <= self.total_budget

    def record(self, epsilon: float, version_id: int) -> BudgetEntry:
        if not self.can_afford(epsilon):
            raise BudgetExceeded(
                f"release of epsilon={epsilon} would exceed the total budget "
                f"{self.total_budget} (already spent {self.spent})"
            )
        entry = BudgetEntry(epsilon=epsilon, version_id=version_id, timestamp=time.time())
        self.entries.append(entry)
        return entry


def remaining_budget(ledger: BudgetLedger) -> float:
    """Budget still available for future releases."""
    return ledger.total_budget - ledger.spent


def privatize(
    store: VersionStore,
    version: DatasetVersion,
    epsilon: float,
    delta_f: float,
    ledger: BudgetLedger,
    seed: int,
) -> DatasetVersion:
    """Perturb every cell of a root version with independent Lap(delta_f/epsilon)
    noise and fork the result as a new version with provenance.

    The ledger gains one entry; a rejected release leaves both the ledger and
    the store unchanged. Noise is only ever applied to raw (root) data, and
    noisy values are intentionally not re-clamped so the observed MAE tracks
    the analytic delta_f/epsilon.
    """
    lo, hi = SAFE_RANGE
    if not lo <= epsilon <= hi:
        raise EpsilonOutsideSafeRange(f"epsilon {epsilon} outside safe range [{lo}, {hi}]")
    if not delta_f > 0:
        raise ValueError("delta_f must be positive")
    if version.provenance is not None:
        raise NoisingNoisyData(
            f"version {version.version_id} is already a noisy release; "
            "noise is only applied to raw data"
        )
    if not ledger.can_afford(epsilon):
        raise BudgetExceeded(
            f"release of epsilon={epsilon} would exceed the total budget "
            f"{ledger.total_budget} (already spent {ledger.spent})"
        )

    mechanism = LaplaceMechanism(scale=delta_f / epsilon, seed=seed)
    payload = version.payload
    noisy = TimeSeriesDataset(
        series_ids=payload.series_ids,
        timestamps=payload.timestamps,
        values=payload.values + mechanism.sample_matrix(payload.shape),
        unit_label=payload.unit_label,
    )
    provenance = Provenance(
        epsilon_used=epsilon, delta_f=delta_f, seed=seed, mechanism=MECHANISM_LAPLACE
    )
    forked = store.fork(version, noisy, provenance)
    ledger.record(epsilon, forked.version_id)
    return forked

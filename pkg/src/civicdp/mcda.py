"""Preference weighting, decision-matrix construction, and TOPSIS selection.

Slider inputs become normalized criterion weights; the candidate privacy
budgets are ranked by relative closeness to the ideal solution and the best
one is selected, optionally under a hard regulatory cap.

Decision-matrix construction (constants recorded in the README):

* privacy protection (benefit): the 1-5 privacy rating, log-linear through
  the anchors (0.1, 4.8), (1.0, 3.2), (2.0, 2.1);
* expected error severity (cost): a 1-5 rating, log-linear in the expected
  per-cell absolute error across the safe range (worst error at 0.1 rates 5,
  best at 2.0 rates 1) -- monotone in the expected MAE and invariant to the
  dataset's sensitivity, so the same sliders select the same budget on any
  upload;
* regulatory fit (benefit): 1 if the candidate respects the policy cap,
  else 0 (all 1 without a policy);
* re-identification risk (cost): sensitivity level times sqrt(epsilon).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyGrid,
    EpsilonOutsideSafeRange,
    GridOutsideSafeRange,
    NoFeasibleAlternative,
)

SAFE_RANGE = (0.1, 2.0)
DEFAULT_GRID = (0.1, 0.5, 1.0, 1.5, 2.0)

COMPLIANCE_RAW_WEIGHT = 3.0
PRIVACY_RATING_ANCHORS = ((0.1, 4.8), (1.0, 3.2), (2.0, 2.1))
ERROR_RATING_RANGE = (1.0, 5.0)
RISK_EXPONENT = 0.5

CRITERIA = ("privacy", "accuracy", "compliance", "sensitivity")

# Closeness gaps below this are ties, broken toward the smaller epsilon.
_TIE_TOL = 1e-12
_CAP_TOL = 1e-9


@dataclass(frozen=True)
class PreferenceProfile:
    """Stakeholder slider settings."""

    privacy: int
    accuracy: int
    compliance_required: bool
    sensitivity: int

    def __post_init__(self) -> None:
        if not 1 <= int(self.privacy) <= 5:
            raise ValueError(f"privacy slider must be in 1..5, got {self.privacy}")
        if not 1 <= int(self.accuracy) <= 5:
            raise ValueError(f"accuracy slider must be in 1..5, got {self.accuracy}")
        if not 1 <= int(self.sensitivity) <= 3:
            raise ValueError(f"sensitivity slider must be in 1..3, got {self.sensitivity}")


@dataclass(frozen=True)
class CriterionWeights:
    """Normalized criterion weights; always sums to 1."""

    privacy: float
    accuracy: float
    compliance: float
    sensitivity: float

    def __post_init__(self) -> None:
        values = self.as_array()
        if np.any(values < 0):
            raise ValueError("weights must be non-negative")
        if abs(float(values.sum()) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {values.sum()!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.privacy, self.accuracy, self.compliance, self.sensitivity])


@dataclass(frozen=True)
class Criterion:
    name: str
    orientation: Literal["benefit", "cost"]

    def __post_init__(self) -> None:
        if self.orientation not in ("benefit", "cost"):
            raise ValueError(f"orientation must be 'benefit' or 'cost', got {self.orientation!r}")


@dataclass(frozen=True, eq=False)
class DecisionMatrix:
    """Alternatives (rows) scored against criteria (columns).

    ``expected_mae`` carries the analytic per-cell error for each alternative
    for display purposes; it is not a criterion.
    """

    alternatives: tuple[float, ...]
    criteria: tuple[Criterion, ...]
    values: np.ndarray
    expected_mae: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape != (len(self.alternatives), len(self.criteria)):
            raise DimensionMismatch(
                f"values shape {values.shape} does not match "
                f"{len(self.alternatives)} alternatives x {len(self.criteria)} criteria"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix values must be finite")
        if np.any(values < 0):
            raise ValueError("matrix values must be non-negative")
        if self.expected_mae and len(self.expected_mae) != len(self.alternatives):
            raise DimensionMismatch("expected_mae length must match alternatives")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def orientations(self) -> np.ndarray:
        return np.array([c.orientation == "benefit" for c in self.criteria])


@dataclass(frozen=True)
class CompliancePolicy:
    """A named regulatory cap on the privacy budget."""

    name: str
    epsilon_cap: float
    description: str = ""

    def __post_init__(self) -> None:
        lo, hi = SAFE_RANGE
        if not lo <= self.epsilon_cap <= hi:
            raise ValueError(f"epsilon_cap must be within [{lo}, {hi}], got {self.epsilon_cap}")


def load_policies(path: Optional[Path] = None) -> dict[str, CompliancePolicy]:
    """Load compliance policies from a JSON file (the packaged defaults when
    no path is given), keyed by name."""
    if path is None:
        text = resources.files("civicdp").joinpath("data/default_policies.json").read_text()
    else:
        text = Path(path).read_text()
    records = json.loads(text)
    policies = {}
    for record in records:
        policy = CompliancePolicy(
            name=record["name"],
            epsilon_cap=float(record["epsilon_cap"]),
            description=record.get("description", ""),
        )
        policies[policy.name] = policy
    return policies


@dataclass(frozen=True)
class SelectionResult:
    """Chosen budget plus per-alternative diagnostics."""

    epsilon_star: float
    closeness: tuple[float, ...]
    d_plus: tuple[float, ...]
    d_minus: tuple[float, ...]
    cap_applied: Optional[float]
    weights_used: CriterionWeights
    matrix: DecisionMatrix


def normalize_weights(profile: PreferenceProfile) -> CriterionWeights:
    """Raw slider values (compliance contributes 3 when required, else 0)
    divided by their sum."""
    raw = np.array(
        [
            float(profile.privacy),
            float(profile.accuracy),
            COMPLIANCE_RAW_WEIGHT if profile.compliance_required else 0.0,
            float(profile.sensitivity),
        ]
    )
    weights = raw / raw.sum()
    return CriterionWeights(*weights.tolist())


def privacy_rating(epsilon: float) -> float:
    """1-5 privacy protection rating, log-linear through the fixed anchors."""
    lo, hi = SAFE_RANGE
    if not lo <= epsilon <= hi:
        raise EpsilonOutsideSafeRange(f"epsilon {epsilon} outside safe range [{lo}, {hi}]")
    anchors = PRIVACY_RATING_ANCHORS
    for (e0, s0), (e1, s1) in zip(anchors, anchors[1:]):
        if epsilon <= e1 or (e1, s1) == anchors[-1]:
            if epsilon == e0:
                return s0
            if epsilon == e1:
                return s1
            frac = (math.log(epsilon) - math.log(e0)) / (math.log(e1) - math.log(e0))
            return s0 + (s1 - s0) * frac
    raise AssertionError("unreachable")


def error_severity_rating(epsilon: float) -> float:
    """1-5 error severity rating, log-linear in expected MAE over the safe range.

    The expected per-cell error is delta_f/epsilon; the rating depends only on
    error ratios, so the dataset's delta_f cancels out.
    """
    lo, hi = SAFE_RANGE
    if not lo <= epsilon <= hi:
        raise EpsilonOutsideSafeRange(f"epsilon {epsilon} outside safe range [{lo}, {hi}]")
    r_lo, r_hi = ERROR_RATING_RANGE
    span = math.log(hi / lo)
    return r_lo + (r_hi - r_lo) * math.log(hi / epsilon) / span


def validate_grid(grid: Sequence[float]) -> tuple[float, ...]:
    """Shared grid validation: nonempty, strictly increasing, in the safe range."""
    values = tuple(float(e) for e in grid)
    if not values:
        raise EmptyGrid("epsilon grid is empty")
    lo, hi = SAFE_RANGE
    for e in values:
        if not lo <= e <= hi:
            raise GridOutsideSafeRange(f"epsilon {e} outside safe range [{lo}, {hi}]")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("epsilon grid must be strictly increasing")
    return values


def build_decision_matrix(
    grid: Sequence[float],
    delta_f: float,
    sensitivity: int,
    policy: Optional[CompliancePolicy] = None,
) -> DecisionMatrix:
    """Score every candidate epsilon against the four criteria."""
    alternatives = validate_grid(grid)
    if not delta_f > 0:
        raise ValueError("delta_f must be positive")
    if not 1 <= int(sensitivity) <= 3:
        raise ValueError(f"sensitivity must be in 1..3, got {sensitivity}")

    cap = policy.epsilon_cap if policy is not None else None
    columns = np.column_stack(
        [
            [privacy_rating(e) for e in alternatives],
            [error_severity_rating(e) for e in alternatives],
            [1.0 if cap is None or e <= cap + _CAP_TOL else 0.0 for e in alternatives],
            [float(sensitivity) * e ** RISK_EXPONENT for e in alternatives],
        ]
    )
    criteria = (
        Criterion("privacy_protection", "benefit"),
        Criterion("expected_error", "cost"),
        Criterion("compliance", "benefit"),
        Criterion("reidentification_risk", "cost"),
    )
    expected_mae = tuple(delta_f / e for e in alternatives)
    return DecisionMatrix(
        alternatives=alternatives,
        criteria=criteria,
        values=columns,
        expected_mae=expected_mae,
    )


def _closeness(matrix: DecisionMatrix, weights: CriterionWeights) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    w = weights.as_array()
    if len(matrix.criteria) != len(w):
        raise DimensionMismatch(
            f"matrix has {len(matrix.criteria)} criteria but {len(w)} weights were given"
        )
    x = matrix.values
    norms = np.sqrt((x ** 2).sum(axis=0))
    # all-zero columns skip normalization and stay zero
    safe = np.where(norms == 0.0, 1.0, norms)
    v = (x / safe) * w
    benefit = matrix.orientations
    ideal = np.where(benefit, v.max(axis=0), v.min(axis=0))
    anti = np.where(benefit, v.min(axis=0), v.max(axis=0))
    d_plus = np.sqrt(((v - ideal) ** 2).sum(axis=1))
    d_minus = np.sqrt(((v - anti) ** 2).sum(axis=1))
    denom = d_plus + d_minus
    closeness = np.divide(d_minus, denom, out=np.zeros_like(denom), where=denom > 0)
    return closeness, d_plus, d_minus


def _argmax_smallest(
    alternatives: Sequence[float],
    closeness: np.ndarray,
    eligible: Optional[np.ndarray] = None,
) -> float:
    if eligible is None:
        eligible = np.ones(len(alternatives), dtype=bool)
    if not eligible.any():
        raise NoFeasibleAlternative("no alternative satisfies the compliance cap")
    best = closeness[eligible].max()
    tied = [e for e, c, ok in zip(alternatives, closeness, eligible) if ok and c >= best - _TIE_TOL]
    return min(tied)


def topsis_select(matrix: DecisionMatrix, weights: CriterionWeights) -> SelectionResult:
    """Canonical TOPSIS: vector-normalize, weight, measure Euclidean distance
    to the ideal and anti-ideal solutions, rank by relative closeness.

    Ties in closeness break toward the smallest epsilon.
    """
    closeness, d_plus, d_minus = _closeness(matrix, weights)
    epsilon_star = _argmax_smallest(matrix.alternatives, closeness)
    return SelectionResult(
        epsilon_star=epsilon_star,
        closeness=tuple(closeness.tolist()),
        d_plus=tuple(d_plus.tolist()),
        d_minus=tuple(d_minus.tolist()),
        cap_applied=None,
        weights_used=weights,
        matrix=matrix,
    )


def select_epsilon(
    profile: PreferenceProfile,
    delta_f: float,
    policy: Optional[CompliancePolicy] = None,
    grid: Sequence[float] = DEFAULT_GRID,
) -> SelectionResult:
    """Full selection pipeline for one profile.

    When compliance is required and a policy is given, alternatives above the
    cap keep their closeness scores (the indicator column already steers the
    ranking) but are removed from argmax eligibility, so the cap always holds.
    """
    weights = normalize_weights(profile)
    matrix = build_decision_matrix(grid, delta_f, profile.sensitivity, policy)
    closeness, d_plus, d_minus = _closeness(matrix, weights)

    cap_applied: Optional[float] = None
    eligible = None
    if profile.compliance_required and policy is not None:
        cap_applied = policy.epsilon_cap
        eligible = np.array([e <= cap_applied + _CAP_TOL for e in matrix.alternatives])
    epsilon_star = _argmax_smallest(matrix.alternatives, closeness, eligible)
    return SelectionResult(
        epsilon_star=epsilon_star,
        closeness=tuple(closeness.tolist()),
        d_plus=tuple(d_plus.tolist()),
        d_minus=tuple(d_minus.tolist()),
        cap_applied=cap_applied,
        weights_used=weights,
        matrix=matrix,
    )

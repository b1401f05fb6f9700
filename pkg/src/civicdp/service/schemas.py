"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from .. import analysis, mcda
from ..dataset import DatasetVersion
from .sessions import ReleaseOutcome, Session

_MAX_SEED = 2 ** 64


class ApiError(BaseModel):
    code: str
    message: str
    retryable: bool


class CreateSessionRequest(BaseModel):
    total_budget: Optional[float] = Field(default=None, gt=0)
    policy_name: Optional[str] = None


class PolicyOut(BaseModel):
    name: str
    epsilon_cap: float
    description: str = ""


class SessionOut(BaseModel):
    session_id: str
    total_budget: float
    spent: float
    remaining: float
    policy: Optional[PolicyOut] = None

    @classmethod
    def from_session(cls, session: Session) -> "SessionOut":
        policy = None
        if session.policy is not None:
            policy = PolicyOut(
                name=session.policy.name,
                epsilon_cap=session.policy.epsilon_cap,
                description=session.policy.description,
            )
        return cls(
            session_id=session.session_id,
            total_budget=session.ledger.total_budget,
            spent=session.ledger.spent,
            remaining=session.ledger.total_budget - session.ledger.spent,
            policy=policy,
        )


class UploadOut(BaseModel):
    version_id: int
    shape: tuple[int, int]
    delta_f: float


class PreferencesIn(BaseModel):
    privacy: int = Field(ge=1, le=5)
    accuracy: int = Field(ge=1, le=5)
    compliance_required: bool
    sensitivity: int = Field(ge=1, le=3)

    def to_profile(self) -> mcda.PreferenceProfile:
        return mcda.PreferenceProfile(
            privacy=self.privacy,
            accuracy=self.accuracy,
            compliance_required=self.compliance_required,
            sensitivity=self.sensitivity,
        )


class CriterionOut(BaseModel):
    name: str
    orientation: Literal["benefit", "cost"]


class MatrixOut(BaseModel):
    alternatives: list[float]
    criteria: list[CriterionOut]
    values: list[list[float]]
    expected_mae: list[float]


class WeightsOut(BaseModel):
    privacy: float
    accuracy: float
    compliance: float
    sensitivity: float


class SelectionOut(BaseModel):
    epsilon_star: float
    closeness: list[float]
    d_plus: list[float]
    d_minus: list[float]
    cap_applied: Optional[float]
    weights: WeightsOut
    matrix: MatrixOut

    @classmethod
    def from_selection(cls, selection: mcda.SelectionResult) -> "SelectionOut":
        matrix = selection.matrix
        return cls(
            epsilon_star=selection.epsilon_star,
            closeness=list(selection.closeness),
            d_plus=list(selection.d_plus),
            d_minus=list(selection.d_minus),
            cap_applied=selection.cap_applied,
            weights=WeightsOut(
                privacy=selection.weights_used.privacy,
                accuracy=selection.weights_used.accuracy,
                compliance=selection.weights_used.compliance,
                sensitivity=selection.weights_used.sensitivity,
            ),
            matrix=MatrixOut(
                alternatives=list(matrix.alternatives),
                criteria=[
                    CriterionOut(name=c.name, orientation=c.orientation) for c in matrix.criteria
                ],
                values=matrix.values.tolist(),
                expected_mae=list(matrix.expected_mae),
            ),
        )


class ReleaseIn(BaseModel):
    seed: Optional[int] = Field(default=None, ge=0, lt=_MAX_SEED)


class VersionOut(BaseModel):
    version_id: int
    parent_id: Optional[int]
    shape: tuple[int, int]
    epsilon_used: Optional[float] = None
    seed: Optional[int] = None
    mechanism: Optional[str] = None

    @classmethod
    def from_version(cls, version: DatasetVersion) -> "VersionOut":
        prov = version.provenance
        return cls(
            version_id=version.version_id,
            parent_id=version.parent_id,
            shape=version.payload.shape,
            epsilon_used=prov.epsilon_used if prov else None,
            seed=prov.seed if prov else None,
            mechanism=prov.mechanism if prov else None,
        )


class UtilityOut(BaseModel):
    epsilon: float
    mae: float
    expected_mae: float
    per_series_mae: list[float]
    max_abs_error: float


class SuggestionOut(BaseModel):
    description: str
    suggested_profile_change: dict[str, int]


class ImpactOut(BaseModel):
    privacy_score: float
    narrative: str
    caveats: list[str]
    refinement_suggestions: list[SuggestionOut]
    provider: str


class ReleaseOut(BaseModel):
    version: VersionOut
    utility: UtilityOut
    impact: ImpactOut
    seed: int
    remaining_budget: float

    @classmethod
    def from_outcome(cls, outcome: ReleaseOutcome) -> "ReleaseOut":
        utility = outcome.utility
        impact = outcome.impact
        return cls(
            version=VersionOut.from_version(outcome.version),
            utility=UtilityOut(**utility.to_dict()),
            impact=ImpactOut(
                privacy_score=impact.privacy_score,
                narrative=impact.narrative,
                caveats=list(impact.caveats),
                refinement_suggestions=[
                    SuggestionOut(**s.to_dict()) for s in impact.refinement_suggestions
                ],
                provider=impact.provider,
            ),
            seed=outcome.seed,
            remaining_budget=outcome.remaining_budget,
        )


class SweepIn(BaseModel):
    grid: Optional[list[float]] = None
    seeds_per_point: Optional[int] = Field(default=None, ge=1)
    base_seed: int = Field(default=0, ge=0, lt=_MAX_SEED)


class SweepOut(BaseModel):
    grid: list[float]
    mae: list[float]
    expected_mae: list[float]
    pearson: Optional[float] = None
    spearman: Optional[float] = None
    seeds_per_point: int
    units: str

    @classmethod
    def from_sweep(cls, sweep: analysis.SweepResult) -> "SweepOut":
        return cls(
            grid=list(sweep.grid),
            mae=list(sweep.mae_curve),
            expected_mae=list(sweep.expected_curve),
            pearson=sweep.pearson_r,
            spearman=sweep.spearman_rho,
            seeds_per_point=sweep.seeds_per_point,
            units=sweep.unit_label,
        )


class EventOut(BaseModel):
    kind: str
    payload: dict
    timestamp: float


class LedgerOut(BaseModel):
    total_budget: float
    spent: float
    remaining: float
    entries: list[dict]


class HistoryOut(BaseModel):
    session_id: str
    events: list[EventOut]
    ledger: LedgerOut
    versions: list[dict]

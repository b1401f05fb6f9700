"""Impact reports: a 1-5 privacy rating plus a natural-language narrative.

Two providers share one report shape: an external LLM reached over HTTPS and
a deterministic template. The template anchors its rating to the fixed
(epsilon, score) pairs used across the package, so reports are reproducible
offline; the external path imposes structure on the model's reply and falls
back to the template whenever the reply is unusable.

Reports serialize to {privacy_score, narrative, caveats[], refinement_suggestions[], provider}.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import httpx

from .errors import (
    EpsilonOutsideSafeRange,
    MalformedProviderResponse,
    ProviderUnavailable,
)
from .mcda import DEFAULT_GRID, SAFE_RANGE, PreferenceProfile, privacy_rating

PROVIDER_TEMPLATE = "template"
PROVIDER_EXTERNAL = "external_llm"

PROMPT_ASSET = "prompts/impact_prompt_v1.txt"

# A report must never assert that re-identification risk is gone.
FORBIDDEN_CLAIMS = (
    "zero risk",
    "no risk",
    "risk-free",
    "completely anonymous",
    "fully anonymous",
    "cannot be re-identified",
    "impossible to re-identify",
    "impossible to identify",
    "guarantees anonymity",
    "perfectly private",
)

BASE_CAVEAT = (
    "Differential privacy bounds what any single household contributes to the "
    "release, but residual re-identification risk remains; treat the output "
    "as protected, not anonymous."
)

_DEVIATION_THRESHOLD = 0.25
_RETRIES = 1
DEFAULT_TIMEOUT_SECONDS = 30.0

_SCORE_RE = re.compile(r"PRIVACY_SCORE\s*:\s*([0-9]+(?:\.[0-9]+)?)", re.IGNORECASE)
_NARRATIVE_RE = re.compile(r"NARRATIVE\s*:\s*(.+)", re.IGNORECASE | re.DOTALL)


def template_score(epsilon: float) -> float:
    """Deterministic 1-5 privacy rating: log-linear through the anchors
    (0.1, 4.8), (1.0, 3.2), (2.0, 2.1), clamped into [1, 5]."""
    lo, hi = SAFE_RANGE
    if not lo <= epsilon <= hi:
        raise EpsilonOutsideSafeRange(f"epsilon {epsilon} outside safe range [{lo}, {hi}]")
    return min(5.0, max(1.0, privacy_rating(epsilon)))


@dataclass(frozen=True)
class DatasetSummary:
    series_count: int
    timestamp_count: int
    unit_label: str


@dataclass(frozen=True)
class ImpactContext:
    """Everything a provider needs to explain one release."""

    epsilon: float
    delta_f: float
    mae: float
    expected_mae: float
    dataset_summary: DatasetSummary
    profile: PreferenceProfile
    remaining_budget: float
    cap_applied: Optional[float] = None

    def __post_init__(self) -> None:
        numbers = [self.epsilon, self.delta_f, self.mae, self.expected_mae, self.remaining_budget]
        if self.cap_applied is not None:
            numbers.append(self.cap_applied)
        if not all(math.isfinite(x) for x in numbers):
            raise ValueError("impact context fields must be finite")
        lo, hi = SAFE_RANGE
        if not lo <= self.epsilon <= hi:
            raise ValueError(f"epsilon {self.epsilon} outside safe range [{lo}, {hi}]")
        if not self.expected_mae > 0:
            raise ValueError("expected_mae must be positive")


@dataclass(frozen=True)
class RefinementSuggestion:
    description: str
    suggested_profile_change: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "description": self.description,
            "suggested_profile_change": dict(self.suggested_profile_change),
        }


@dataclass(frozen=True)
class ImpactReport:
    privacy_score: float
    narrative: str
    caveats: tuple[str, ...]
    refinement_suggestions: tuple[RefinementSuggestion, ...]
    provider: str

    def __post_init__(self) -> None:
        if not 1.0 <= self.privacy_score <= 5.0:
            raise ValueError("privacy_score must be within [1, 5]")
        if not self.caveats:
            raise ValueError("a report must carry at least one caveat")

    def to_dict(self) -> dict:
        return {
            "privacy_score": self.privacy_score,
            "narrative": self.narrative,
            "caveats": list(self.caveats),
            "refinement_suggestions": [s.to_dict() for s in self.refinement_suggestions],
            "provider": self.provider,
        }


@dataclass(frozen=True)
class LlmSettings:
    """External provider connection details (from environment configuration)."""

    endpoint: str = ""
    model: str = ""
    api_key: str = ""
    timeout_seconds: float = DEFAULT_TIMEOUT_SECONDS

    @property
    def configured(self) -> bool:
        return bool(self.endpoint and self.model)


def contains_forbidden_claim(text: str) -> Optional[str]:
    lowered = text.lower()
    for phrase in FORBIDDEN_CLAIMS:
        if phrase in lowered:
            return phrase
    return None


def load_prompt_template() -> str:
    return resources.files("civicdp").joinpath(PROMPT_ASSET).read_text()


def render_prompt(context: ImpactContext) -> str:
    summary = context.dataset_summary
    profile = context.profile
    return load_prompt_template().format(
        epsilon=f"{context.epsilon:g}",
        delta_f=f"{context.delta_f:g}",
        mae=f"{context.mae:.6g}",
        expected_mae=f"{context.expected_mae:.6g}",
        unit_label=summary.unit_label,
        series_count=summary.series_count,
        timestamp_count=summary.timestamp_count,
        privacy_slider=profile.privacy,
        accuracy_slider=profile.accuracy,
        compliance_required="yes" if profile.compliance_required else "no",
        sensitivity_slider=profile.sensitivity,
        cap_applied="none" if context.cap_applied is None else f"{context.cap_applied:g}",
        remaining_budget=f"{context.remaining_budget:.6g}",
    )


def _error_deviation(context: ImpactContext) -> float:
    return abs(context.mae - context.expected_mae) / context.expected_mae


def _suggestions(context: ImpactContext) -> tuple[RefinementSuggestion, ...]:
    profile = context.profile
    out: list[RefinementSuggestion] = []
    if _error_deviation(context) > _DEVIATION_THRESHOLD:
        out.append(
            RefinementSuggestion(
                description=(
                    "The observed error deviates more than 25% from the analytic "
                    "expectation; re-release with a fresh seed or raise the accuracy "
                    "priority to push selection toward a larger budget."
                ),
                suggested_profile_change={"accuracy": min(5, profile.accuracy + 1)},
            )
        )
    if context.remaining_budget < DEFAULT_GRID[0]:
        out.append(
            RefinementSuggestion(
                description=(
                    "The remaining privacy budget is below the smallest selectable "
                    "epsilon, so no further release is possible; favor stronger "
                    "privacy settings in the next session."
                ),
                suggested_profile_change={"privacy": min(5, profile.privacy + 1)},
            )
        )
    return tuple(out)


def _caveats(context: ImpactContext) -> list[str]:
    caveats = [BASE_CAVEAT]
    deviation = _error_deviation(context)
    if deviation > _DEVIATION_THRESHOLD:
        caveats.append(
            f"The observed mean absolute error differs from its expectation by "
            f"{deviation:.0%} for this seed; averages over repeated releases are more stable."
        )
    if context.remaining_budget < DEFAULT_GRID[0]:
        caveats.append(
            "The privacy budget is effectively exhausted; additional releases will be rejected."
        )
    return caveats


class TemplateProvider:
    """Fully deterministic report generation; works with no network at all."""

    name = PROVIDER_TEMPLATE

    def generate(self, context: ImpactContext) -> ImpactReport:
        score = template_score(context.epsilon)
        summary = context.dataset_summary
        scale = context.delta_f / context.epsilon
        sentences = [
            f"This release perturbed {summary.series_count} series of "
            f"{summary.timestamp_count} readings with Laplace noise of scale "
            f"{scale:.6g} (sensitivity {context.delta_f:g} at privacy budget "
            f"epsilon {context.epsilon:g}).",
            f"The observed mean absolute error is {context.mae:.6g} {summary.unit_label} "
            f"per reading against an analytic expectation of {context.expected_mae:.6g}.",
            f"On the 1-5 protection scale this configuration rates {score:.1f}; "
            f"smaller budgets protect more and distort more.",
        ]
        if context.cap_applied is not None:
            sentences.append(
                f"A regulatory cap of epsilon {context.cap_applied:g} constrained the selection."
            )
        sentences.append(
            f"A budget of {context.remaining_budget:.6g} remains for future releases."
        )
        return ImpactReport(
            privacy_score=score,
            narrative=" ".join(sentences),
            caveats=tuple(_caveats(context)),
            refinement_suggestions=_suggestions(context),
            provider=self.name,
        )


class ExternalLlmProvider:
    """One HTTPS request per report against a configurable endpoint.

    The request carries the versioned prompt asset with all context fields
    filled in; the reply must contain a labeled score line and a narrative.
    """

    name = PROVIDER_EXTERNAL

    def __init__(self, settings: LlmSettings, client: Optional[httpx.Client] = None) -> None:
        if not settings.configured:
            raise ProviderUnavailable("external provider endpoint/model not configured")
        self._settings = settings
        self._client = client

    def _post(self, prompt: str) -> str:
        settings = self._settings
        headers = {}
        if settings.api_key:
            headers["Authorization"] = f"Bearer {settings.api_key}"
        payload = {"model": settings.model, "prompt": prompt}
        client = self._client or httpx.Client(timeout=settings.timeout_seconds)
        try:
            last_error: Exception | None = None
            for _ in range(_RETRIES + 1):
                try:
                    response = client.post(settings.endpoint, json=payload, headers=headers)
                    response.raise_for_status()
                    return self._extract_text(response.json())
                except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                    last_error = exc
            raise ProviderUnavailable(f"external provider unreachable: {last_error}")
        finally:
            if self._client is None:
                client.close()

    @staticmethod
    def _extract_text(body: object) -> str:
        if isinstance(body, dict):
            for key in ("text", "output", "completion"):
                if isinstance(body.get(key), str):
                    return body[key]
            choices = body.get("choices")
            if isinstance(choices, list) and choices:
                message = choices[0].get("message", {})
                if isinstance(message, dict) and isinstance(message.get("content"), str):
                    return message["content"]
        raise MalformedProviderResponse(f"no text field in provider response: {body!r}")

    def generate(self, context: ImpactContext) -> ImpactReport:
        text = self._post(render_prompt(context))

        forbidden = contains_forbidden_claim(text)
        if forbidden is not None:
            raise MalformedProviderResponse(
                f"provider narrative makes a forbidden claim ({forbidden!r})"
            )

        narrative_match = _NARRATIVE_RE.search(text)
        narrative = (narrative_match.group(1) if narrative_match else text).strip()
        if not narrative:
            raise MalformedProviderResponse("provider returned an empty narrative")

        caveats = _caveats(context)
        score_match = _SCORE_RE.search(text)
        if score_match:
            score = min(5.0, max(1.0, float(score_match.group(1))))
        else:
            score = template_score(context.epsilon)
            caveats.append(
                "The external provider reply lacked a parsable score; the "
                "deterministic template score is shown instead."
            )
        return ImpactReport(
            privacy_score=score,
            narrative=narrative,
            caveats=tuple(caveats),
            refinement_suggestions=_suggestions(context),
            provider=self.name,
        )


def generate_report(
    context: ImpactContext,
    provider_choice: str = PROVIDER_TEMPLATE,
    llm: Optional[LlmSettings] = None,
    fallback_enabled: bool = True,
    client: Optional[httpx.Client] = None,
) -> ImpactReport:
    """Produce an impact report via the chosen provider.

    The external path degrades to the template (with an explanatory caveat)
    on any provider failure unless ``fallback_enabled`` is off, in which case
    the failure propagates.
    """
    if provider_choice == PROVIDER_TEMPLATE:
        return TemplateProvider().generate(context)
    if provider_choice != PROVIDER_EXTERNAL:
        raise ValueError(f"unknown provider {provider_choice!r}")

    settings = llm or LlmSettings()
    try:
        return ExternalLlmProvider(settings, client=client).generate(context)
    except (ProviderUnavailable, MalformedProviderResponse) as exc:
        if not fallback_enabled:
            raise
        report = TemplateProvider().generate(context)
        return ImpactReport(
            privacy_score=report.privacy_score,
            narrative=report.narrative,
            caveats=report.caveats + (f"External provider unavailable ({exc}); deterministic template used.",),
            refinement_suggestions=report.refinement_suggestions,
            provider=PROVIDER_TEMPLATE,
        )

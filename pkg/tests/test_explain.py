from __future__ import annotations

import json
import math

import httpx
import pytest

from civicdp import explain, mcda
from civicdp.errors import (
    EpsilonOutsideSafeRange,
    MalformedProviderResponse,
    ProviderUnavailable,
)

PROFILE = mcda.PreferenceProfile(3, 3, False, 2)
SUMMARY = explain.DatasetSummary(series_count=200, timestamp_count=144, unit_label="watts")


def make_context(
    epsilon: float = 1.0,
    mae: float | None = None,
    remaining: float = 3.0,
    cap: float | None = None,
    profile: mcda.PreferenceProfile = PROFILE,
) -> explain.ImpactContext:
    expected = 10.0 / epsilon
    return explain.ImpactContext(
        epsilon=epsilon,
        delta_f=10.0,
        mae=expected if mae is None else mae,
        expected_mae=expected,
        dataset_summary=SUMMARY,
        profile=profile,
        remaining_budget=remaining,
        cap_applied=cap,
    )


class TestTemplateScore:
    def test_anchor_values_exact(self):
        assert explain.template_score(0.1) == 4.8
        assert explain.template_score(1.0) == 3.2
        assert explain.template_score(2.0) == 2.1

    def test_interpolation_at_half(self):
        expected = 4.8 + (3.2 - 4.8) * (math.log(0.5) - math.log(0.1)) / (
            math.log(1.0) - math.log(0.1)
        )
        assert explain.template_score(0.5) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(3.68, abs=0.01)

    def test_interpolation_at_one_and_a_half(self):
        expected = 3.2 + (2.1 - 3.2) * (math.log(1.5) - math.log(1.0)) / (
            math.log(2.0) - math.log(1.0)
        )
        assert explain.template_score(1.5) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(2.56, abs=0.01)

    def test_strictly_decreasing_across_safe_range(self):
        grid = [0.1 + i * (1.9 / 99) for i in range(100)]
        scores = [explain.template_score(e) for e in grid]
        assert all(b < a for a, b in zip(scores, scores[1:]))

    def test_midpoints_between_anchor_scores(self):
        assert 3.2 < explain.template_score(0.5) < 4.8
        assert 2.1 < explain.template_score(1.5) < 3.2

    def test_range_clamped(self):
        grid = [0.1 + i * (1.9 / 99) for i in range(100)]
        assert all(1.0 <= explain.template_score(e) <= 5.0 for e in grid)

    def test_outside_safe_range(self):
        with pytest.raises(EpsilonOutsideSafeRange):
            explain.template_score(0.01)
        with pytest.raises(EpsilonOutsideSafeRange):
            explain.template_score(3.0)


class TestTemplateProvider:
    def test_report_carries_template_scores(self):
        for epsilon, score in ((0.1, 4.8), (1.0, 3.2), (2.0, 2.1)):
            report = explain.generate_report(make_context(epsilon=epsilon))
            assert report.privacy_score == score
            assert report.provider == "template"

    def test_caveat_floor(self):
        report = explain.generate_report(make_context())
        assert len(report.caveats) >= 1

    def test_never_claims_zero_risk(self):
        for epsilon in (0.1, 0.5, 1.0, 2.0):
            report = explain.generate_report(make_context(epsilon=epsilon))
            text = report.narrative + " ".join(report.caveats)
            assert explain.contains_forbidden_claim(text) is None

    def test_suggestions_on_large_deviation(self):
        report = explain.generate_report(make_context(mae=14.0))  # 40% off expectation
        assert len(report.refinement_suggestions) >= 1
        change = report.refinement_suggestions[0].suggested_profile_change
        assert change == {"accuracy": 4}

    def test_suggestions_on_exhausted_budget(self):
        report = explain.generate_report(make_context(remaining=0.05))
        assert len(report.refinement_suggestions) >= 1
        assert any(
            "privacy" in s.suggested_profile_change for s in report.refinement_suggestions
        )

    def test_no_suggestions_when_on_track(self):
        report = explain.generate_report(make_context())
        assert report.refinement_suggestions == ()

    def test_cap_mentioned_when_applied(self):
        report = explain.generate_report(make_context(cap=1.0))
        assert "cap" in report.narrative.lower()

    def test_serialization_schema(self):
        report = explain.generate_report(make_context(mae=14.0))
        doc = report.to_dict()
        assert set(doc) == {
            "privacy_score", "narrative", "caveats", "refinement_suggestions", "provider",
        }
        parsed = json.loads(json.dumps(doc))
        assert parsed == doc

    def test_deterministic(self):
        a = explain.generate_report(make_context())
        b = explain.generate_report(make_context())
        assert a == b


def mock_llm(handler) -> tuple[explain.LlmSettings, httpx.Client]:
    settings = explain.LlmSettings(endpoint="https://llm.test/v1/complete", model="m1", api_key="k")
    return settings, httpx.Client(transport=httpx.MockTransport(handler))


class TestExternalProvider:
    def test_successful_structured_reply(self):
        def handler(request: httpx.Request) -> httpx.Response:
            body = json.loads(request.content)
            assert body["model"] == "m1"
            assert "PRIVACY_SCORE" in body["prompt"]
            assert request.headers["Authorization"] == "Bearer k"
            return httpx.Response(
                200,
                json={"text": "PRIVACY_SCORE: 3.9\nNARRATIVE: Noise hides individual households."},
            )

        settings, client = mock_llm(handler)
        report = explain.generate_report(
            make_context(), provider_choice="external_llm", llm=settings, client=client
        )
        assert report.provider == "external_llm"
        assert report.privacy_score == 3.9
        assert report.narrative == "Noise hides individual households."

    def test_openai_style_reply(self):
        def handler(_request: httpx.Request) -> httpx.Response:
            return httpx.Response(
                200,
                json={
                    "choices": [
                        {"message": {"content": "PRIVACY_SCORE: 2\nNARRATIVE: Weak protection."}}
                    ]
                },
            )

        settings, client = mock_llm(handler)
        report = explain.generate_report(
            make_context(), provider_choice="external_llm", llm=settings, client=client
        )
        assert report.privacy_score == 2.0

    def test_score_clamped_into_range(self):
        def handler(_request: httpx.Request) -> httpx.Response:
            return httpx.Response(200, json={"text": "PRIVACY_SCORE: 9\nNARRATIVE: Over-eager."})

        settings, client = mock_llm(handler)
        report = explain.generate_report(
            make_context(), provider_choice="external_llm", llm=settings, client=client
        )
        assert report.privacy_score == 5.0

    def test_missing_score_falls_back_to_template_score(self):
        def handler(_request: httpx.Request) -> httpx.Response:
            return httpx.Response(200, json={"text": "NARRATIVE: Prose without a score."})

        settings, client = mock_llm(handler)
        report = explain.generate_report(
            make_context(epsilon=1.0), provider_choice="external_llm", llm=settings, client=client
        )
        assert report.provider == "external_llm"
        assert report.privacy_score == 3.2
        assert any("score" in c.lower() for c in report.caveats)

    def test_malformed_body_falls_back(self):
        def handler(_request: httpx.Request) -> httpx.Response:
            return httpx.Response(200, json={"unexpected": 1})

        settings, client = mock_llm(handler)
        report = explain.generate_report(
            make_context(), provider_choice="external_llm", llm=settings, client=client
        )
        assert report.provider == "template"
        assert any("template" in c.lower() for c in report.caveats)

    def test_malformed_body_raises_when_fallback_disabled(self):
        def handler(_request: httpx.Request) -> httpx.Response:
            return httpx.Response(200, json={"unexpected": 1})

        settings, client = mock_llm(handler)
        with pytest.raises(MalformedProviderResponse):
            explain.generate_report(
                make_context(), provider_choice="external_llm", llm=settings,
                client=client, fallback_enabled=False,
            )

    def test_forbidden_claim_rejected(self):
        def handler(_request: httpx.Request) -> httpx.Response:
            return httpx.Response(
                200,
                json={"text": "PRIVACY_SCORE: 5\nNARRATIVE: The data is completely anonymous."},
            )

        settings, client = mock_llm(handler)
        report = explain.generate_report(
            make_context(), provider_choice="external_llm", llm=settings, client=client
        )
        assert report.provider == "template"
        assert explain.contains_forbidden_claim(report.narrative) is None

    def test_unreachable_endpoint_raises_when_fallback_disabled(self):
        def handler(_request: httpx.Request) -> httpx.Response:
            raise httpx.ConnectError("refused")

        settings, client = mock_llm(handler)
        with pytest.raises(ProviderUnavailable):
            explain.generate_report(
                make_context(), provider_choice="external_llm", llm=settings,
                client=client, fallback_enabled=False,
            )

    def test_single_retry_then_success(self):
        calls = {"n": 0}

        def handler(_request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            if calls["n"] == 1:
                raise httpx.ConnectTimeout("slow")
            return httpx.Response(200, json={"text": "PRIVACY_SCORE: 3\nNARRATIVE: Recovered."})

        settings, client = mock_llm(handler)
        report = explain.generate_report(
            make_context(), provider_choice="external_llm", llm=settings, client=client
        )
        assert calls["n"] == 2
        assert report.privacy_score == 3.0

    def test_unconfigured_provider_falls_back(self):
        report = explain.generate_report(make_context(), provider_choice="external_llm")
        assert report.provider == "template"
        assert any("unavailable" in c.lower() for c in report.caveats)

    def test_unconfigured_provider_raises_when_fallback_disabled(self):
        with pytest.raises(ProviderUnavailable):
            explain.generate_report(
                make_context(), provider_choice="external_llm", fallback_enabled=False
            )


class TestPrompt:
    def test_prompt_contains_all_context_fields(self):
        prompt = explain.render_prompt(make_context(epsilon=0.5, cap=1.0))
        for token in ("0.5", "10", "200", "144", "watts", "3/5", "1"):
            assert token in prompt

    def test_prompt_asset_versioned(self):
        assert "v1" in explain.PROMPT_ASSET
        assert "PRIVACY_SCORE" in explain.load_prompt_template()


class TestImpactReportInvariants:
    def test_rejects_score_out_of_range(self):
        with pytest.raises(ValueError):
            explain.ImpactReport(
                privacy_score=0.5, narrative="x", caveats=("c",),
                refinement_suggestions=(), provider="template",
            )

    def test_rejects_empty_caveats(self):
        with pytest.raises(ValueError):
            explain.ImpactReport(
                privacy_score=3.0, narrative="x", caveats=(),
                refinement_suggestions=(), provider="template",
            )

    def test_context_rejects_epsilon_outside_safe_range(self):
        with pytest.raises(ValueError):
            make_context(epsilon=0.01)

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mentioncast import (
    ContextVariant,
    Forecast,
    MarketInstance,
    Method,
    MixtureWeight,
    MockBackend,
    PromptRegime,
    ValidationError,
    build_context,
    forecast_llm,
    forecast_market_baseline,
    forecast_mixmcp,
    mix,
)
from mentioncast.forecasters import ForecastFailure
from mentioncast.gateway import MCP, PLAIN_MARKET

probs = st.floats(0.0, 1.0)
alphas = st.floats(0.0, 1.0)


def instance(market_prob, iid="i1"):
    return MarketInstance(
        instance_id=iid, company="AAPL", event_id="AAPL-2025-07-31", keyword="iPhone",
        cutoff_time="2025-07-24T21:00:00Z", resolution_time="2025-07-31T21:00:00Z", market_prob=market_prob,
    )


def tn():
    return build_context(ContextVariant.TRANSCRIPT_AND_NEWS, "prior call", [], "2025-07-24T21:00:00Z")


@pytest.mark.parametrize("p", [0.99, 0.0, 0.45])
def test_market_baseline_passthrough(p):
    fc = forecast_market_baseline(instance(p))
    assert fc.probability == p and fc.method is Method.MARKET_BASELINE and fc.raw_score is None


def test_forecast_llm_mcp():
    backend = MockBackend.from_scores({("mcp", "i1"): 80})
    fc = forecast_llm(instance(0.45), MCP, tn(), backend)
    assert fc == Forecast("i1", Method.MCP, 0.80, raw_score=80)


def test_forecast_llm_context_none():
    backend = MockBackend.from_scores({("ctx_none", "i1"): 50})
    ctx = build_context(ContextVariant.EMPTY, None, [], "2025-07-24T21:00:00Z")
    fc = forecast_llm(instance(0.45), PromptRegime.context_only(ContextVariant.EMPTY), ctx, backend)
    assert fc.probability == 0.5 and fc.method is Method.CTX_NONE


def test_forecast_llm_plain_market():
    backend = MockBackend.from_scores({("plain_market", "i1"): 74})
    fc = forecast_llm(instance(0.45), PLAIN_MARKET, tn(), backend)
    assert (fc.probability, fc.raw_score, fc.method) == (0.74, 74, Method.PLAIN_MARKET)


def test_forecast_llm_failure_carries_instance():
    backend = MockBackend({})
    with pytest.raises(ForecastFailure) as info:
        forecast_llm(instance(0.45, "zz"), MCP, tn(), backend)
    assert info.value.instance_id == "zz" and info.value.method is Method.MCP


def test_mix_figure_example():
    assert abs(mix(0.45, 0.80, 0.7) - 0.555) <= 1e-12


def test_mix_independent_arithmetic():
    expected = Fraction("0.7") * Fraction("0.91") + Fraction("0.3") * Fraction("0.30")
    assert expected == Fraction(727, 1000)
    assert abs(mix(0.91, 0.30, 0.7) - 0.727) <= 1e-12


@given(probs, probs)
def test_mix_endpoints(p, q):
    assert mix(p, q, 1.0) == p
    assert mix(p, q, 0.0) == q


@given(probs, probs, alphas)
def test_mix_betweenness(p, q, a):
    assert min(p, q) <= mix(p, q, a) <= max(p, q)


@given(probs, probs, alphas, alphas)
def test_mix_is_affine_in_alpha(p, q, a1, a2):
    lhs = mix(p, q, a1) - mix(p, q, a2)
    assert abs(lhs - (a1 - a2) * (p - q)) <= 1e-12


@given(alphas)
def test_mix_agreement_fixed_point(a):
    assert abs(mix(0.5, 0.5, a) - 0.5) <= 1e-15


@pytest.mark.parametrize("alpha", [-0.1, 1.1, "x"])
def test_mixture_weight_range(alpha):
    with pytest.raises(ValidationError):
        MixtureWeight(alpha)


def test_forecast_mixmcp():
    mcp = Forecast("i1", Method.MCP, 0.8, raw_score=80)
    fc = forecast_mixmcp(instance(0.45), mcp, MixtureWeight(0.7))
    assert fc.method is Method.MIXMCP and abs(fc.probability - 0.555) <= 1e-12


def test_forecast_mixmcp_rejects_mismatch():
    with pytest.raises(ValidationError):
        forecast_mixmcp(instance(0.45), Forecast("other", Method.MCP, 0.8), 0.7)
    with pytest.raises(ValidationError):
        forecast_mixmcp(instance(0.45), Forecast("i1", Method.CTX_TN, 0.8), 0.7)

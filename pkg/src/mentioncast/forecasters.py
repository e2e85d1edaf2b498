"""Prediction methods: market baseline, LLM regimes and the market/MCP mixture."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BackendError, MentionCastError, ParseError, ValidationError
from .evidence import ContextBundle
from .gateway import Backend, PromptRegime, fingerprint, query_forecast, render_prompt
from .model import Forecast, MarketInstance, Method, Probability, rescale_score

DEFAULT_ALPHA = 0.7


@dataclass(frozen=True)
class MixtureWeight:
    """Weight on the market probability in the convex pool."""

    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        try:
            alpha = float(self.alpha)
        except (TypeError, ValueError):
            raise ValidationError(f"alpha must be a real number, got {self.alpha!r}") from None
        if not 0.0 <= alpha <= 1.0:
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha!r}")
        object.__setattr__(self, "alpha", alpha)

    def __float__(self):
        return self.alpha


class ForecastFailure(MentionCastError):
    """A backend or parse failure for one instance; carries the instance id."""

    def __init__(self, instance_id, method, cause):
        self.instance_id = instance_id
        self.method = Method(method)
        self.cause = cause
        super().__init__(f"{instance_id} [{self.method.value}]: {cause}")


def forecast_market_baseline(instance: MarketInstance) -> Forecast:
    return Forecast(instance.instance_id, Method.MARKET_BASELINE, instance.market_prob)


def forecast_llm(
    instance: MarketInstance,
    regime: PromptRegime,
    context: ContextBundle,
    backend: Backend,
    **render_kwargs,
) -> Forecast:
    """Render the regime's prompt, query the backend and rescale its 0-100 score."""
    market = instance.market_prob if regime.uses_market else None
    prompt = render_prompt(regime, instance.keyword, instance.company, context, market, **render_kwargs)
    try:
        score = query_forecast(prompt, backend, key=fingerprint(regime.method, instance.instance_id))
    except (BackendError, ParseError) as exc:
        raise ForecastFailure(instance.instance_id, regime.method, exc) from exc
    return Forecast(instance.instance_id, regime.method, rescale_score(score), raw_score=score)


def mix(p_mkt, p_mcp, alpha) -> Probability:
    """Convex pool ``alpha * p_mkt + (1 - alpha) * p_mcp``."""
    a = MixtureWeight(alpha).alpha if not isinstance(alpha, MixtureWeight) else alpha.alpha
    p_mkt = Probability(p_mkt)
    p_mcp = Probability(p_mcp)
    value = a * p_mkt + (1.0 - a) * p_mcp
    # a convex combination can overshoot [0, 1] by one ulp only at the endpoints
    return Probability(min(max(value, min(p_mkt, p_mcp)), max(p_mkt, p_mcp)))


def forecast_mixmcp(instance: MarketInstance, mcp_forecast: Forecast, alpha=DEFAULT_ALPHA) -> Forecast:
    if mcp_forecast.method is not Method.MCP:
        raise ValidationError(f"expected an mcp forecast, got {mcp_forecast.method.value}")
    if mcp_forecast.instance_id != instance.instance_id:
        raise ValidationError(
            f"forecast for {mcp_forecast.instance_id} cannot be mixed into instance {instance.instance_id}"
        )
    return Forecast(instance.instance_id, Method.MIXMCP, mix(instance.market_prob, mcp_forecast.probability, alpha))

"""Forecasting and evaluation toolkit for keyword-mention prediction markets."""

from .errors import (
    BackendError,
    ConfigurationError,
    DatasetError,
    LeakageError,
    MentionCastError,
    ParseError,
    TransportError,
    ValidationError,
)
from .evaluation import (
    CalibrationBin,
    DisagreementRow,
    MetricSummary,
    alpha_sweep,
    analytic_alpha,
    brier,
    calibration_curve,
    classify_and_score,
    disagreement_analysis,
    ece,
    summarize,
)
from .evidence import ContextBundle, ContextVariant, build_context, filter_news
from .forecasters import (
    MixtureWeight,
    forecast_llm,
    forecast_market_baseline,
    forecast_mixmcp,
    mix,
)
from .gateway import (
    BackendConfig,
    ChatCompletionsBackend,
    MockBackend,
    PromptRegime,
    RegimeKind,
    parse_score,
    query_forecast,
    render_market_text,
    render_prompt,
)
from .model import (
    EvidenceBundle,
    Forecast,
    MarketInstance,
    Method,
    NewsItem,
    Outcome,
    Probability,
    make_probability,
    rescale_score,
)
from .pipeline import run_evaluate, run_forecast
from .resolution import Boundary, CaseSensitivity, MatchMode, normalize_text, resolve_mention
from .storage import load_dataset

__version__ = "0.1.0"

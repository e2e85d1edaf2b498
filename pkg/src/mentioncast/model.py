"""Core value types: probabilities, outcomes, market instances, news and forecasts.

All types are immutable after construction. Timestamps are timezone-aware UTC
``datetime`` objects; naive datetimes and non-UTC offsets are normalized on the
way in by :func:`parse_timestamp`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from numbers import Integral, Real
from typing import Optional

from .errors import ValidationError


class Probability(float):
    """A float constrained to ``[0, 1]``.

    Behaves as a plain float in arithmetic; only construction is checked.
    """

    __slots__ = ()

    def __new__(cls, value):
        if isinstance(value, bool) or not isinstance(value, Real):
            raise ValidationError(f"probability must be a real number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ValidationError(f"probability must be finite, got {value!r}")
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"probability must lie in [0, 1], got {value!r}")
        return super().__new__(cls, value)

    def __repr__(self):
        return f"Probability({float(self)!r})"


def make_probability(raw) -> Probability:
    return Probability(raw)


def rescale_score(score) -> Probability:
    """Map an integer score on the 0-100 scale to a probability."""
    if isinstance(score, bool) or not isinstance(score, Integral):
        raise ValidationError(f"score must be an integer, got {score!r}")
    if not 0 <= score <= 100:
        raise ValidationError(f"score must lie in 0..100, got {score!r}")
    return Probability(int(score) / 100)


class Outcome(enum.IntEnum):
    NO = 0
    YES = 1

    @classmethod
    def parse(cls, value) -> "Outcome":
        if isinstance(value, Outcome):
            return value
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                pass
        elif isinstance(value, Real) and not isinstance(value, bool) and value in (0, 1):
            return cls(int(value))
        raise ValidationError(f"outcome must be 'YES' or 'NO', got {value!r}")

    def to_json(self) -> str:
        return self.name


def parse_timestamp(value) -> datetime:
    """Parse an ISO-8601 string (or datetime) into an aware UTC datetime.

    Naive inputs are taken to be UTC already.
    """
    if isinstance(value, datetime):
        ts = value
    elif isinstance(value, str):
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        try:
            ts = datetime.fromisoformat(text)
        except ValueError as exc:
            raise ValidationError(f"invalid ISO-8601 timestamp {value!r}") from exc
    else:
        raise ValidationError(f"timestamp must be an ISO-8601 string, got {value!r}")
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class MarketInstance:
    """One mention contract, frozen at its cutoff.

    ``market_prob_format`` records how the price arrived in the dataset
    (``"percent"`` for integer cents, ``"unit"`` for a real in [0, 1]) so the
    row can be written back in its original form.
    """

    instance_id: str
    company: str
    event_id: str
    keyword: str
    cutoff_time: datetime
    resolution_time: datetime
    market_prob: Probability
    outcome: Optional[Outcome] = None
    prior_event_id: Optional[str] = None
    market_prob_format: str = "unit"

    def __post_init__(self):
        if not isinstance(self.instance_id, str) or not self.instance_id:
            raise ValidationError("instance_id must be a non-empty string")
        if not isinstance(self.keyword, str) or not self.keyword.strip():
            raise ValidationError(f"keyword must be non-empty, got {self.keyword!r}")
        object.__setattr__(self, "cutoff_time", parse_timestamp(self.cutoff_time))
        object.__setattr__(self, "resolution_time", parse_timestamp(self.resolution_time))
        if not self.cutoff_time < self.resolution_time:
            raise ValidationError(
                f"{self.instance_id}: cutoff_time {format_timestamp(self.cutoff_time)} "
                f"is not before resolution_time {format_timestamp(self.resolution_time)}"
            )
        if not isinstance(self.market_prob, Probability):
            object.__setattr__(self, "market_prob", Probability(self.market_prob))
        if self.outcome is not None and not isinstance(self.outcome, Outcome):
            object.__setattr__(self, "outcome", Outcome.parse(self.outcome))
        if self.market_prob_format not in ("unit", "percent"):
            raise ValidationError(f"unknown market_prob_format {self.market_prob_format!r}")


@dataclass(frozen=True, order=True)
class NewsItem:
    published_at: datetime
    title: str = field(compare=False)
    snippet: str = field(compare=False, default="")
    source: str = field(compare=False, default="")

    def __post_init__(self):
        object.__setattr__(self, "published_at", parse_timestamp(self.published_at))


class Method(str, enum.Enum):
    """Tag naming the code path that produced a forecast."""

    MARKET_BASELINE = "market_baseline"
    CTX_NONE = "ctx_none"
    CTX_N = "ctx_n"
    CTX_T = "ctx_t"
    CTX_TN = "ctx_tn"
    PLAIN_MARKET = "plain_market"
    MCP = "mcp"
    MIXMCP = "mixmcp"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Forecast:
    instance_id: str
    method: Method
    probability: Probability
    raw_score: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.raw_score is not None:
            expected = rescale_score(self.raw_score)
            if not isinstance(self.probability, Probability):
                object.__setattr__(self, "probability", Probability(self.probability))
            if float(self.probability) != float(expected):
                raise ValidationError(
                    f"{self.instance_id}: probability {float(self.probability)!r} "
                    f"does not equal raw_score/100 for raw_score {self.raw_score}"
                )
        elif not isinstance(self.probability, Probability):
            object.__setattr__(self, "probability", Probability(self.probability))


@dataclass(frozen=True)
class EvidenceBundle:
    """Raw pre-cutoff text gathered for one instance, before variant selection."""

    transcript: Optional[str] = None
    news: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "news", tuple(self.news))

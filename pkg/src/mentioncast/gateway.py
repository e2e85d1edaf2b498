"""Prompt rendering, backend queries and score parsing.

Prompts are assembled from versioned text assets under ``templates/<version>``.
Every regime shares the evidence layout; they differ only in the leading
instruction and in whether a market-signal block is present.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Protocol

from .errors import BackendError, ConfigurationError, ParseError, TransportError, ValidationError
from .evidence import ContextBundle, ContextVariant
from .model import Method, Probability

logger = logging.getLogger(__name__)

TEMPLATE_VERSION = "v1"
DEFAULT_TRANSCRIPT_BUDGET = 60_000
TRUNCATION_MARKER = "[... transcript truncated ...]"


class RegimeKind(str, enum.Enum):
    CONTEXT_ONLY = "CONTEXT_ONLY"
    PLAIN_MARKET = "PLAIN_MARKET"
    MCP = "MCP"


_CONTEXT_METHODS = {
    ContextVariant.EMPTY: Method.CTX_NONE,
    ContextVariant.NEWS_ONLY: Method.CTX_N,
    ContextVariant.TRANSCRIPT_ONLY: Method.CTX_T,
    ContextVariant.TRANSCRIPT_AND_NEWS: Method.CTX_TN,
}


@dataclass(frozen=True)
class PromptRegime:
    """How a prompt is built. Market-bearing regimes always use the (T, N) context."""

    kind: RegimeKind
    variant: ContextVariant = ContextVariant.TRANSCRIPT_AND_NEWS

    def __post_init__(self):
        object.__setattr__(self, "kind", RegimeKind(self.kind))
        object.__setattr__(self, "variant", ContextVariant(self.variant))
        if self.kind is not RegimeKind.CONTEXT_ONLY and self.variant is not ContextVariant.TRANSCRIPT_AND_NEWS:
            raise ValidationError(f"{self.kind.value} always uses the transcript+news context")

    @classmethod
    def context_only(cls, variant) -> "PromptRegime":
        return cls(RegimeKind.CONTEXT_ONLY, ContextVariant(variant))

    @classmethod
    def for_method(cls, method) -> "PromptRegime":
        method = Method(method)
        if method is Method.PLAIN_MARKET:
            return cls(RegimeKind.PLAIN_MARKET)
        if method is Method.MCP:
            return cls(RegimeKind.MCP)
        for variant, tag in _CONTEXT_METHODS.items():
            if tag is method:
                return cls.context_only(variant)
        raise ValidationError(f"method {method.value} is not produced by a language model")

    @property
    def uses_market(self) -> bool:
        return self.kind is not RegimeKind.CONTEXT_ONLY

    @property
    def method(self) -> Method:
        if self.kind is RegimeKind.PLAIN_MARKET:
            return Method.PLAIN_MARKET
        if self.kind is RegimeKind.MCP:
            return Method.MCP
        return _CONTEXT_METHODS[self.variant]


PLAIN_MARKET = PromptRegime(RegimeKind.PLAIN_MARKET)
MCP = PromptRegime(RegimeKind.MCP)


@lru_cache(maxsize=None)
def load_template(name: str, version: str = TEMPLATE_VERSION) -> str:
    path = resources.files("mentioncast").joinpath("templates", version, f"{name}.txt")
    return path.read_text(encoding="utf-8").rstrip("\n")


def percent(p) -> int:
    """Integer percentage, rounding half up (0.555 -> 56)."""
    # repr-based Decimal avoids binary artefacts such as 0.145 * 100 == 14.499...
    return int((Decimal(repr(float(p))) * 100).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def render_market_text(p: Probability, version: str = TEMPLATE_VERSION) -> str:
    p = Probability(p)
    return load_template("market_text", version).format(percent=percent(p))


def _truncate(text: str, budget: Optional[int]) -> str:
    if budget is None or len(text) <= budget:
        return text
    return text[:budget].rstrip() + "\n" + TRUNCATION_MARKER


def render_prompt(
    regime: PromptRegime,
    keyword: str,
    company: str,
    context: ContextBundle,
    market_prob: Optional[Probability] = None,
    *,
    transcript_budget: Optional[int] = DEFAULT_TRANSCRIPT_BUDGET,
    version: str = TEMPLATE_VERSION,
) -> str:
    if regime.uses_market and market_prob is None:
        raise ConfigurationError(f"{regime.kind.value} prompts need the market probability")
    if not regime.uses_market and market_prob is not None:
        raise ConfigurationError("context-only prompts must not carry the market probability")
    if context.variant is not regime.variant:
        raise ConfigurationError(
            f"context variant {context.variant.value} does not match regime variant {regime.variant.value}"
        )

    tpl = lambda name: load_template(name, version)  # noqa: E731
    instruction = tpl("instruction_mcp" if regime.kind is RegimeKind.MCP else "instruction_base")
    sections = [instruction, tpl("question").format(company=company, keyword=keyword.strip())]
    if context.transcript_text is not None:
        sections.append(tpl("transcript_block").format(
            transcript=_truncate(context.transcript_text.strip(), transcript_budget)))
    if context.variant.uses_news:
        if context.news_items:
            lines = "\n".join(
                tpl("news_item").format(
                    date=item.published_at.date().isoformat(),
                    title=item.title,
                    source=item.source,
                    snippet=item.snippet,
                )
                for item in context.news_items
            )
        else:
            lines = "(none available)"
        sections.append(tpl("news_block").format(count=len(context.news_items), items=lines))
    if regime.uses_market:
        sections.append(tpl("market_block").format(market_text=render_market_text(market_prob, version)))
    sections.append(tpl("answer_format").format())
    return "\n\n".join(sections) + "\n"


def prompt_sections(prompt: str) -> list:
    """Split a rendered prompt into its instruction and ``## ``-headed blocks."""
    return prompt.rstrip("\n").split("\n\n## ")


# -- parsing ---------------------------------------------------------------

_FENCE = re.compile(r"^```(?:json)?\s*|\s*```$")
_BARE_INT = re.compile(r"^\s*([+-]?\d+)\s*%?\s*$")


def parse_score(reply: str) -> int:
    """Read an integer 0..100 from a JSON object with one integer field or a bare integer line."""
    if not isinstance(reply, str):
        raise ParseError("reply is not text", reply)
    text = _FENCE.sub("", reply.strip())
    value = None
    try:
        obj = json.loads(text)
    except ValueError:
        obj = None
    if isinstance(obj, dict):
        numeric = {k: v for k, v in obj.items() if isinstance(v, (int, float)) and not isinstance(v, bool)}
        if "probability" in numeric:
            value = numeric["probability"]
        elif len(numeric) == 1:
            value = next(iter(numeric.values()))
        else:
            raise ParseError("expected one integer field in JSON reply", reply)
    elif isinstance(obj, (int, float)) and not isinstance(obj, bool):
        value = obj
    else:
        for line in text.splitlines():
            m = _BARE_INT.match(line)
            if m:
                value = int(m.group(1))
                break
    if value is None:
        raise ParseError("no integer score in reply", reply)
    if isinstance(value, float):
        if not value.is_integer():
            raise ParseError("score is not an integer", reply)
        value = int(value)
    if not 0 <= value <= 100:
        raise ParseError("score outside 0..100", reply)
    return value


# -- backends --------------------------------------------------------------

def fingerprint(method, instance_id: str) -> str:
    """Stable key for a (method, instance) request; used by the mock backend."""
    return hashlib.sha256(f"{Method(method).value}|{instance_id}".encode()).hexdigest()[:16]


@dataclass(frozen=True)
class BackendConfig:
    endpoint: str = ""
    model_name: str = "mock"
    timeout: float = 60.0
    max_retries: int = 3
    backoff_base: float = 1.0
    api_key_env: str = "MENTIONCAST_API_KEY"
    proxy_env: str = "MENTIONCAST_PROXY"
    max_in_flight: int = 4
    temperature: float = 0.0
    verbose: bool = False

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValidationError(f"max_retries must be >= 0, got {self.max_retries}")
        if not self.timeout > 0:
            raise ValidationError(f"timeout must be > 0, got {self.timeout}")
        if self.max_in_flight < 1:
            raise ValidationError(f"max_in_flight must be >= 1, got {self.max_in_flight}")

    def summary(self) -> dict:
        return {
            "endpoint": self.endpoint,
            "model_name": self.model_name,
            "timeout": self.timeout,
            "max_retries": self.max_retries,
            "temperature": self.temperature,
        }


class Backend(Protocol):
    config: BackendConfig

    def complete(self, prompt: str, key: str) -> str:
        """Return the raw text reply for ``prompt``; ``key`` is the request fingerprint."""


class MockBackend:
    """Deterministic backend answering from a fingerprint -> reply table."""

    def __init__(self, table: dict, config: Optional[BackendConfig] = None):
        self.table = dict(table)
        self.config = config or BackendConfig(model_name="mock", max_retries=0)
        self.calls = []
        self.prompts = []

    @classmethod
    def from_scores(cls, scores: dict, **kwargs) -> "MockBackend":
        """Build from ``{(method, instance_id): score}``."""
        table = {fingerprint(m, iid): str(s) for (m, iid), s in scores.items()}
        return cls(table, **kwargs)

    @classmethod
    def from_file(cls, path, **kwargs) -> "MockBackend":
        """Load JSONL rows carrying either ``fingerprint`` or ``method`` + ``instance_id``,
        and either an integer ``score`` or a literal ``reply``."""
        table = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                row = json.loads(line)
                if "fingerprint" in row:
                    key = row["fingerprint"]
                elif "method" in row and "instance_id" in row:
                    key = fingerprint(row["method"], row["instance_id"])
                else:
                    raise ValidationError(f"{path}:{lineno}: mock row needs a fingerprint or method+instance_id")
                if "reply" in row:
                    table[key] = row["reply"]
                elif "score" in row:
                    table[key] = json.dumps({"probability": row["score"]})
                else:
                    raise ValidationError(f"{path}:{lineno}: mock row needs 'score' or 'reply'")
        return cls(table, **kwargs)

    def complete(self, prompt, key):
        self.calls.append(key)
        self.prompts.append(prompt)
        try:
            return self.table[key]
        except KeyError:
            raise BackendError(f"mock backend has no entry for fingerprint {key}") from None


def _redact(text: str, secret: Optional[str]) -> str:
    if secret:
        text = text.replace(secret, "***")
    return text


class ChatCompletionsBackend:
    """OpenAI-style ``/chat/completions`` client over httpx.

    429 and 5xx responses and network failures raise :class:`TransportError`
    so :func:`query_forecast` retries them; other HTTP errors are final.
    """

    def __init__(self, config: BackendConfig, client=None):
        if not config.endpoint:
            raise ConfigurationError("live backend needs an endpoint URL")
        self.config = config
        self._client = client

    def _http(self):
        if self._client is None:
            import httpx

            proxy = os.environ.get(self.config.proxy_env) or None
            self._client = httpx.Client(timeout=self.config.timeout, proxy=proxy)
        return self._client

    def complete(self, prompt, key):
        import httpx

        api_key = os.environ.get(self.config.api_key_env)
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
            "response_format": {"type": "json_object"},
        }
        if self.config.verbose:
            logger.info("POST %s headers=%s body=%s", self.config.endpoint,
                        _redact(json.dumps(headers), api_key), json.dumps(body))
        try:
            resp = self._http().post(self.config.endpoint, json=body, headers=headers,
                                     timeout=self.config.timeout)
        except httpx.TransportError as exc:
            raise TransportError(f"request to {self.config.endpoint} failed: {exc}") from exc
        if self.config.verbose:
            logger.info("response %s %s", resp.status_code, _redact(resp.text, api_key))
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransportError(f"backend returned HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise BackendError(f"backend returned HTTP {resp.status_code}: {_redact(resp.text, api_key)[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ParseError("unexpected response body", resp.text) from exc


def query_forecast(
    prompt: str,
    backend: Backend,
    *,
    key: str = "",
    sleep: Callable[[float], None] = time.sleep,
) -> int:
    """Send ``prompt`` and return the parsed integer score.

    Transport failures are retried with exponential backoff
    (``backoff_base * 2**attempt`` seconds) up to ``config.max_retries`` times.
    """
    if not prompt or not prompt.strip():
        raise ValidationError("prompt must be non-empty")
    cfg = backend.config
    for attempt in range(cfg.max_retries + 1):
        try:
            reply = backend.complete(prompt, key)
            break
        except TransportError as exc:
            if attempt == cfg.max_retries:
                raise BackendError(f"giving up after {attempt + 1} attempt(s): {exc}") from exc
            delay = cfg.backoff_base * 2 ** attempt
            logger.warning("transport error (%s); retrying in %.2fs", exc, delay)
            sleep(delay)
    return parse_score(reply)


def map_in_flight(fn, items, max_in_flight: int = 1) -> list:
    """Apply ``fn`` to ``items`` with bounded concurrency, preserving input order."""
    items = list(items)
    if max_in_flight <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        return list(pool.map(fn, items))


def template_dir(version: str = TEMPLATE_VERSION) -> Path:
    return Path(str(resources.files("mentioncast").joinpath("templates", version)))

"""Pre-cutoff context construction: the transcript/news lattice and news providers."""

from __future__ import annotations

import enum
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Protocol, Sequence

from .errors import ConfigurationError, LeakageError, ValidationError
from .model import NewsItem, format_timestamp, parse_timestamp

logger = logging.getLogger(__name__)

NEWS_CAP = 100


class ContextVariant(str, enum.Enum):
    EMPTY = "EMPTY"
    NEWS_ONLY = "NEWS_ONLY"
    TRANSCRIPT_ONLY = "TRANSCRIPT_ONLY"
    TRANSCRIPT_AND_NEWS = "TRANSCRIPT_AND_NEWS"

    @property
    def uses_transcript(self) -> bool:
        return self in (ContextVariant.TRANSCRIPT_ONLY, ContextVariant.TRANSCRIPT_AND_NEWS)

    @property
    def uses_news(self) -> bool:
        return self in (ContextVariant.NEWS_ONLY, ContextVariant.TRANSCRIPT_AND_NEWS)


@dataclass(frozen=True)
class ContextBundle:
    variant: ContextVariant
    transcript_text: Optional[str]
    news_items: tuple
    cutoff_time: datetime

    def __post_init__(self):
        object.__setattr__(self, "variant", ContextVariant(self.variant))
        object.__setattr__(self, "news_items", tuple(self.news_items))
        object.__setattr__(self, "cutoff_time", parse_timestamp(self.cutoff_time))
        if (self.transcript_text is not None) != self.variant.uses_transcript:
            raise ValidationError(
                f"variant {self.variant.value} "
                f"{'requires' if self.variant.uses_transcript else 'forbids'} a transcript"
            )
        if self.news_items and not self.variant.uses_news:
            raise ValidationError(f"variant {self.variant.value} forbids news items")
        if len(self.news_items) > NEWS_CAP:
            raise ValidationError(f"{len(self.news_items)} news items exceed the cap of {NEWS_CAP}")
        audit_news(self.news_items, self.cutoff_time)


def audit_news(items: Iterable[NewsItem], cutoff: datetime) -> None:
    """Raise :class:`LeakageError` if any item is dated after ``cutoff``."""
    cutoff = parse_timestamp(cutoff)
    late = [item for item in items if item.published_at > cutoff]
    if late:
        raise LeakageError(
            f"{len(late)} news item(s) dated after cutoff {format_timestamp(cutoff)}, "
            f"first: {late[0].title!r} at {format_timestamp(late[0].published_at)}"
        )


def filter_news(items: Sequence[NewsItem], cutoff, cap: int = NEWS_CAP) -> list:
    """Keep items published at or before ``cutoff``, newest first, at most ``cap``.

    Ties on ``published_at`` keep their input order.
    """
    if cap < 1:
        raise ValidationError(f"cap must be positive, got {cap}")
    cutoff = parse_timestamp(cutoff)
    eligible = [item for item in items if item.published_at <= cutoff]
    # sorted() is stable, so reverse=True keeps equal timestamps in input order
    eligible = sorted(eligible, key=lambda item: item.published_at, reverse=True)
    return eligible[:cap]


def build_context(
    variant: ContextVariant,
    prior_transcript: Optional[str],
    items: Sequence[NewsItem],
    cutoff,
) -> ContextBundle:
    variant = ContextVariant(variant)
    if variant.uses_transcript and prior_transcript is None:
        raise ConfigurationError(f"variant {variant.value} needs a prior-quarter transcript")
    transcript = prior_transcript if variant.uses_transcript else None
    news = filter_news(items, cutoff, NEWS_CAP) if variant.uses_news else []
    return ContextBundle(variant, transcript, news, cutoff)


def news_item_from_dict(row: dict) -> NewsItem:
    return NewsItem(
        published_at=row["published_at"],
        title=row.get("title", ""),
        snippet=row.get("snippet", ""),
        source=row.get("source", ""),
    )


def news_item_to_dict(item: NewsItem, company: Optional[str] = None) -> dict:
    row = {
        "title": item.title,
        "snippet": item.snippet,
        "source": item.source,
        "published_at": format_timestamp(item.published_at),
    }
    if company is not None:
        row["company"] = company
    return row


class NewsProvider(Protocol):
    def fetch(self, company: str, cutoff: datetime) -> list:
        """Return candidate news items for ``company``; callers still filter by cutoff."""


class FixtureNewsProvider:
    """Offline provider reading a JSONL file of news items tagged by company."""

    def __init__(self, path):
        self.path = Path(path)
        self._by_company = {}
        with self.path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    item = news_item_from_dict(row)
                    company = row["company"]
                except (KeyError, ValueError) as exc:
                    raise ValidationError(f"{self.path}:{lineno}: bad news record ({exc})") from exc
                self._by_company.setdefault(company, []).append(item)

    def fetch(self, company, cutoff):
        return list(self._by_company.get(company, []))


class HttpNewsProvider:
    """Search-API backed provider.

    Configuration comes from a JSON file with ``endpoint``, ``num_requests``,
    ``page_size`` and optionally ``api_key_env``. Responses are expected to carry
    a ``news_results`` list whose entries have ``title``, ``snippet``, ``source``
    and ``date`` (ISO-8601). Pages are fetched concurrently and merged into one
    timestamp-sorted list.
    """

    def __init__(self, endpoint, api_key_env="MENTIONCAST_NEWS_API_KEY", num_requests=1,
                 page_size=100, timeout=30.0, client=None):
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.num_requests = num_requests
        self.page_size = page_size
        self.timeout = timeout
        self._client = client

    @classmethod
    def from_config(cls, path, client=None):
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
        try:
            endpoint = cfg["endpoint"]
        except KeyError as exc:
            raise ConfigurationError(f"{path}: news provider config needs 'endpoint'") from exc
        return cls(
            endpoint,
            api_key_env=cfg.get("api_key_env", "MENTIONCAST_NEWS_API_KEY"),
            num_requests=int(cfg.get("num_requests", 1)),
            page_size=int(cfg.get("page_size", 100)),
            timeout=float(cfg.get("timeout", 30.0)),
            client=client,
        )

    def _get_page(self, client, company, cutoff, page):
        params = {
            "q": company,
            "before": format_timestamp(cutoff),
            "num": self.page_size,
            "start": page * self.page_size,
            "api_key": os.environ.get(self.api_key_env, ""),
        }
        resp = client.get(self.endpoint, params=params, timeout=self.timeout)
        resp.raise_for_status()
        out = []
        for entry in resp.json().get("news_results", []):
            try:
                out.append(NewsItem(
                    published_at=entry["date"],
                    title=entry.get("title", ""),
                    snippet=entry.get("snippet", ""),
                    source=entry.get("source", ""),
                ))
            except (KeyError, ValidationError):
                logger.warning("dropping news result without a parseable date: %r", entry.get("title"))
        return out

    def fetch(self, company, cutoff):
        import httpx

        client = self._client or httpx.Client()
        try:
            with ThreadPoolExecutor(max_workers=max(1, self.num_requests)) as pool:
                pages = list(pool.map(
                    lambda page: self._get_page(client, company, cutoff, page),
                    range(self.num_requests),
                ))
        finally:
            if self._client is None:
                client.close()
        merged = [item for page in pages for item in page]
        merged.sort(key=lambda item: (item.published_at, item.title, item.source, item.snippet))
        return merged

"""Contract settlement by verbatim keyword presence in a post-call transcript."""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass

from .errors import ValidationError
from .model import Outcome


class CaseSensitivity(str, enum.Enum):
    CASE_SENSITIVE = "case_sensitive"
    CASE_INSENSITIVE = "case_insensitive"


class Boundary(str, enum.Enum):
    SUBSTRING = "substring"
    WORD_BOUNDARY = "word_boundary"


@dataclass(frozen=True)
class MatchMode:
    case_sensitivity: CaseSensitivity = CaseSensitivity.CASE_INSENSITIVE
    boundary: Boundary = Boundary.WORD_BOUNDARY

    def __post_init__(self):
        object.__setattr__(self, "case_sensitivity", CaseSensitivity(self.case_sensitivity))
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    def to_dict(self):
        return {"case_sensitivity": self.case_sensitivity.value, "boundary": self.boundary.value}


DEFAULT_MODE = MatchMode()

_WHITESPACE = re.compile(r"\s+")

# Hyphens and apostrophes join words: "AI-driven" must not settle "AI".
_JOINERS = "-'’"
_WORD_CHAR = r"[^\W_]|[" + re.escape(_JOINERS) + r"]"


def normalize_text(text: str, mode: MatchMode = DEFAULT_MODE) -> str:
    """NFC-normalize, collapse whitespace runs to one space, lowercase if insensitive."""
    text = unicodedata.normalize("NFC", text)
    text = _WHITESPACE.sub(" ", text)
    if mode.case_sensitivity is CaseSensitivity.CASE_INSENSITIVE:
        text = text.lower()
    return text


def keyword_pattern(keyword: str, mode: MatchMode = DEFAULT_MODE) -> re.Pattern:
    needle = normalize_text(keyword.strip(), mode)
    body = re.escape(needle)
    if mode.boundary is Boundary.WORD_BOUNDARY:
        body = rf"(?<!{_WORD_CHAR}){body}(?!{_WORD_CHAR})"
    return re.compile(body)


def resolve_mention(keyword: str, transcript: str, mode: MatchMode = DEFAULT_MODE) -> Outcome:
    """Settle a contract: YES iff the keyword occurs in the transcript under ``mode``.

    Both sides go through :func:`normalize_text`. Under ``word_boundary`` the
    match may not be flanked by a letter, digit, hyphen or apostrophe.
    """
    if not isinstance(keyword, str) or not keyword.strip():
        raise ValidationError(f"keyword must be non-empty, got {keyword!r}")
    haystack = normalize_text(transcript, mode)
    found = keyword_pattern(keyword, mode).search(haystack) is not None
    return Outcome.YES if found else Outcome.NO

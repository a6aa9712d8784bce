"""Tokenization schemes for BLEU scoring.

Two schemes are supported:

* ``13a`` -- the mteval-v13a tokenization of the WMT scoring lineage:
  skipped-tag removal, HTML entity unescaping, and punctuation splitting
  with digit-context exceptions (a period or comma between digits stays
  attached, as in ``5,6 Punkte``).  No unicode normalization is applied.
* ``none`` -- no normalization; tokens are maximal runs of non-whitespace.

Tokenization is a pure function of the input line and is safe to call from
any number of threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigError

SCHEMES = ("13a", "none")

# Applied in order. Skipped-region tags are removed before entities are
# unescaped, so a literal "&lt;skipped&gt;" survives as text.
_REPLACEMENTS = (
    ("<skipped>", ""),
    ("-\n", ""),
    ("\n", " "),
    ("&quot;", '"'),
    ("&amp;", "&"),
    ("&lt;", "<"),
    ("&gt;", ">"),
)

# ASCII punctuation/symbol ranges of the v13a scorer, kept verbatim so the
# split set matches the reference implementation character for character.
_SYMBOLS = re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])")
_PERIOD_COMMA_NOT_AFTER_DIGIT = re.compile(r"([^0-9])([\.,])")
_PERIOD_COMMA_NOT_BEFORE_DIGIT = re.compile(r"([\.,])([^0-9])")
_DASH_AFTER_DIGIT = re.compile(r"([0-9])(-)")
_WHITESPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class TokenizerConfig:
    """Tokenization settings; the defaults give mixed-case 13a scoring."""

    scheme: str = "13a"
    lowercase: bool = False

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(
                f"unknown tokenizer scheme {self.scheme!r}; expected one of {SCHEMES}"
            )

    @property
    def case_label(self) -> str:
        return "lc" if self.lowercase else "mixed"


def normalize_13a(line: str) -> str:
    """Return the 13a-normalized form of ``line``: tokens joined by single spaces."""
    norm = line
    for old, new in _REPLACEMENTS:
        norm = norm.replace(old, new)
    # Padding with spaces lets the edge regexes see sentence-final punctuation.
    norm = " {} ".format(norm)
    norm = _SYMBOLS.sub(" \\1 ", norm)
    norm = _PERIOD_COMMA_NOT_AFTER_DIGIT.sub("\\1 \\2 ", norm)
    norm = _PERIOD_COMMA_NOT_BEFORE_DIGIT.sub(" \\1 \\2", norm)
    norm = _DASH_AFTER_DIGIT.sub("\\1 \\2 ", norm)
    return _WHITESPACE.sub(" ", norm).strip()


def tokenize(text: str, config: TokenizerConfig = TokenizerConfig()) -> list[str]:
    """Tokenize one segment. An empty segment yields an empty token list."""
    if config.lowercase:
        text = text.lower()
    if config.scheme == "13a":
        return normalize_13a(text).split()
    return text.split()


def join(tokens: Iterable[str]) -> str:
    """Inverse-ish of :func:`tokenize`: tokens joined by single spaces."""
    return " ".join(tokens)

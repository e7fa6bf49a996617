"""Lexicon category scoring for short texts.

A lexicon groups weighted word patterns into named categories. Patterns
are either exact words or stem prefixes (trailing ``*``). A text is
tokenized and every token is matched against every category; per token
and category only the best matching pattern counts (longest pattern
first, then highest weight). Scores are reported per category as

    100 * sum(matched weights) / token_count

so a category score is the weighted share of tokens in percent. Words
may belong to several categories at once and then count toward each.

Categories can declare a parent; a parent category holds the union of
its descendants' entries and is scored like any other category. When
both ``posemo`` and ``negemo`` exist, a derived ``emo`` value equal to
their difference is added to every score mapping.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

__all__ = [
    "LexiconError",
    "LexEntry",
    "LexCategory",
    "Lexicon",
    "CategoryScores",
    "tokenize",
    "parse_lexicon",
    "load_lexicon",
    "load_demo_lexicon",
    "score_tweet",
    "LexiconScorer",
]

_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_MENTION_RE = re.compile(r"@\w+")
# word chars minus underscore, with internal apostrophes kept
_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)*")


class LexiconError(ValueError):
    """Raised for malformed lexicon documents."""


def tokenize(text: str) -> list[str]:
    """Split a message into lowercase tokens.

    URLs and @mentions are removed entirely, ``#`` is stripped from
    hashtags (the tag body stays a token), internal apostrophes are kept
    and all other punctuation separates tokens.
    """
    lowered = text.lower().replace("’", "'")
    lowered = _URL_RE.sub(" ", lowered)
    lowered = _MENTION_RE.sub(" ", lowered)
    return _TOKEN_RE.findall(lowered)


@dataclass(frozen=True)
class LexEntry:
    """One weighted pattern; ``prefix`` marks a trailing-``*`` stem."""

    pattern: str
    weight: float = 1.0
    prefix: bool = False


@dataclass(frozen=True)
class LexCategory:
    name: str
    parent: str | None = None
    entries: tuple[LexEntry, ...] = ()


@dataclass(frozen=True)
class Lexicon:
    """Parsed lexicon with parent entries already materialized."""

    categories: tuple[LexCategory, ...]
    version: str = ""

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.categories)

    def resolve(self, name: str) -> str:
        """Map a case-insensitive category name to its declared form."""
        for cat in self.categories:
            if cat.name.lower() == name.lower():
                return cat.name
        raise KeyError(f"unknown category {name!r}")

    @cached_property
    def _index(self) -> "_MatchIndex":
        return _MatchIndex(self.categories)


class _MatchIndex:
    """Token -> per-category best-match lookup tables."""

    def __init__(self, categories: tuple[LexCategory, ...]):
        exact: dict[str, dict[int, float]] = {}
        prefixes: dict[str, dict[int, float]] = {}
        for ci, cat in enumerate(categories):
            for entry in cat.entries:
                table = prefixes if entry.prefix else exact
                per_cat = table.setdefault(entry.pattern, {})
                # several entries with the same pattern: keep the heaviest
                if entry.weight > per_cat.get(ci, 0.0):
                    per_cat[ci] = entry.weight
        self.exact = {p: tuple(d.items()) for p, d in exact.items()}
        self.prefixes = {p: tuple(d.items()) for p, d in prefixes.items()}
        lengths = [len(p) for p in prefixes]
        self.min_prefix = min(lengths, default=1)
        self.max_prefix = max(lengths, default=0)
        self.n_categories = len(categories)

    def match_token(self, token: str) -> Iterable[tuple[int, float]]:
        """Yield (category index, weight) of the best match per category.

        Longest pattern wins, then highest weight; on a full tie the
        exact entry beats the prefix entry.
        """
        best: dict[int, tuple[int, float, bool]] = {}
        for ci, weight in self.exact.get(token, ()):
            best[ci] = (len(token), weight, True)
        top = min(len(token), self.max_prefix)
        for length in range(top, self.min_prefix - 1, -1):
            for ci, weight in self.prefixes.get(token[:length], ()):
                cur = best.get(ci)
                if cur is None or length > cur[0] or (length == cur[0] and weight > cur[1]):
                    best[ci] = (length, weight, False)
        return ((ci, w) for ci, (_, w, _) in best.items())


@dataclass(frozen=True)
class CategoryScores:
    """Per-category scores of one text, in percent of tokens."""

    values: Mapping[str, float]
    token_count: int

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def get(self, name: str, default: float = 0.0) -> float:
        return self.values.get(name, default)


def _parse_entry_line(line: str, lineno: int) -> LexEntry:
    parts = line.split()
    if len(parts) == 1:
        pattern, weight = parts[0], 1.0
    elif len(parts) == 2:
        pattern = parts[0]
        try:
            weight = float(parts[1])
        except ValueError:
            raise LexiconError(
                f"line {lineno}: expected a numeric weight, got {parts[1]!r}"
            ) from None
    else:
        raise LexiconError(f"line {lineno}: malformed entry {line!r}")
    if weight <= 0:
        raise LexiconError(f"line {lineno}: weight must be > 0, got {weight}")
    prefix = pattern.endswith("*")
    if prefix:
        pattern = pattern[:-1]
    if not pattern:
        raise LexiconError(f"line {lineno}: empty pattern")
    if "*" in pattern:
        raise LexiconError(f"line {lineno}: '*' is only allowed at the end of a pattern")
    return LexEntry(pattern.lower(), weight, prefix)


def parse_lexicon(text: str) -> Lexicon:
    """Parse a lexicon document.

    Grammar, one item per line (``#`` starts a comment):

        %version <label>
        %category <name> [parent=<name>]
        <pattern> [<weight>]

    Entries attach to the most recently declared category. Category
    names are unique case-insensitively. Parents may be declared in any
    order; cycles are rejected. After parsing, every category's entries
    include those of all its descendants.
    """
    version = ""
    order: list[str] = []                  # declared names, declaration order
    parents: dict[str, str | None] = {}
    direct: dict[str, list[LexEntry]] = {}
    current: str | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("%version"):
            version = line[len("%version"):].strip()
            continue
        if line.startswith("%category"):
            rest = line[len("%category"):].strip()
            if " parent=" in rest:
                name, parent = rest.rsplit(" parent=", 1)
                name, parent = name.strip(), parent.strip()
                if not parent:
                    raise LexiconError(f"line {lineno}: empty parent name")
            else:
                name, parent = rest, None
            if not name:
                raise LexiconError(f"line {lineno}: empty category name")
            if name.lower() in (n.lower() for n in order):
                raise LexiconError(f"line {lineno}: duplicate category {name!r}")
            order.append(name)
            parents[name] = parent
            direct[name] = []
            current = name
            continue
        if line.startswith("%"):
            raise LexiconError(f"line {lineno}: unknown directive {line.split()[0]!r}")
        if current is None:
            raise LexiconError(f"line {lineno}: entry before any %category declaration")
        direct[current].append(_parse_entry_line(line, lineno))

    if not order:
        raise LexiconError("lexicon declares no categories")

    by_lower = {n.lower(): n for n in order}
    for name in order:
        parent = parents[name]
        if parent is None:
            continue
        resolved = by_lower.get(parent.lower())
        if resolved is None:
            raise LexiconError(f"category {name!r} names unknown parent {parent!r}")
        if resolved == name:
            raise LexiconError(f"category {name!r} is its own parent")
        parents[name] = resolved

    # cycle check, then propagate entries to all ancestors
    for name in order:
        seen = {name}
        node = parents[name]
        while node is not None:
            if node in seen:
                raise LexiconError(f"parent cycle through category {node!r}")
            seen.add(node)
            node = parents[node]

    materialized: dict[str, list[LexEntry]] = {n: list(direct[n]) for n in order}
    for name in order:
        node = parents[name]
        while node is not None:
            materialized[node].extend(direct[name])
            node = parents[node]

    categories = tuple(
        LexCategory(name=n, parent=parents[n], entries=tuple(materialized[n]))
        for n in order
    )
    return Lexicon(categories=categories, version=version)


def load_lexicon(path) -> Lexicon:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_lexicon(fh.read())


def load_demo_lexicon() -> Lexicon:
    """Load the bundled demonstration lexicon (~200 entries)."""
    text = resources.files("firestorm").joinpath("data/demo_lexicon.txt").read_text("utf-8")
    return parse_lexicon(text)


def _has_emo(lexicon: Lexicon) -> tuple[str, str] | None:
    lower = {n.lower(): n for n in lexicon.names}
    if "posemo" in lower and "negemo" in lower:
        return lower["posemo"], lower["negemo"]
    return None


def score_names(lexicon: Lexicon) -> tuple[str, ...]:
    """Keys present in every score mapping for this lexicon."""
    names = list(lexicon.names)
    if _has_emo(lexicon) is not None:
        names.append("emo")
    return tuple(names)


def score_tokens(tokens: list[str], lexicon: Lexicon) -> CategoryScores:
    index = lexicon._index
    names = lexicon.names
    n = len(tokens)
    sums = np.zeros(len(names))
    for token in tokens:
        for ci, weight in index.match_token(token):
            sums[ci] += weight
    values: dict[str, float]
    if n == 0:
        values = {name: 0.0 for name in names}
    else:
        scaled = sums * (100.0 / n)
        values = {name: float(scaled[i]) for i, name in enumerate(names)}
    emo = _has_emo(lexicon)
    if emo is not None:
        values["emo"] = values[emo[0]] - values[emo[1]]
    return CategoryScores(values=values, token_count=n)


def score_tweet(text: str, lexicon: Lexicon) -> CategoryScores:
    """Tokenize ``text`` and score it against every lexicon category."""
    return score_tokens(tokenize(text), lexicon)


class LexiconScorer(BaseEstimator, TransformerMixin):
    """Turn texts into a matrix of lexicon category scores.

    Parameters
    ----------
    lexicon : Lexicon or None
        Lexicon to score against; ``None`` selects the bundled demo
        lexicon when ``fit`` runs.

    Attributes
    ----------
    lexicon_ : Lexicon
        Lexicon resolved during ``fit``.
    feature_names_ : tuple of str
        Column names of the transformed matrix, category declaration
        order plus a final derived ``emo`` column when available.
    """

    def __init__(self, lexicon: Lexicon | None = None):
        self.lexicon = lexicon

    def fit(self, X=None, y=None) -> "LexiconScorer":
        self.lexicon_ = self.lexicon if self.lexicon is not None else load_demo_lexicon()
        self.feature_names_ = score_names(self.lexicon_)
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "lexicon_"):
            raise RuntimeError("LexiconScorer is not fitted; call fit first")
        texts = list(X)
        out = np.zeros((len(texts), len(self.feature_names_)))
        for i, text in enumerate(texts):
            if not isinstance(text, str):
                raise TypeError(f"expected str at position {i}, got {type(text).__name__}")
            scores = score_tweet(text, self.lexicon_)
            out[i] = [scores.values[name] for name in self.feature_names_]
        return out

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        if not hasattr(self, "feature_names_"):
            raise RuntimeError("LexiconScorer is not fitted; call fit first")
        return np.asarray(self.feature_names_, dtype=object)

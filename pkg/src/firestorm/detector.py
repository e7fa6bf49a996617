"""Streaming firestorm detection over half-hour ticks.

Every half hour the detector appends the new slice's mean category
scores to per-category rolling windows of 49 values (the slices
``[t-48 .. t]``) and, once a full day of history exists (t >= 48),
re-runs change-point detection on each window. A category is flagged
when it has a fresh change point: one whose post-change segment began
within the last ``recency`` slices, i.e. ``t - changepoint <= recency``.
An alert fires when at least ``min_categories`` categories are flagged
in the same tick.

Detector state is bounded: the rolling windows plus one carry-forward
value and a few counters per category, independent of stream length.
Re-running detection on 49 points each tick costs microseconds and
keeps streaming output exactly equal to batch detection on the same
window.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ._validation import check_nonnegative_int
from .changepoint import FeatureSeries, detect
from .corpus import EventDataset, Tweet, bucketize
from .lexicon import Lexicon, load_demo_lexicon, score_names, score_tweet

__all__ = [
    "DEFAULT_CATEGORIES",
    "StreamConfig",
    "RollingWindow",
    "CategoryTick",
    "TickReport",
    "CategorySummary",
    "DetectionSummary",
    "StreamResult",
    "category_series",
    "category_series_matrix",
    "tick",
    "StreamDetector",
    "run_stream",
]

DEFAULT_CATEGORIES: tuple[str, ...] = ("netspeak", "I", "posemo", "emo", "assent")

WINDOW_VALUES = 49  # one day of half-hour slices plus the current one


@dataclass(frozen=True)
class StreamConfig:
    """Alert configuration for the streaming detector."""

    categories: tuple[str, ...] = DEFAULT_CATEGORIES
    min_categories: int = 2
    recency: int = 2
    window: int = WINDOW_VALUES
    reference_slice: int | None = None

    def __post_init__(self):
        if not self.categories:
            raise ValueError("at least one category is required")
        if not 1 <= self.min_categories <= len(self.categories):
            raise ValueError(
                f"min_categories must be in 1..{len(self.categories)}, "
                f"got {self.min_categories}"
            )
        check_nonnegative_int(self.recency, "recency")
        if self.window < 3:
            raise ValueError(f"window must be >= 3 slices, got {self.window}")


@dataclass(frozen=True)
class RollingWindow:
    """The last ``min(t+1, window)`` per-slice values of one category."""

    category: str
    t: int                  # absolute slice index of values[-1]
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CategoryTick:
    category: str
    changepoints: tuple[int, ...]   # absolute slice indices
    fresh: bool


@dataclass(frozen=True)
class TickReport:
    t: int
    categories: tuple[CategoryTick, ...]
    alert: bool
    alerting: tuple[str, ...]


@dataclass(frozen=True)
class CategorySummary:
    """All change points one category reported over the full stream."""

    category: str
    changepoints: tuple[int, ...]       # absolute slices, sorted, deduplicated
    n_gap_slices: int = 0
    closest: int | None = None          # closest to the reference start
    offset_slices: int | None = None
    # first tick that reported the break behind ``closest``; overlapping
    # windows may place the same boundary one slice apart, so a report
    # within one slice of it counts
    first_notice_tick: int | None = None


@dataclass(frozen=True)
class DetectionSummary:
    reference: int | None
    categories: tuple[CategorySummary, ...]
    combined: CategorySummary
    alert_ticks: tuple[int, ...]
    n_ticks: int
    max_state_floats: int

    def category(self, name: str) -> CategorySummary:
        for summary in self.categories:
            if summary.category == name:
                return summary
        raise KeyError(f"no summary for category {name!r}")


@dataclass(frozen=True)
class StreamResult:
    ticks: tuple[TickReport, ...]
    summary: DetectionSummary


def _resolve_categories(lexicon: Lexicon, categories: Sequence[str]) -> tuple[str, ...]:
    """Map requested category names onto the lexicon's score keys."""
    available = {name.lower(): name for name in score_names(lexicon)}
    resolved = []
    for name in categories:
        hit = available.get(name.lower())
        if hit is None:
            raise KeyError(f"category {name!r} is not scored by this lexicon")
        resolved.append(hit)
    return tuple(resolved)


def _slice_means(bucket: Sequence[Tweet], lexicon: Lexicon,
                 categories: tuple[str, ...]) -> dict[str, float] | None:
    """Mean category scores of one bucket, None for an empty bucket.

    Used by both the batch series builder and the streaming detector so
    the two paths produce bit-identical values.
    """
    if not bucket:
        return None
    sums = dict.fromkeys(categories, 0.0)
    for tweet in bucket:
        scores = score_tweet(tweet.text, lexicon)
        for cat in categories:
            sums[cat] += scores.values[cat]
    n = len(bucket)
    return {cat: sums[cat] / n for cat in categories}


def category_series_matrix(
    buckets: Sequence[Sequence[Tweet]], lexicon: Lexicon, categories: Sequence[str]
) -> dict[str, FeatureSeries]:
    """Per-slice mean score series for several categories at once.

    Each tweet is scored once. Empty buckets carry the previous value
    forward (zeros before the first data) and are listed in ``gaps``.
    """
    cats = _resolve_categories(lexicon, categories)
    values = {cat: np.zeros(len(buckets)) for cat in cats}
    last = dict.fromkeys(cats, 0.0)
    gaps: list[int] = []
    for t, bucket in enumerate(buckets):
        means = _slice_means(bucket, lexicon, cats)
        if means is None:
            gaps.append(t)
        else:
            last = means
        for cat in cats:
            values[cat][t] = last[cat]
    return {
        cat: FeatureSeries(name=cat, values=values[cat], t0=0, gaps=tuple(gaps))
        for cat in cats
    }


def category_series(
    buckets: Sequence[Sequence[Tweet]], lexicon: Lexicon, category: str
) -> FeatureSeries:
    """Per-slice mean score series of a single category."""
    return next(iter(category_series_matrix(buckets, lexicon, [category]).values()))


def _fresh(changepoint_abs: int, t: int, recency: int) -> bool:
    return t - changepoint_abs <= recency


def tick(windows: Sequence[RollingWindow], config: StreamConfig) -> TickReport:
    """Detect on each category window and aggregate into an alert decision."""
    if not windows:
        raise ValueError("tick needs at least one rolling window")
    t = windows[0].t
    if any(w.t != t for w in windows):
        raise ValueError("all rolling windows must end at the same slice")
    if t < config.window - 1:
        raise ValueError(
            f"tick needs a full window of {config.window} slices; t={t} is too early"
        )
    category_ticks = []
    alerting = []
    for w in windows:
        if len(w.values) != config.window:
            raise ValueError(
                f"window for {w.category!r} has {len(w.values)} values, "
                f"expected {config.window}"
            )
        result = detect(w.values)
        offset = t - (config.window - 1)
        cps = tuple(offset + cp for cp in result.changepoints)
        fresh = any(_fresh(cp, t, config.recency) for cp in cps)
        category_ticks.append(CategoryTick(category=w.category, changepoints=cps, fresh=fresh))
        if fresh:
            alerting.append(w.category)
    alert = len(alerting) >= config.min_categories
    return TickReport(
        t=t, categories=tuple(category_ticks), alert=alert, alerting=tuple(alerting)
    )


class StreamDetector:
    """Stateful per-slice detector.

    Feed one bucket of tweets per half-hour slice via ``push_slice``;
    from slice 48 on each push returns a :class:`TickReport`. Retained
    state is the rolling windows plus one carry value and a gap counter
    per category, nothing that grows with the stream.
    """

    def __init__(self, lexicon: Lexicon | None = None, config: StreamConfig | None = None):
        self.lexicon = lexicon if lexicon is not None else load_demo_lexicon()
        self.config = config if config is not None else StreamConfig()
        self.categories = _resolve_categories(self.lexicon, self.config.categories)
        self._windows = {
            cat: deque(maxlen=self.config.window) for cat in self.categories
        }
        self._last = dict.fromkeys(self.categories, 0.0)
        self._gap_counts = dict.fromkeys(self.categories, 0)
        self._t = -1

    @property
    def t(self) -> int:
        """Slice index of the most recently pushed bucket, -1 initially."""
        return self._t

    def push_slice(self, bucket: Sequence[Tweet]) -> TickReport | None:
        """Consume the next slice's tweets; report once history is full."""
        self._t += 1
        means = _slice_means(bucket, self.lexicon, self.categories)
        if means is None:
            for cat in self.categories:
                self._gap_counts[cat] += 1
        else:
            self._last = means
        for cat in self.categories:
            self._windows[cat].append(self._last[cat])
        if self._t < self.config.window - 1:
            return None
        windows = [
            RollingWindow(category=cat, t=self._t,
                          values=np.array(self._windows[cat], dtype=np.float64))
            for cat in self.categories
        ]
        return tick(windows, self.config)

    def gap_count(self, category: str) -> int:
        return self._gap_counts[category]

    def state_size(self) -> int:
        """Number of retained floats; constant once the windows filled."""
        return sum(len(w) for w in self._windows.values()) + len(self._last)


def _closest(changepoints: Sequence[int], reference: int) -> int | None:
    """Change point nearest to the reference; ties go to the earlier one."""
    if not changepoints:
        return None
    return min(changepoints, key=lambda cp: (abs(cp - reference), cp))


def _summarize_category(
    name: str,
    cps_first_tick: Mapping[int, int],
    n_gaps: int,
    reference: int | None,
) -> CategorySummary:
    cps = tuple(sorted(cps_first_tick))
    closest = offset = first_tick = None
    if reference is not None:
        closest = _closest(cps, reference)
        if closest is not None:
            offset = closest - reference
            first_tick = min(
                tick
                for cp, tick in cps_first_tick.items()
                if abs(cp - closest) <= 1
            )
    return CategorySummary(
        category=name,
        changepoints=cps,
        n_gap_slices=n_gaps,
        closest=closest,
        offset_slices=offset,
        first_notice_tick=first_tick,
    )


def run_stream(
    ds: EventDataset,
    lexicon: Lexicon | None = None,
    config: StreamConfig | None = None,
) -> StreamResult:
    """Simulate streaming over a recorded dataset, slice by slice.

    Returns every tick report plus a summary holding, per category and
    combined, all change points seen over the run, the one closest to
    the configured reference slice, and the first tick that reported it.
    """
    config = config if config is not None else StreamConfig()
    if ds.n_slices < config.window:
        raise ValueError(
            f"dataset spans {ds.n_slices} slices; streaming needs at least {config.window}"
        )
    detector = StreamDetector(lexicon, config)
    buckets = bucketize(ds)

    reports: list[TickReport] = []
    alert_ticks: list[int] = []
    first_seen: dict[str, dict[int, int]] = {cat: {} for cat in detector.categories}
    combined_seen: dict[int, int] = {}
    max_state = 0
    for bucket in buckets:
        report = detector.push_slice(bucket)
        max_state = max(max_state, detector.state_size())
        if report is None:
            continue
        reports.append(report)
        if report.alert:
            alert_ticks.append(report.t)
        for cat_tick in report.categories:
            seen = first_seen[cat_tick.category]
            for cp in cat_tick.changepoints:
                if cp not in seen:
                    seen[cp] = report.t
                if cp not in combined_seen:
                    combined_seen[cp] = report.t

    reference = config.reference_slice
    categories = tuple(
        _summarize_category(cat, first_seen[cat], detector.gap_count(cat), reference)
        for cat in detector.categories
    )
    combined = _summarize_category("*", combined_seen, 0, reference)
    summary = DetectionSummary(
        reference=reference,
        categories=categories,
        combined=combined,
        alert_ticks=tuple(alert_ticks),
        n_ticks=len(reports),
        max_state_floats=max_state,
    )
    return StreamResult(ticks=tuple(reports), summary=summary)

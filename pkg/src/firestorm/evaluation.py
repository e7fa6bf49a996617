"""Event evaluation: start/peak anchors, offsets, and group comparisons.

The start of an event is the first half-hour slice where its token is
the strict modal hashtag-or-mention; the two peaks are the argmax of
the windowed max in-degree series and of the per-slice firestorm tweet
count. Detection quality is summarized by the signed offset (in hours)
of the change point closest to a reference slice. Lexical differences
between tweet groups are tested per category with Welch's unequal
variance t-test, two-sided, significant below p = 0.01.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import betainc

from .changepoint import DEFAULT_BETAS, detect
from .corpus import EventDataset, Tweet, bucketize, is_firestorm_tweet
from .detector import DEFAULT_CATEGORIES, category_series_matrix
from .lexicon import Lexicon, score_names, score_tweet
from .network import build_network, largest_component_nodes, metric_series

__all__ = [
    "EvaluationError",
    "EventTimeline",
    "TTestResult",
    "WelchResult",
    "OffsetStats",
    "ALPHA",
    "start_time",
    "peaks",
    "firestorm_counts",
    "event_timeline",
    "welch_ttest",
    "compare_categories",
    "firestorm_groups",
    "component_split_compare",
    "predictor_relevance",
    "detect_categories",
    "offset_stats",
]

ALPHA = 0.01


class EvaluationError(ValueError):
    """Raised when an evaluation quantity is undefined for a dataset."""


@dataclass(frozen=True)
class EventTimeline:
    start_slice: int
    peak_indegree_slice: int
    peak_volume_slice: int
    firestorm_counts: tuple[int, ...]


@dataclass(frozen=True)
class WelchResult:
    t: float
    dof: float
    p: float


@dataclass(frozen=True)
class TTestResult:
    category: str
    n_fire: int
    n_nonfire: int
    mean_fire: float
    mean_nonfire: float
    t_statistic: float
    dof: float
    p_value: float
    significant: bool
    direction: str          # "more" iff mean_fire > mean_nonfire, else "less"
    skipped: bool = False   # a group had fewer than 2 tweets


@dataclass(frozen=True)
class OffsetStats:
    offsets_hours: tuple[float, ...]
    mean_hours: float
    sd_hours: float
    n_events: int
    n_excluded: int         # events with no change points at all
    single: bool            # sd undefined from one offset, reported as 0


def _entity_counts(bucket: Sequence[Tweet]) -> Counter:
    """Occurrences of each '#tag' and '@user' in one bucket."""
    counts: Counter = Counter()
    for tweet in bucket:
        for tag in tweet.hashtags:
            counts["#" + tag] += 1
        for user in tweet.mentions:
            counts["@" + user] += 1
    return counts


def start_time(ds: EventDataset) -> int:
    """First slice where the event token is the strict modal entity.

    Strict: the token's count must exceed every competing hashtag and
    mention count in that slice; a tie is not yet "the most frequent".
    """
    for t, bucket in enumerate(bucketize(ds)):
        counts = _entity_counts(bucket)
        own = counts.get(ds.label, 0)
        if own < 1:
            continue
        competing = max(
            (count for token, count in counts.items() if token != ds.label),
            default=0,
        )
        if own > competing:
            return t
    raise EvaluationError(f"no start found: {ds.label} is never the modal entity")


def firestorm_counts(ds: EventDataset) -> np.ndarray:
    """Per-slice count of tweets carrying the event label."""
    counts = np.zeros(ds.n_slices, dtype=np.int64)
    for t, bucket in enumerate(bucketize(ds)):
        counts[t] = sum(1 for tweet in bucket if is_firestorm_tweet(tweet, ds.label))
    return counts


def peaks(ds: EventDataset) -> tuple[int, int]:
    """(argmax of windowed max in-degree, argmax of firestorm volume).

    Ties resolve to the smallest slice index.
    """
    indegree = metric_series(ds, "max_in_degree")
    peak_indegree = int(np.argmax(indegree.values))
    volume = firestorm_counts(ds)
    if volume.sum() == 0:
        raise EvaluationError(f"no tweets carry {ds.label}; volume peak is undefined")
    peak_volume = int(np.argmax(volume))
    return peak_indegree, peak_volume


def event_timeline(ds: EventDataset) -> EventTimeline:
    peak_indegree, peak_volume = peaks(ds)
    return EventTimeline(
        start_slice=start_time(ds),
        peak_indegree_slice=peak_indegree,
        peak_volume_slice=peak_volume,
        firestorm_counts=tuple(int(c) for c in firestorm_counts(ds)),
    )


def welch_ttest(a, b) -> WelchResult:
    """Welch's unequal-variance t-test, two-sided.

    The p-value comes from the Student-t CDF evaluated through the
    regularized incomplete beta function. Both groups need >= 2 values.
    When both sample variances are zero the test degenerates: equal
    means give (t=0, p=1), distinct means are treated as an exact
    difference with p = 0 and an infinite statistic.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise ValueError(f"welch_ttest needs >= 2 values per group, got {n1} and {n2}")
    m1, m2 = float(a.mean()), float(b.mean())
    v1 = float(a.var(ddof=1))
    v2 = float(b.var(ddof=1))
    if v1 == 0.0 and v2 == 0.0:
        dof = float(n1 + n2 - 2)
        if m1 == m2:
            return WelchResult(t=0.0, dof=dof, p=1.0)
        return WelchResult(t=math.copysign(math.inf, m1 - m2), dof=dof, p=0.0)
    se2 = v1 / n1 + v2 / n2
    t = (m1 - m2) / math.sqrt(se2)
    dof = se2 * se2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    p = float(betainc(dof / 2.0, 0.5, dof / (dof + t * t)))
    return WelchResult(t=t, dof=dof, p=p)


def _score_matrix(tweets: Sequence[Tweet], lexicon: Lexicon) -> np.ndarray:
    names = score_names(lexicon)
    out = np.zeros((len(tweets), len(names)))
    for i, tweet in enumerate(tweets):
        scores = score_tweet(tweet.text, lexicon)
        out[i] = [scores.values[name] for name in names]
    return out


def compare_categories(
    fire: Sequence[Tweet],
    nonfire: Sequence[Tweet],
    lexicon: Lexicon,
    alpha: float = ALPHA,
) -> list[TTestResult]:
    """Per-category Welch t-tests of fire vs non-fire per-tweet scores.

    Categories where either group has fewer than 2 tweets are returned
    flagged as skipped with NaN statistics.
    """
    names = score_names(lexicon)
    fire_scores = _score_matrix(fire, lexicon)
    nonfire_scores = _score_matrix(nonfire, lexicon)
    results = []
    for j, name in enumerate(names):
        n1, n2 = len(fire), len(nonfire)
        if n1 < 2 or n2 < 2:
            results.append(TTestResult(
                category=name, n_fire=n1, n_nonfire=n2,
                mean_fire=float(fire_scores[:, j].mean()) if n1 else math.nan,
                mean_nonfire=float(nonfire_scores[:, j].mean()) if n2 else math.nan,
                t_statistic=math.nan, dof=math.nan, p_value=math.nan,
                significant=False, direction="", skipped=True,
            ))
            continue
        welch = welch_ttest(fire_scores[:, j], nonfire_scores[:, j])
        m1 = float(fire_scores[:, j].mean())
        m2 = float(nonfire_scores[:, j].mean())
        results.append(TTestResult(
            category=name, n_fire=n1, n_nonfire=n2,
            mean_fire=m1, mean_nonfire=m2,
            t_statistic=welch.t, dof=welch.dof, p_value=welch.p,
            significant=welch.p < alpha,
            direction="more" if m1 > m2 else "less",
        ))
    return results


def _week_before(ds: EventDataset, start_slice: int) -> tuple[int, int]:
    """Slice interval [lo, hi) of the week before the given start."""
    lo = max(0, start_slice - 7 * 48)
    return lo, start_slice


def firestorm_groups(
    ds: EventDataset,
    reference_slice: int | None = None,
    scope: str = "all",
) -> tuple[list[Tweet], list[Tweet]]:
    """Split a dataset into firestorm tweets and the comparison group.

    Firestorm tweets carry the event label. The comparison group is the
    label-free tweets from the week before the start, restricted to
    users who contributed to the firestorm. ``scope="mention"``
    restricts both groups to tweets with at least one mention of
    another user (the mention-network tweets).
    """
    if scope not in ("all", "mention"):
        raise ValueError(f"scope must be 'all' or 'mention', got {scope!r}")
    start = reference_slice if reference_slice is not None else start_time(ds)
    fire = [t for t in ds.tweets if is_firestorm_tweet(t, ds.label)]
    if not fire:
        raise EvaluationError(f"no tweets carry {ds.label}")
    fire_users = {t.author for t in fire}
    lo, hi = _week_before(ds, start)
    buckets = bucketize(ds)
    nonfire = [
        t
        for s in range(lo, hi)
        for t in buckets[s]
        if t.author in fire_users and not is_firestorm_tweet(t, ds.label)
    ]
    if scope == "mention":
        fire = [t for t in fire if _mentions_other(t)]
        nonfire = [t for t in nonfire if _mentions_other(t)]
    if not nonfire:
        raise EvaluationError(
            "no pre-event tweets from firestorm participants to compare against"
        )
    return fire, nonfire


def _mentions_other(tweet: Tweet) -> bool:
    return any(m != tweet.author for m in tweet.mentions)


def component_split_compare(
    ds: EventDataset, lexicon: Lexicon, alpha: float = ALPHA
) -> list[TTestResult]:
    """Compare tweets whose authors sit inside the mention network's
    largest weak component against tweets from all other authors."""
    net = build_network(ds.tweets, kind="mention")
    if not net.nodes:
        raise EvaluationError("mention network is empty; no components to split")
    core = largest_component_nodes(net)
    inside = [t for t in ds.tweets if t.author in core]
    outside = [t for t in ds.tweets if t.author not in core]
    if not inside:
        raise EvaluationError("no tweets authored inside the largest component")
    if not outside:
        raise EvaluationError("no outside group: every author sits in the largest component")
    return compare_categories(inside, outside, lexicon, alpha=alpha)


def detect_categories(
    ds: EventDataset,
    lexicon: Lexicon,
    categories: Sequence[str] = DEFAULT_CATEGORIES,
    betas: Sequence[float] = DEFAULT_BETAS,
) -> dict[str, tuple[int, ...]]:
    """Batch change points per category over the full event span."""
    series = category_series_matrix(bucketize(ds), lexicon, categories)
    return {
        name: tuple(s.t0 + cp for cp in detect(s.values, betas).changepoints)
        for name, s in series.items()
    }


def predictor_relevance(
    events: Sequence[tuple[Mapping[str, Sequence[int]], int]],
    categories: Sequence[str] | None = None,
    tolerance: int = 2,
) -> dict[str, int]:
    """Count, per category, the events where it put a change point
    within ``tolerance`` slices of the event's reference start.

    ``events`` pairs each event's per-category change points with its
    reference slice. Counts are monotonically non-decreasing in the
    tolerance.
    """
    if tolerance < 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance}")
    if categories is None:
        seen: list[str] = []
        for cps, _ in events:
            for name in cps:
                if name not in seen:
                    seen.append(name)
        categories = seen
    counts = dict.fromkeys(categories, 0)
    for cps_by_category, reference in events:
        for name in categories:
            cps = cps_by_category.get(name, ())
            if any(abs(cp - reference) <= tolerance for cp in cps):
                counts[name] += 1
    return counts


def offset_stats(events: Sequence[tuple[Sequence[int], int]]) -> OffsetStats:
    """Aggregate closest-change-point offsets over events, in hours.

    Each event contributes the signed offset (changepoint − reference)
    of its change point closest to the reference; the absolute
    distance decides, ties go to the earlier change point. Events with
    no change points are excluded and counted. The sd is the sample
    standard deviation; with a single offset it is reported as 0 and
    flagged.
    """
    offsets_slices: list[int] = []
    excluded = 0
    for changepoints, reference in events:
        if not changepoints:
            excluded += 1
            continue
        closest = min(changepoints, key=lambda cp: (abs(cp - reference), cp))
        offsets_slices.append(closest - reference)
    if not offsets_slices:
        raise EvaluationError("no change points in any event; offsets undefined")
    offsets_hours = tuple(o * 0.5 for o in offsets_slices)
    mean = float(np.mean(offsets_hours))
    single = len(offsets_hours) == 1
    sd = 0.0 if single else float(np.std(offsets_hours, ddof=1))
    return OffsetStats(
        offsets_hours=offsets_hours,
        mean_hours=mean,
        sd_hours=sd,
        n_events=len(offsets_hours),
        n_excluded=excluded,
        single=single,
    )

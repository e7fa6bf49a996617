"""Directed interaction networks over moving tweet windows.

Two network kinds are supported: the mention network (an edge from the
author to every user they @mention) and the retweet network (an edge
from the retweeting user to the retweeted user). Edges are unweighted
and deduplicated, self-loops are dropped and counted. Nodes are exactly
the endpoints of the surviving edges. Network metrics are evaluated per
half-hour slice over the moving 24 slice window ending at that slice.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from .changepoint import FeatureSeries
from .corpus import EventDataset, Tweet, WINDOW_SLICES, bucketize

__all__ = [
    "MentionNetwork",
    "NetworkMetrics",
    "METRIC_NAMES",
    "build_network",
    "largest_component_nodes",
    "compute_metrics",
    "metrics_over_windows",
    "metric_series",
]

_KINDS = ("mention", "retweet")


@dataclass(frozen=True)
class MentionNetwork:
    """Deduplicated directed graph built from a set of tweets."""

    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]
    kind: str = "mention"
    self_loops_dropped: int = 0


@dataclass(frozen=True)
class NetworkMetrics:
    n_nodes: int
    n_edges: int
    density: float
    avg_out_degree: float
    max_out_degree: int
    max_in_degree: int
    lcc_size: int
    lcc_fraction: float
    n_tweets: int
    n_mention_tweets: int
    mention_tweet_ratio: float
    mentions_per_tweet: float
    mentions_per_user: float
    tweets_per_user: float


METRIC_NAMES: tuple[str, ...] = tuple(f.name for f in fields(NetworkMetrics))


def _tweet_edges(tweet: Tweet, kind: str) -> tuple[list[tuple[str, str]], int]:
    """Directed edges contributed by one tweet and its self-loop count."""
    edges: list[tuple[str, str]] = []
    loops = 0
    if kind == "mention":
        for target in tweet.mentions:
            if target == tweet.author:
                loops += 1
            else:
                edges.append((tweet.author, target))
    else:
        if tweet.retweet_of is not None:
            if tweet.retweet_of.author == tweet.author:
                loops += 1
            else:
                edges.append((tweet.author, tweet.retweet_of.author))
    return edges, loops


def _is_mention_tweet(tweet: Tweet) -> bool:
    return any(target != tweet.author for target in tweet.mentions)


def build_network(tweets: Iterable[Tweet], kind: str = "mention") -> MentionNetwork:
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
    edges: set[tuple[str, str]] = set()
    loops = 0
    for tweet in tweets:
        new_edges, new_loops = _tweet_edges(tweet, kind)
        edges.update(new_edges)
        loops += new_loops
    nodes = frozenset(n for edge in edges for n in edge)
    return MentionNetwork(
        nodes=nodes, edges=frozenset(edges), kind=kind, self_loops_dropped=loops
    )


def _weak_components(
    nodes: frozenset[str], edges: Iterable[tuple[str, str]]
) -> list[set[str]]:
    """Weakly connected components (direction ignored), unordered."""
    adjacency: dict[str, list[str]] = {n: [] for n in nodes}
    for src, dst in edges:
        adjacency[src].append(dst)
        adjacency[dst].append(src)
    seen: set[str] = set()
    components: list[set[str]] = []
    for start in nodes:
        if start in seen:
            continue
        component = {start}
        seen.add(start)
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for neighbor in adjacency[node]:
                if neighbor not in seen:
                    seen.add(neighbor)
                    component.add(neighbor)
                    queue.append(neighbor)
        components.append(component)
    return components


def largest_component_nodes(net: MentionNetwork) -> frozenset[str]:
    """Node set of the largest weakly connected component.

    Equal-size ties resolve to the component containing the smallest
    node name, so the result does not depend on set iteration order.
    """
    components = _weak_components(net.nodes, net.edges)
    if not components:
        return frozenset()
    best_size = max(len(c) for c in components)
    tied = [c for c in components if len(c) == best_size]
    return frozenset(min(tied, key=min))


def _largest_weak_component(nodes: frozenset[str], edges: Iterable[tuple[str, str]]) -> int:
    """Size of the largest weakly connected component, 0 for an empty graph."""
    components = _weak_components(nodes, edges)
    return max((len(c) for c in components), default=0)


def _metrics_from_parts(
    edges: set[tuple[str, str]], n_tweets: int, n_mention_tweets: int
) -> NetworkMetrics:
    nodes = frozenset(n for edge in edges for n in edge)
    n_nodes, n_edges = len(nodes), len(edges)
    out_deg = Counter(src for src, _ in edges)
    in_deg = Counter(dst for _, dst in edges)
    lcc = _largest_weak_component(nodes, edges)
    # all ratio metrics are 0 when their denominator is 0
    return NetworkMetrics(
        n_nodes=n_nodes,
        n_edges=n_edges,
        density=n_edges / (n_nodes * (n_nodes - 1)) if n_nodes >= 2 else 0.0,
        avg_out_degree=n_edges / n_nodes if n_nodes else 0.0,
        max_out_degree=max(out_deg.values(), default=0),
        max_in_degree=max(in_deg.values(), default=0),
        lcc_size=lcc,
        lcc_fraction=lcc / n_nodes if n_nodes else 0.0,
        n_tweets=n_tweets,
        n_mention_tweets=n_mention_tweets,
        mention_tweet_ratio=n_mention_tweets / n_tweets if n_tweets else 0.0,
        mentions_per_tweet=n_edges / n_tweets if n_tweets else 0.0,
        mentions_per_user=n_edges / n_nodes if n_nodes else 0.0,
        tweets_per_user=n_tweets / n_nodes if n_nodes else 0.0,
    )


def compute_metrics(net: MentionNetwork, tweets: Sequence[Tweet]) -> NetworkMetrics:
    """Evaluate all metrics of a built network over its tweet set."""
    return _metrics_from_parts(
        set(net.edges),
        n_tweets=len(tweets),
        n_mention_tweets=sum(1 for t in tweets if _is_mention_tweet(t)),
    )


def metrics_over_windows(
    ds: EventDataset, kind: str = "mention", window_size: int = WINDOW_SLICES
) -> list[NetworkMetrics]:
    """Per-slice metrics over the moving window ending at each slice.

    Equivalent to building the window network at every slice, but edges
    are extracted from each tweet only once.
    """
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
    if window_size < 1:
        raise ValueError(f"window_size must be >= 1, got {window_size}")
    buckets = bucketize(ds)
    slice_edges: list[list[tuple[str, str]]] = []
    slice_tweets: list[int] = []
    slice_mention_tweets: list[int] = []
    for bucket in buckets:
        edges: list[tuple[str, str]] = []
        for tweet in bucket:
            edges.extend(_tweet_edges(tweet, kind)[0])
        slice_edges.append(edges)
        slice_tweets.append(len(bucket))
        slice_mention_tweets.append(sum(1 for t in bucket if _is_mention_tweet(t)))

    out: list[NetworkMetrics] = []
    for t in range(len(buckets)):
        lo = max(0, t - window_size + 1)
        edges: set[tuple[str, str]] = set()
        for s in range(lo, t + 1):
            edges.update(slice_edges[s])
        out.append(
            _metrics_from_parts(
                edges,
                n_tweets=sum(slice_tweets[lo: t + 1]),
                n_mention_tweets=sum(slice_mention_tweets[lo: t + 1]),
            )
        )
    return out


def metric_series(
    ds: EventDataset,
    metric: str,
    kind: str = "mention",
    window_size: int = WINDOW_SLICES,
) -> FeatureSeries:
    """One network metric as a per-slice series over the dataset span."""
    if metric not in METRIC_NAMES:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRIC_NAMES}")
    per_window = metrics_over_windows(ds, kind=kind, window_size=window_size)
    values = np.array([getattr(m, metric) for m in per_window], dtype=np.float64)
    return FeatureSeries(name=metric, values=values, t0=0)

"""Event datasets: ingestion of time-stamped messages and time slicing.

An event dataset holds every message recorded for one event label (a
hashtag like ``#boycott`` or a handle like ``@brand``) over a fixed
span, by default 15 days: the week of the event plus the week before.
Time is discretized into half-hour slices; a 15 day span yields 720
slices. Analysis windows cover 24 slices (12 hours) ending at the
current slice.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Iterable, NamedTuple

__all__ = [
    "IngestError",
    "RetweetRef",
    "Tweet",
    "EventDataset",
    "SLICE_SECONDS",
    "SLICES_PER_DAY",
    "WINDOW_SLICES",
    "normalize_label",
    "parse_timestamp",
    "ingest",
    "is_firestorm_tweet",
    "slice_of",
    "bucketize",
    "window",
    "write_dataset",
    "read_dataset",
]

SLICE_SECONDS = 1800
SLICES_PER_DAY = 48
WINDOW_SLICES = 24

_HASHTAG_RE = re.compile(r"#(\w+)")
_MENTION_RE = re.compile(r"@(\w+)")


class IngestError(ValueError):
    """Raised for unusable input records or datasets."""


class RetweetRef(NamedTuple):
    author: str
    tweet_id: str


@dataclass(frozen=True)
class Tweet:
    id: str
    author: str
    timestamp: datetime          # timezone-aware UTC, second precision
    text: str
    hashtags: tuple[str, ...]    # lowercase, without '#'
    mentions: tuple[str, ...]    # lowercase, without '@'
    retweet_of: RetweetRef | None = None


@dataclass(frozen=True)
class EventDataset:
    """All messages recorded for one event label, sorted by time."""

    label: str
    span_start: datetime
    span_days: int
    tweets: tuple[Tweet, ...]
    skipped: int = 0             # malformed records dropped during ingest
    out_of_span: int = 0         # valid records outside the time span

    @property
    def n_slices(self) -> int:
        return self.span_days * SLICES_PER_DAY

    @property
    def n_tweets(self) -> int:
        return len(self.tweets)

    @property
    def n_users(self) -> int:
        return len({t.author for t in self.tweets})

    @property
    def firestorm_fraction(self) -> float:
        if not self.tweets:
            return 0.0
        hits = sum(1 for t in self.tweets if is_firestorm_tweet(t, self.label))
        return hits / len(self.tweets)


def normalize_label(label: str) -> str:
    """Lowercase an event label; it must start with ``#`` or ``@``."""
    label = label.strip().lower()
    if len(label) < 2 or label[0] not in "#@":
        raise IngestError(f"event label must look like '#tag' or '@handle', got {label!r}")
    return label


def parse_timestamp(value) -> datetime:
    """Parse an ISO-8601 UTC timestamp or integer epoch seconds."""
    if isinstance(value, bool):
        raise IngestError(f"bad timestamp {value!r}")
    if isinstance(value, (int, float)):
        if isinstance(value, float) and not value.is_integer():
            raise IngestError(f"epoch timestamp must be whole seconds, got {value!r}")
        return datetime.fromtimestamp(int(value), tz=timezone.utc)
    if isinstance(value, str):
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        try:
            ts = datetime.fromisoformat(text)
        except ValueError:
            raise IngestError(f"bad timestamp {value!r}") from None
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        return ts.astimezone(timezone.utc).replace(microsecond=0)
    raise IngestError(f"bad timestamp {value!r}")


def _strip_prefix(token: str, prefix: str) -> str:
    token = token.strip().lower()
    return token[1:] if token.startswith(prefix) else token


def _parse_record(record: dict) -> Tweet:
    for key in ("id", "user", "ts", "text"):
        if key not in record:
            raise IngestError(f"missing field {key!r}")
    if not isinstance(record["text"], str):
        raise IngestError("field 'text' must be a string")
    tweet_id = str(record["id"])
    author = str(record["user"]).strip().lower()
    if not tweet_id or not author:
        raise IngestError("empty 'id' or 'user'")
    ts = parse_timestamp(record["ts"])
    text = record["text"]

    if "hashtags" in record:
        raw_tags = record["hashtags"]
        if not isinstance(raw_tags, list):
            raise IngestError("field 'hashtags' must be a list")
        hashtags = tuple(_strip_prefix(str(t), "#") for t in raw_tags)
    else:
        hashtags = tuple(m.group(1).lower() for m in _HASHTAG_RE.finditer(text))
    if "mentions" in record:
        raw_mentions = record["mentions"]
        if not isinstance(raw_mentions, list):
            raise IngestError("field 'mentions' must be a list")
        mentions = tuple(_strip_prefix(str(m), "@") for m in raw_mentions)
    else:
        mentions = tuple(m.group(1).lower() for m in _MENTION_RE.finditer(text))

    retweet_of = None
    has_rt_user, has_rt_id = "rt_user" in record, "rt_id" in record
    if has_rt_user != has_rt_id:
        raise IngestError("fields 'rt_user' and 'rt_id' must appear together")
    if has_rt_user:
        rt_author = str(record["rt_user"]).strip().lower()
        rt_id = str(record["rt_id"])
        if not rt_author or not rt_id:
            raise IngestError("empty 'rt_user' or 'rt_id'")
        retweet_of = RetweetRef(rt_author, rt_id)

    return Tweet(
        id=tweet_id,
        author=author,
        timestamp=ts,
        text=text,
        hashtags=hashtags,
        mentions=mentions,
        retweet_of=retweet_of,
    )


def ingest(
    lines: Iterable[str],
    label: str,
    span_start: datetime,
    span_days: int = 15,
    strict: bool = False,
) -> EventDataset:
    """Read JSONL records into an :class:`EventDataset`.

    Each line is a JSON object with required fields ``id``, ``user``,
    ``ts`` (ISO-8601 UTC or epoch seconds) and ``text``, plus optional
    ``hashtags``, ``mentions`` and ``rt_user``/``rt_id``. Absent entity
    fields are recovered from the text. Malformed lines raise in strict
    mode and are counted and skipped otherwise. Records outside
    ``[span_start, span_start + span_days)`` are counted separately.
    A dataset with zero usable records is an error in either mode.
    """
    label = normalize_label(label)
    if span_days < 1:
        raise IngestError(f"span_days must be >= 1, got {span_days}")
    if span_start.tzinfo is None:
        span_start = span_start.replace(tzinfo=timezone.utc)
    span_start = span_start.astimezone(timezone.utc)
    span_end = span_start + timedelta(days=span_days)

    tweets: list[Tweet] = []
    skipped = 0
    out_of_span = 0
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            if not isinstance(record, dict):
                raise IngestError("record is not a JSON object")
            if "_meta" in record:
                continue
            tweet = _parse_record(record)
        except (json.JSONDecodeError, IngestError) as exc:
            if strict:
                raise IngestError(f"line {lineno}: {exc}") from None
            skipped += 1
            continue
        if not span_start <= tweet.timestamp < span_end:
            out_of_span += 1
            continue
        tweets.append(tweet)

    if not tweets:
        raise IngestError(f"no usable records for {label} within the span")
    tweets.sort(key=lambda t: t.timestamp)  # stable: input order breaks ties
    return EventDataset(
        label=label,
        span_start=span_start,
        span_days=span_days,
        tweets=tuple(tweets),
        skipped=skipped,
        out_of_span=out_of_span,
    )


def is_firestorm_tweet(tweet: Tweet, label: str) -> bool:
    """True when the tweet carries the event label (hashtag or mention)."""
    label = normalize_label(label)
    body = label[1:]
    if label[0] == "#":
        return body in tweet.hashtags
    return body in tweet.mentions


def slice_of(ds: EventDataset, ts: datetime) -> int:
    """Half-hour slice index of a timestamp within the dataset span."""
    offset = (ts - ds.span_start).total_seconds()
    index = int(offset // SLICE_SECONDS)
    if not 0 <= index < ds.n_slices:
        raise ValueError(f"timestamp {ts.isoformat()} is outside the dataset span")
    return index


def bucketize(ds: EventDataset) -> list[list[Tweet]]:
    """Group tweets into half-hour buckets, one list per slice.

    Buckets are half-open: a tweet at exactly a slice boundary belongs
    to the later slice. The returned list always has ``ds.n_slices``
    entries and every tweet lands in exactly one bucket.
    """
    buckets: list[list[Tweet]] = [[] for _ in range(ds.n_slices)]
    for tweet in ds.tweets:
        buckets[slice_of(ds, tweet.timestamp)].append(tweet)
    return buckets


def write_dataset(ds: EventDataset, path) -> None:
    """Write a dataset as canonical JSONL: one meta line, then records.

    The output is byte-stable: keys are sorted, timestamps are epoch
    seconds, records appear in dataset order.
    """
    with open(path, "w", encoding="utf-8") as fh:
        meta = {
            "_meta": {
                "label": ds.label,
                "span_start": int(ds.span_start.timestamp()),
                "span_days": ds.span_days,
            }
        }
        fh.write(json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n")
        for tweet in ds.tweets:
            record = {
                "id": tweet.id,
                "user": tweet.author,
                "ts": int(tweet.timestamp.timestamp()),
                "text": tweet.text,
                "hashtags": list(tweet.hashtags),
                "mentions": list(tweet.mentions),
            }
            if tweet.retweet_of is not None:
                record["rt_user"] = tweet.retweet_of.author
                record["rt_id"] = tweet.retweet_of.tweet_id
            fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")


def read_dataset(
    path,
    label: str | None = None,
    span_start: datetime | None = None,
    span_days: int | None = None,
    strict: bool = False,
) -> EventDataset:
    """Read a JSONL dataset, taking label/span from a ``_meta`` line.

    Explicit arguments override the file's meta line; a file without one
    requires all three.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            break
        if isinstance(record, dict) and "_meta" in record:
            meta = record["_meta"]
            if label is None:
                label = meta.get("label")
            if span_start is None and "span_start" in meta:
                span_start = parse_timestamp(meta["span_start"])
            if span_days is None and "span_days" in meta:
                span_days = int(meta["span_days"])
        break  # meta only counts on the first non-empty line
    if label is None or span_start is None or span_days is None:
        raise IngestError(
            f"{path}: no _meta line; pass label, span_start and span_days explicitly"
        )
    return ingest(lines, label, span_start, span_days, strict=strict)


def window(buckets: list[list[Tweet]], t: int, size: int = WINDOW_SLICES) -> list[Tweet]:
    """Tweets of the moving window of ``size`` slices ending at slice ``t``.

    Near the start of the span the window is truncated to the available
    slices, so ``window(buckets, 0)`` covers slice 0 alone.
    """
    if not 0 <= t < len(buckets):
        raise ValueError(f"slice {t} is outside 0..{len(buckets) - 1}")
    if size < 1:
        raise ValueError(f"window size must be >= 1, got {size}")
    out: list[Tweet] = []
    for bucket in buckets[max(0, t - size + 1): t + 1]:
        out.extend(bucket)
    return out

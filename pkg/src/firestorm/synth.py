"""Seeded synthetic event streams with known ground truth.

Background traffic follows a Poisson process whose rate oscillates with
a 48-slice (daily) sinusoid. Texts are sampled token by token: each
token comes from one lexicon category's word pool or from a neutral
pool, with separate probability vectors for background and firestorm
tweets. The firestorm injects extra tweets over a short burst interval
(linear ramp, then plateau), every one carrying the target hashtag or
mention, with mentions concentrated on one focus node so the windowed
max in-degree spikes. The same config always yields the byte-identical
dataset.

The firestorm fraction (share of tweets carrying the target) is the
primary size control; the magnitude multiplier bounds how far above the
background rate the burst peak may sit and doubles as the null switch:
magnitude 1 generates no burst at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Mapping

import numpy as np

from ._validation import check_positive, check_probability
from .corpus import EventDataset, Tweet, normalize_label
from .lexicon import Lexicon, load_demo_lexicon

__all__ = [
    "SynthError",
    "CategoryShift",
    "FirestormShape",
    "SynthConfig",
    "GroundTruth",
    "default_shifts",
    "generate",
    "generate_suite",
]

_NEUTRAL_WORDS = (
    "the a an and to of in on at for with this that is are was be been have "
    "has had from by about into over after before between out up down off "
    "then than so just now here there when where what who which time day "
    "week year people thing things way back still even much many most some "
    "any all each every other another new old first last long little big "
    "high small"
).split()

_BACKGROUND_TAGS = tuple(f"news{i}" for i in range(20))


class SynthError(ValueError):
    """Raised for invalid or infeasible generator configurations."""


@dataclass(frozen=True)
class CategoryShift:
    """Per-token probability of one category, outside and inside the burst."""

    baseline: float
    firestorm: float


def default_shifts() -> dict[str, CategoryShift]:
    """Default token distribution: the burst drops self-reference and
    positivity and raises negativity, assent and netspeak; the remaining
    categories stay put as controls."""
    return {
        "I": CategoryShift(0.12, 0.04),
        "posemo": CategoryShift(0.10, 0.03),
        "negemo": CategoryShift(0.02, 0.09),
        "assent": CategoryShift(0.025, 0.09),
        "netspeak": CategoryShift(0.035, 0.13),
        "we": CategoryShift(0.02, 0.02),
        "you": CategoryShift(0.03, 0.03),
        "negate": CategoryShift(0.03, 0.03),
        "swear": CategoryShift(0.01, 0.01),
        "cogproc": CategoryShift(0.05, 0.05),
        "percept": CategoryShift(0.03, 0.03),
        "filler": CategoryShift(0.008, 0.008),
    }


@dataclass(frozen=True)
class FirestormShape:
    """Burst placement and intensity.

    The burst occupies ``[start_slice, start_slice + duration_slices)``;
    the first ``ramp_slices`` of it ramp linearly up to full intensity.
    ``magnitude`` caps the burst peak at ``(magnitude - 1) * base_rate``
    extra tweets per slice; magnitude 1 disables the burst entirely.
    """

    start_slice: int = 480
    ramp_slices: int = 3
    duration_slices: int = 9
    magnitude: float = 6.0
    target: str = "#storm"
    fraction: float = 0.05
    mention_focus: float = 0.75


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 1
    span_days: int = 15
    span_start: datetime = datetime(2014, 3, 1, tzinfo=timezone.utc)
    n_users: int = 2000
    base_rate: float = 14.0
    diurnal_amplitude: float = 0.55
    mention_rate: float = 0.35
    hashtag_rate: float = 0.05
    tokens_per_tweet: float = 9.0
    lexical_shift: Mapping[str, CategoryShift] = field(default_factory=default_shifts)
    firestorm: FirestormShape = field(default_factory=FirestormShape)


@dataclass(frozen=True)
class GroundTruth:
    """What was injected; ``start_slice`` is None for null streams."""

    label: str
    start_slice: int | None
    burst_interval: tuple[int, int] | None
    directions: Mapping[str, str]      # category -> "more" | "less"
    target_node: str | None            # focus of the mention concentration
    n_firestorm: int
    n_background: int
    fraction: float
    seed: int


def _validate(config: SynthConfig) -> None:
    if config.span_days < 1:
        raise SynthError(f"span_days must be >= 1, got {config.span_days}")
    if config.n_users < 2:
        raise SynthError(f"n_users must be >= 2, got {config.n_users}")
    check_positive(config.base_rate, "base_rate")
    if not 0.0 <= config.diurnal_amplitude < 1.0:
        raise SynthError(
            f"diurnal_amplitude must be in [0, 1), got {config.diurnal_amplitude}"
        )
    check_probability(config.mention_rate, "mention_rate")
    check_probability(config.hashtag_rate, "hashtag_rate")
    if config.tokens_per_tweet < 1:
        raise SynthError(f"tokens_per_tweet must be >= 1, got {config.tokens_per_tweet}")

    base_sum = fire_sum = 0.0
    for name, shift in config.lexical_shift.items():
        check_probability(shift.baseline, f"lexical_shift[{name}].baseline")
        check_probability(shift.firestorm, f"lexical_shift[{name}].firestorm")
        base_sum += shift.baseline
        fire_sum += shift.firestorm
    if base_sum > 0.95 or fire_sum > 0.95:
        raise SynthError(
            "lexical_shift probabilities must leave at least 5% neutral mass "
            f"(baseline sum {base_sum:.3f}, firestorm sum {fire_sum:.3f})"
        )

    fs = config.firestorm
    normalize_label(fs.target)
    if fs.magnitude < 1.0:
        raise SynthError(f"magnitude must be >= 1, got {fs.magnitude}")
    check_probability(fs.mention_focus, "mention_focus")
    if fs.magnitude > 1.0:
        n_slices = config.span_days * 48
        if not 0.02 <= fs.fraction <= 0.08:
            raise SynthError(
                f"firestorm fraction must be in [0.02, 0.08], got {fs.fraction}"
            )
        if fs.duration_slices < 1:
            raise SynthError(f"duration_slices must be >= 1, got {fs.duration_slices}")
        if not 0 <= fs.ramp_slices <= fs.duration_slices:
            raise SynthError(
                f"ramp_slices must be in 0..duration_slices, got {fs.ramp_slices}"
            )
        if fs.start_slice < 48 + fs.ramp_slices:
            raise SynthError(
                f"start_slice must be >= {48 + fs.ramp_slices} "
                "(a full window of history plus the ramp)"
            )
        if fs.start_slice + fs.duration_slices > n_slices:
            raise SynthError("burst interval extends past the end of the span")


def _burst_weights(fs: FirestormShape) -> np.ndarray:
    weights = np.ones(fs.duration_slices)
    for k in range(fs.ramp_slices):
        weights[k] = (k + 1) / fs.ramp_slices
    return weights


def _single_category_words(lexicon: Lexicon, category: str) -> list[str]:
    """Exact-match words belonging to this category and no other leaf."""
    leaves = {c.name for c in lexicon.categories} - {
        c.parent for c in lexicon.categories if c.parent
    }
    index = lexicon._index
    names = lexicon.names
    cat = next((c for c in lexicon.categories if c.name == category), None)
    if cat is None:
        raise SynthError(f"lexical_shift names unknown category {category!r}")
    words = []
    for entry in cat.entries:
        if entry.prefix:
            continue
        hits = {names[ci] for ci, _ in index.match_token(entry.pattern)}
        if hits & leaves == {category}:
            words.append(entry.pattern)
    return sorted(set(words))


def _neutral_pool(lexicon: Lexicon) -> list[str]:
    index = lexicon._index
    return [w for w in _NEUTRAL_WORDS if not list(index.match_token(w))]


def _sample_texts(
    rng: np.random.Generator,
    n_tweets: int,
    probs: np.ndarray,
    pools: list[np.ndarray],
    tokens_per_tweet: float,
) -> list[str]:
    """Sample each tweet's tokens: a pool per token, a word per pool."""
    if n_tweets == 0:
        return []
    counts = 1 + rng.poisson(tokens_per_tweet - 1.0, size=n_tweets)
    total = int(counts.sum())
    pool_ids = rng.choice(len(pools), size=total, p=probs)
    raw = rng.integers(0, 2**32, size=total)
    pool_sizes = np.array([len(p) for p in pools])
    offsets = np.concatenate(([0], np.cumsum(pool_sizes)))[:-1]
    flat = np.concatenate(pools)
    tokens = flat[offsets[pool_ids] + raw % pool_sizes[pool_ids]]
    bounds = np.concatenate(([0], np.cumsum(counts)))
    return [" ".join(tokens[bounds[i]: bounds[i + 1]]) for i in range(n_tweets)]


def generate(
    config: SynthConfig, lexicon: Lexicon | None = None
) -> tuple[EventDataset, GroundTruth]:
    """Generate one synthetic event dataset plus its ground truth."""
    _validate(config)
    lexicon = lexicon if lexicon is not None else load_demo_lexicon()
    rng = np.random.default_rng(config.seed)
    fs = config.firestorm
    label = normalize_label(fs.target)
    n_slices = config.span_days * 48

    shift_names = sorted(config.lexical_shift)
    pools = []
    for name in shift_names:
        words = _single_category_words(lexicon, name)
        if len(words) < 3:
            raise SynthError(
                f"category {name!r} has only {len(words)} unambiguous words to sample from"
            )
        pools.append(np.array(words, dtype=object))
    pools.append(np.array(_neutral_pool(lexicon), dtype=object))

    base_probs = np.array(
        [config.lexical_shift[n].baseline for n in shift_names] + [0.0]
    )
    fire_probs = np.array(
        [config.lexical_shift[n].firestorm for n in shift_names] + [0.0]
    )
    base_probs[-1] = 1.0 - base_probs.sum()
    fire_probs[-1] = 1.0 - fire_probs.sum()

    slices = np.arange(n_slices)
    lam = config.base_rate * (
        1.0 + config.diurnal_amplitude * np.sin(2.0 * np.pi * slices / 48.0)
    )
    bg_counts = rng.poisson(lam)

    burst = fs.magnitude > 1.0
    fire_counts = np.zeros(n_slices, dtype=np.int64)
    if burst:
        weights = _burst_weights(fs)
        n_fire_target = fs.fraction / (1.0 - fs.fraction) * lam.sum()
        per_slice = n_fire_target * weights / weights.sum()
        peak_allowed = (fs.magnitude - 1.0) * config.base_rate
        if per_slice.max() > peak_allowed:
            raise SynthError(
                f"infeasible: the fraction target needs a burst peak of "
                f"{per_slice.max():.1f} tweets/slice but magnitude {fs.magnitude} "
                f"allows only {peak_allowed:.1f}"
            )
        fire_counts[fs.start_slice: fs.start_slice + fs.duration_slices] = rng.poisson(
            per_slice
        )

    # background tweets
    bg_slice = np.repeat(slices, bg_counts)
    n_bg = len(bg_slice)
    bg_offset = rng.integers(0, 1800, size=n_bg)
    bg_author = rng.integers(0, config.n_users, size=n_bg)
    bg_has_mention = rng.random(n_bg) < config.mention_rate
    bg_mention = rng.integers(0, config.n_users, size=n_bg)
    bg_has_tag = rng.random(n_bg) < config.hashtag_rate
    bg_tag = rng.integers(0, len(_BACKGROUND_TAGS), size=n_bg)
    bg_texts = _sample_texts(rng, n_bg, base_probs, pools, config.tokens_per_tweet)

    # firestorm tweets; every one carries the event label
    fire_slice = np.repeat(slices, fire_counts)
    n_fire = len(fire_slice)
    fire_offset = rng.integers(0, 1800, size=n_fire)
    fire_author = rng.integers(0, config.n_users, size=n_fire)
    fire_has_focus = rng.random(n_fire) < fs.mention_focus
    fire_texts = _sample_texts(rng, n_fire, fire_probs, pools, config.tokens_per_tweet)

    target_node = None
    if burst:
        target_node = label[1:] if label[0] == "@" else "brand"

    raw: list[tuple[int, int, int, Tweet]] = []
    span_start_ts = int(config.span_start.timestamp())
    for i in range(n_bg):
        mentions = ()
        text = bg_texts[i]
        if bg_has_mention[i]:
            mention = f"u{bg_mention[i]}"
            mentions = (mention,)
            text = f"@{mention} {text}"
        hashtags = ()
        if bg_has_tag[i]:
            tag = _BACKGROUND_TAGS[bg_tag[i]]
            hashtags = (tag,)
            text = f"{text} #{tag}"
        ts = span_start_ts + int(bg_slice[i]) * 1800 + int(bg_offset[i])
        raw.append((int(bg_slice[i]), int(bg_offset[i]), i, Tweet(
            id="", author=f"u{bg_author[i]}",
            timestamp=datetime.fromtimestamp(ts, tz=timezone.utc),
            text=text, hashtags=hashtags, mentions=mentions,
        )))
    for i in range(n_fire):
        mentions = ()
        hashtags = ()
        text = fire_texts[i]
        if label[0] == "@":
            mentions = (target_node,)
            text = f"@{target_node} {text}"
        else:
            hashtags = (label[1:],)
            text = f"{text} #{label[1:]}"
            if fire_has_focus[i]:
                mentions = (target_node,)
                text = f"@{target_node} {text}"
        ts = span_start_ts + int(fire_slice[i]) * 1800 + int(fire_offset[i])
        raw.append((int(fire_slice[i]), int(fire_offset[i]), n_bg + i, Tweet(
            id="", author=f"u{fire_author[i]}",
            timestamp=datetime.fromtimestamp(ts, tz=timezone.utc),
            text=text, hashtags=hashtags, mentions=mentions,
        )))

    raw.sort(key=lambda item: item[:3])
    tweets = tuple(
        replace(tweet, id=str(i + 1)) for i, (_, _, _, tweet) in enumerate(raw)
    )
    ds = EventDataset(
        label=label,
        span_start=config.span_start,
        span_days=config.span_days,
        tweets=tweets,
    )

    directions: dict[str, str] = {}
    if burst:
        for name in shift_names:
            shift = config.lexical_shift[name]
            if shift.firestorm != shift.baseline:
                directions[name] = "more" if shift.firestorm > shift.baseline else "less"
        lower = {n.lower() for n in shift_names}
        if "posemo" in lower and "negemo" in lower:
            pos, neg = config.lexical_shift["posemo"], config.lexical_shift["negemo"]
            emo_delta = (pos.firestorm - neg.firestorm) - (pos.baseline - neg.baseline)
            if emo_delta != 0.0:
                directions["emo"] = "more" if emo_delta > 0 else "less"

    truth = GroundTruth(
        label=label,
        start_slice=fs.start_slice if burst else None,
        burst_interval=(fs.start_slice, fs.start_slice + fs.duration_slices) if burst else None,
        directions=directions,
        target_node=target_node,
        n_firestorm=n_fire,
        n_background=n_bg,
        fraction=n_fire / (n_fire + n_bg) if (n_fire + n_bg) else 0.0,
        seed=config.seed,
    )
    return ds, truth


def generate_suite(
    n_events: int,
    base: SynthConfig | None = None,
    seed: int = 0,
    volume_range: tuple[float, float] = (0.4, 2.5),
    fraction_range: tuple[float, float] = (0.03, 0.07),
    duration_range: tuple[int, int] = (8, 12),
    start_range: tuple[int, int] = (380, 620),
    magnitude_headroom: tuple[float, float] = (1.15, 1.5),
) -> list[tuple[EventDataset, GroundTruth]]:
    """Generate ``n_events`` independent events with jittered parameters.

    Start slices are sampled without replacement (all distinct), volumes
    span ``volume_range`` times the base rate, and each event's
    magnitude is drawn with headroom above the minimum the fraction
    target requires, so every member is feasible by construction.
    """
    if n_events < 1:
        raise SynthError(f"n_events must be >= 1, got {n_events}")
    base = base if base is not None else SynthConfig()
    master = np.random.default_rng(seed)
    child_seeds = np.random.SeedSequence(seed).generate_state(n_events)

    n_starts = start_range[1] - start_range[0]
    if n_starts < n_events:
        raise SynthError(
            f"start_range {start_range} cannot place {n_events} distinct starts"
        )
    starts = master.choice(np.arange(*start_range), size=n_events, replace=False)
    log_lo, log_hi = np.log(volume_range[0]), np.log(volume_range[1])
    scales = np.exp(master.uniform(log_lo, log_hi, size=n_events))
    fractions = master.uniform(*fraction_range, size=n_events)
    durations = master.integers(duration_range[0], duration_range[1] + 1, size=n_events)
    headrooms = master.uniform(*magnitude_headroom, size=n_events)

    label_base = normalize_label(base.firestorm.target)
    out = []
    for i in range(n_events):
        duration = int(durations[i])
        weights = _burst_weights(replace(base.firestorm, duration_slices=duration))
        # minimum magnitude at which the fraction target stays feasible
        frac = float(fractions[i])
        need = frac / (1.0 - frac) * 48 * base.span_days / weights.sum()
        config = replace(
            base,
            seed=int(child_seeds[i]),
            base_rate=base.base_rate * float(scales[i]),
            firestorm=replace(
                base.firestorm,
                start_slice=int(starts[i]),
                duration_slices=duration,
                fraction=frac,
                magnitude=1.0 + need * float(headrooms[i]),
                target=f"{label_base}{i:02d}",
            ),
        )
        out.append(generate(config))
    return out

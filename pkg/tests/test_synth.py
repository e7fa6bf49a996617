"""Seeded synthetic event generation and its ground truth."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from firestorm import (
    FirestormShape,
    SynthConfig,
    SynthError,
    bucketize,
    default_shifts,
    generate,
    generate_suite,
    is_firestorm_tweet,
    metric_series,
    write_dataset,
)


def with_shape(cfg: SynthConfig, **kwargs) -> SynthConfig:
    return dataclasses.replace(cfg, firestorm=dataclasses.replace(cfg.firestorm, **kwargs))


def test_generation_is_deterministic(tmp_path):
    a_ds, a_truth = generate(SynthConfig(seed=5))
    b_ds, b_truth = generate(SynthConfig(seed=5))
    assert a_truth == b_truth
    assert a_ds.tweets == b_ds.tweets
    pa, pb = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_dataset(a_ds, pa)
    write_dataset(b_ds, pb)
    assert pa.read_bytes() == pb.read_bytes()


def test_different_seeds_differ():
    a, _ = generate(SynthConfig(seed=5))
    b, _ = generate(SynthConfig(seed=6))
    assert a.tweets != b.tweets


def test_fraction_within_observed_regime(event42):
    ds, truth = event42
    measured = sum(is_firestorm_tweet(t, ds.label) for t in ds.tweets) / len(ds.tweets)
    assert 0.02 <= measured <= 0.08
    assert measured == pytest.approx(truth.fraction)
    assert truth.n_firestorm + truth.n_background == len(ds.tweets)


def test_truth_interval_consistent(event42):
    ds, truth = event42
    lo, hi = truth.burst_interval
    assert lo == truth.start_slice
    assert hi - lo == 9   # default burst duration
    buckets = bucketize(ds)
    fire_slices = {
        t for t, bucket in enumerate(buckets)
        if any(is_firestorm_tweet(tw, ds.label) for tw in bucket)
    }
    assert fire_slices <= set(range(lo, hi))
    assert lo in fire_slices


def test_max_indegree_peaks_inside_burst(event42):
    ds, truth = event42
    series = metric_series(ds, "max_in_degree")
    peak = int(np.argmax(series.values))
    lo, hi = truth.burst_interval
    assert lo <= peak < hi


def test_lexical_shifts_hold_in_sample(event42, lexicon):
    from firestorm.lexicon import score_tweet

    ds, truth = event42
    fire, nonfire = [], []
    for tweet in ds.tweets:
        (fire if is_firestorm_tweet(tweet, ds.label) else nonfire).append(tweet)
    for category, direction in truth.directions.items():
        mean_fire = np.mean([score_tweet(t.text, lexicon)[category] for t in fire])
        mean_non = np.mean([score_tweet(t.text, lexicon)[category] for t in nonfire])
        if direction == "less":
            assert mean_fire < mean_non, category
        else:
            assert mean_fire > mean_non, category


def test_null_magnitude_means_no_burst(null_event):
    ds, truth = null_event
    assert truth.start_slice is None
    assert truth.burst_interval is None
    assert truth.n_firestorm == 0
    assert not any(is_firestorm_tweet(t, ds.label) for t in ds.tweets)


def test_null_stream_has_no_modal_target(null_event):
    from firestorm import EvaluationError, start_time

    ds, _ = null_event
    with pytest.raises(EvaluationError):
        start_time(ds)


def test_default_shift_directions():
    shifts = default_shifts()
    assert shifts["I"].baseline > shifts["I"].firestorm
    assert shifts["posemo"].baseline > shifts["posemo"].firestorm
    for name in ("negemo", "assent", "netspeak"):
        assert shifts[name].baseline < shifts[name].firestorm
    for name in ("we", "you", "negate", "swear", "cogproc", "percept", "filler"):
        assert shifts[name].baseline == shifts[name].firestorm


def test_infeasible_fraction_magnitude():
    cfg = with_shape(SynthConfig(seed=1), magnitude=1.01, fraction=0.05)
    with pytest.raises(SynthError, match="infeasible"):
        generate(cfg)


def test_validation_errors():
    with pytest.raises(SynthError, match="fraction"):
        generate(with_shape(SynthConfig(seed=1), fraction=0.5))
    with pytest.raises(SynthError, match="magnitude"):
        generate(with_shape(SynthConfig(seed=1), magnitude=0.5))
    with pytest.raises(SynthError, match="start_slice"):
        generate(with_shape(SynthConfig(seed=1), start_slice=10))
    with pytest.raises(SynthError, match="past the end"):
        generate(with_shape(SynthConfig(seed=1), start_slice=715))
    with pytest.raises(SynthError, match="span_days"):
        generate(dataclasses.replace(SynthConfig(seed=1), span_days=0))


def test_suite_members_are_distinct(small_suite):
    truths = [truth for _, truth in small_suite]
    assert len({t.label for t in truths}) == len(truths)
    assert len({t.start_slice for t in truths}) == len(truths)
    assert len({t.seed for t in truths}) == len(truths)


def test_suite_fractions_and_starts_in_band(small_suite):
    for ds, truth in small_suite:
        measured = sum(is_firestorm_tweet(t, ds.label) for t in ds.tweets) / len(ds.tweets)
        assert 0.02 <= measured <= 0.08
        assert 380 <= truth.start_slice < 620


def test_suite_volume_jitter_bounds(small_suite):
    base_expect = 14.0 * 720   # base_rate x slices
    for _, truth in small_suite:
        ratio = truth.n_background / base_expect
        assert 0.3 <= ratio <= 2.8   # volume_range (0.4, 2.5) plus noise


def test_suite_deterministic(small_suite):
    again = generate_suite(4, seed=11)
    for (ds_a, tr_a), (ds_b, tr_b) in zip(small_suite, again):
        assert tr_a == tr_b
        assert ds_a.tweets == ds_b.tweets


def test_suite_needs_positive_count():
    with pytest.raises(SynthError):
        generate_suite(0)

"""Exact segmentation: cost queries, DP oracles, pruning and the elbow."""

from __future__ import annotations

import itertools
import time

import numpy as np
import pytest
from sklearn.base import clone

from firestorm import (
    DEFAULT_BETAS,
    FeatureSeries,
    PeltSegmenter,
    SegmentCostSSE,
    detect,
    elbow_penalty,
    elbow_select,
    opt_partition,
    pelt,
    segment_cost,
    standardize,
)
from firestorm._dp import optpart_core


def test_segment_cost_constant():
    assert segment_cost([5.0, 5.0, 5.0], 0, 2) == 0.0


def test_segment_cost_two_points():
    assert segment_cost([0.0, 10.0], 0, 1) == pytest.approx(50.0)


def test_segment_cost_single_element():
    assert segment_cost([7.0], 0, 0) == 0.0


def test_segment_cost_matches_direct_formula():
    rng = np.random.default_rng(0)
    values = rng.normal(size=80)
    costs = SegmentCostSSE(values)
    for _ in range(200):
        a = int(rng.integers(0, 80))
        b = int(rng.integers(a, 80))
        seg = values[a : b + 1]
        assert costs.cost(a, b) == pytest.approx(np.sum((seg - seg.mean()) ** 2), abs=1e-9)


def test_segment_cost_rejects_bad_range():
    costs = SegmentCostSSE([1.0, 2.0])
    with pytest.raises(ValueError):
        costs.cost(1, 0)
    with pytest.raises(ValueError):
        costs.cost(0, 2)


def _enumerate_best(values: np.ndarray, beta: float):
    """Brute force over all 2^(n-1) segmentations."""
    n = len(values)
    best_cost, best_cps = np.inf, ()
    for r in range(n):
        for cps in itertools.combinations(range(n - 1), r):
            bounds = [-1, *cps, n - 1]
            cost = beta * r
            for lo, hi in zip(bounds, bounds[1:]):
                seg = values[lo + 1 : hi + 1]
                cost += np.sum((seg - seg.mean()) ** 2)
            if cost < best_cost:
                best_cost, best_cps = cost, cps
    return best_cost, best_cps


def test_opt_partition_matches_exhaustive_enumeration():
    rng = np.random.default_rng(1)
    for trial in range(30):
        n = int(rng.integers(2, 13))
        values = rng.normal(size=n)
        if trial % 2:
            values[n // 2 :] += 3.0
        beta = float(rng.uniform(0.2, 4.0))
        want_cost, _ = _enumerate_best(values, beta)
        got = opt_partition(values, beta)
        assert got.total_cost == pytest.approx(want_cost, rel=1e-9, abs=1e-9)
        # reported segmentation must price out to the reported cost
        rebuilt = beta * len(got.changepoints)
        bounds = [-1, *got.changepoints, n - 1]
        for lo, hi in zip(bounds, bounds[1:]):
            rebuilt += segment_cost(values, lo + 1, hi)
        assert rebuilt == pytest.approx(got.total_cost, rel=1e-9, abs=1e-9)


def test_constant_series_has_no_changepoints():
    for beta in (0.1, 1.0, 10.0):
        assert opt_partition(np.full(20, 3.3), beta).changepoints == ()
        assert pelt(np.full(20, 3.3), beta).changepoints == ()


def test_step_series_splits_at_step():
    values = standardize(np.array([0.0] * 10 + [10.0] * 10))
    for solve in (opt_partition, pelt):
        result = solve(values, 1.0)
        assert result.changepoints == (9,)


def test_alternating_series_with_huge_penalty():
    values = np.array([1.0, -1.0] * 10)
    assert pelt(values, 1e6).changepoints == ()


def test_length_one_series():
    result = pelt(np.array([4.2]), 3.0)
    assert result.changepoints == ()
    assert result.total_cost == pytest.approx(0.0)


def test_empty_series_rejected():
    with pytest.raises(ValueError):
        pelt(np.array([]), 1.0)
    with pytest.raises(ValueError):
        opt_partition(np.array([]), 1.0)


def test_non_positive_penalty_rejected():
    for beta in (0.0, -1.0):
        with pytest.raises(ValueError):
            pelt(np.array([1.0, 2.0]), beta)


def test_non_finite_series_rejected():
    with pytest.raises(ValueError):
        pelt(np.array([1.0, np.nan]), 1.0)


def _random_series(rng):
    n = int(rng.integers(10, 61))
    kind = rng.integers(3)
    if kind == 0:
        return rng.normal(size=n)
    if kind == 1:
        values = rng.normal(scale=0.5, size=n)
        for start in range(0, n, max(4, n // 4)):
            values[start:] += rng.normal(scale=3.0)
        return values
    return np.cumsum(rng.normal(size=n))


def test_pelt_equals_opt_partition_on_random_series():
    rng = np.random.default_rng(2)
    for _ in range(60):
        values = _random_series(rng)
        beta = float(rng.uniform(0.3, 8.0))
        a = pelt(values, beta)
        b = opt_partition(values, beta)
        assert a.total_cost == pytest.approx(b.total_cost, rel=1e-9)
        assert a.changepoints == b.changepoints


def test_pelt_equals_oracle_on_random_walk_with_elbow_penalty():
    rng = np.random.default_rng(6)
    values = standardize(np.cumsum(rng.normal(size=49)))
    beta = elbow_penalty(values).penalty
    a = pelt(values, beta)
    b = opt_partition(values, beta)
    assert a.total_cost == pytest.approx(b.total_cost, rel=1e-9)


def test_pruned_candidates_never_optimal_later():
    rng = np.random.default_rng(7)
    for _ in range(25):
        values = _random_series(rng)
        beta = float(rng.uniform(0.5, 5.0))
        _, mask = pelt(values, beta, record_candidates=True)
        _, _, prev = optpart_core(np.ascontiguousarray(values, dtype=float), beta)
        for t in range(1, len(values) + 1):
            assert mask[t, prev[t]], f"unpruned optimum {prev[t]} missing at step {t}"


def test_changepoint_count_non_increasing_in_penalty():
    rng = np.random.default_rng(8)
    for _ in range(20):
        values = standardize(_random_series(rng))
        counts = [len(pelt(values, b).changepoints) for b in DEFAULT_BETAS]
        assert all(x >= y for x, y in zip(counts, counts[1:]))


def test_result_invariants():
    rng = np.random.default_rng(12)
    values = _random_series(rng)
    result = pelt(values, 1.0)
    cps = result.changepoints
    assert all(x < y for x, y in zip(cps, cps[1:]))
    assert len(values) - 1 not in cps
    assert result.n_segments == len(cps) + 1


def test_standardize_basic():
    out = standardize(np.array([1.0, 2.0, 3.0]))
    assert out.mean() == pytest.approx(0.0)
    assert out.std() == pytest.approx(1.0)


def test_standardize_constant_is_zeros():
    assert np.all(standardize(np.full(5, 9.0)) == 0.0)


def test_standardize_affine_invariant():
    rng = np.random.default_rng(10)
    y = rng.normal(size=30)
    a, b = 4.0, 8.0
    np.testing.assert_allclose(standardize(a * y + b), standardize(y), atol=1e-12)


def test_standardize_needs_two_values():
    with pytest.raises(ValueError):
        standardize(np.array([1.0]))


def test_standardize_preserves_feature_series():
    fs = FeatureSeries("x", np.array([1.0, 2.0, 4.0]), t0=5, gaps=(6,))
    out = standardize(fs)
    assert isinstance(out, FeatureSeries)
    assert (out.name, out.t0, out.gaps) == ("x", 5, (6,))


def test_elbow_hand_case():
    counts = [12, 8, 5, 4, 3, 3, 2, 2, 2]
    result = elbow_select(counts, DEFAULT_BETAS)
    assert result.penalty == 4.0
    assert not result.degenerate


def test_elbow_flat_counts_degenerate():
    result = elbow_select([5] * 9, DEFAULT_BETAS)
    assert result.degenerate
    assert result.penalty == 3.0


def test_elbow_linear_counts_degenerate():
    result = elbow_select(list(range(10, 1, -1)), DEFAULT_BETAS)
    assert result.degenerate
    assert result.penalty == 3.0


def test_elbow_tie_takes_smaller_penalty():
    # curvatures [2,0,2,0,2,2,0]: the maximum ties at beta 3, 5, 7 and 8
    counts = [10, 6, 4, 2, 2, 2, 0, 0, 0]
    assert elbow_select(counts, DEFAULT_BETAS).penalty == 3.0


def test_elbow_matches_independent_reevaluation():
    rng = np.random.default_rng(11)
    for _ in range(20):
        drops = rng.integers(0, 4, size=8)
        counts = [20]
        for d in drops:
            counts.append(counts[-1] - int(d))
        result = elbow_select(counts, DEFAULT_BETAS)
        curv = [abs(counts[i + 1] + counts[i - 1] - 2 * counts[i])
                for i in range(1, 8)]
        best = curv.index(max(curv))
        assert result.penalty == DEFAULT_BETAS[best + 1]
        assert result.degenerate == (max(curv) == 0)


def test_elbow_select_validation():
    with pytest.raises(ValueError):
        elbow_select([1, 2], DEFAULT_BETAS)
    with pytest.raises(ValueError):
        elbow_select([3, 2, 1], [2, 2, 3])
    with pytest.raises(ValueError):
        elbow_select([3, -1, 1], [2, 3, 4])
    with pytest.raises(ValueError):
        elbow_select([1, 2], [2, 3])


def test_detect_constant_series():
    assert detect(np.full(30, 2.0)).changepoints == ()


def test_detect_recovers_step():
    values = np.array([0.0] * 15 + [5.0] * 15)
    assert detect(values).changepoints == (14,)


def test_detect_brackets_burst():
    rng = np.random.default_rng(13)
    values = rng.normal(scale=0.1, size=60)
    values[25:35] += 5.0
    cps = detect(values).changepoints
    assert 24 in cps and 34 in cps


def test_detect_reports_elbow():
    values = np.array([0.0] * 15 + [5.0] * 15)
    result = detect(values)
    assert result.elbow is not None
    assert result.penalty == result.elbow.penalty
    assert len(result.elbow.counts) == len(DEFAULT_BETAS)


def test_detect_needs_three_values():
    with pytest.raises(ValueError):
        detect(np.array([1.0, 2.0]))


def test_detect_indices_shift_scale_invariant():
    rng = np.random.default_rng(14)
    for _ in range(10):
        y = np.cumsum(rng.normal(size=50))
        assert detect(4.0 * y + 8.0).changepoints == detect(y).changepoints


def test_runtime_scales_roughly_linearly():
    def change_rich(n, rng):
        values = rng.normal(scale=0.3, size=n)
        values += np.repeat(rng.normal(scale=2.0, size=n // 20 + 1), 20)[:n]
        return values

    rng = np.random.default_rng(15)
    pelt(change_rich(1000, rng), 3.0)  # warm the compiled kernel
    times = {}
    for n in (1_000, 100_000):
        values = change_rich(n, rng)
        tic = time.perf_counter()
        pelt(values, 3.0)
        times[n] = time.perf_counter() - tic
    # 100x the data: linear ~100x, quadratic ~10000x; allow generous jitter
    assert times[100_000] < 500 * max(times[1_000], 1e-5)


def test_segmenter_fixed_penalty():
    values = np.array([0.0] * 10 + [10.0] * 10)
    model = PeltSegmenter(penalty=1.0)
    assert list(model.fit_predict(values)) == [9]
    assert model.penalty_ == 1.0
    assert model.elbow_ is None
    assert model.n_segments_ == 2


def test_segmenter_auto_penalty():
    values = np.array([0.0] * 15 + [5.0] * 15)
    model = PeltSegmenter().fit(values)
    assert list(model.changepoints_) == [14]
    assert model.elbow_ is not None
    assert model.penalty_ == model.elbow_.penalty


def test_segmenter_no_standardize():
    values = np.array([0.0] * 10 + [1.0] * 10)
    # raw scale: a step of one is cheaper to ignore under beta=6
    assert list(PeltSegmenter(penalty=6.0, standardize=False).fit_predict(values)) == []
    assert list(PeltSegmenter(penalty=6.0, standardize=True).fit_predict(values)) == [9]


def test_segmenter_predict_requires_fit():
    with pytest.raises(RuntimeError):
        PeltSegmenter().predict()


def test_segmenter_clone():
    model = PeltSegmenter(penalty=2.0, betas=(2, 3, 4), standardize=False)
    params = clone(model).get_params()
    assert params == {"penalty": 2.0, "betas": (2, 3, 4), "standardize": False}

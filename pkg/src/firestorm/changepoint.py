"""Penalized change-point detection on category and metric series.

The model: a series is split into contiguous segments; each segment is
scored by its sum of squared deviations from the segment mean and every
additional change point costs a penalty ``beta``. Minimizing the total
gives the optimal segmentation. ``pelt`` solves this exactly in near
linear time by pruning dominated candidates (valid for the SSE cost,
whose pruning constant is 0); ``opt_partition`` is the unpruned O(n^2)
reference that must always agree. Change points are reported as the
last index of each segment, so the final index of a series is never a
change point.

The full ``detect`` pipeline standardizes the series (which makes the
detected indices invariant to shifting and scaling), sweeps the penalty
over a small integer range, picks the elbow of the change-point count
curve, and segments at the chosen penalty. The SSE cost is the only one
built in; swapping in another cost requires revisiting the pruning
constant in the compiled kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ._dp import _NO_MASK, optpart_core, pelt_core
from ._validation import check_positive, check_series

__all__ = [
    "FeatureSeries",
    "ChangePointResult",
    "ElbowResult",
    "DEFAULT_BETAS",
    "SegmentCostSSE",
    "segment_cost",
    "standardize",
    "pelt",
    "opt_partition",
    "elbow_select",
    "elbow_penalty",
    "detect",
    "PeltSegmenter",
]

DEFAULT_BETAS: tuple[int, ...] = tuple(range(2, 11))


@dataclass(frozen=True, eq=False)
class FeatureSeries:
    """A named per-slice series; ``t0`` is the slice index of values[0].

    ``gaps`` lists the slice indices whose value was filled in rather
    than observed (empty slices under the carry-forward policy).
    """

    name: str
    values: np.ndarray
    t0: int = 0
    gaps: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "values", check_series(self.values, name=self.name or "series"))

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ElbowResult:
    """Outcome of the penalty sweep.

    ``degenerate`` is set when the count curve has no elbow (all second
    differences zero); the smallest interior penalty is used then.
    """

    penalty: float
    betas: tuple[float, ...]
    counts: tuple[int, ...]
    degenerate: bool


@dataclass(frozen=True)
class ChangePointResult:
    """Exact segmentation at one penalty.

    ``changepoints`` are last-indices of segments in ascending order and
    ``total_cost`` is the penalized objective: the sum of segment SSE
    costs plus ``penalty`` per change point.
    """

    changepoints: tuple[int, ...]
    penalty: float
    total_cost: float
    elbow: ElbowResult | None = None

    @property
    def n_segments(self) -> int:
        return len(self.changepoints) + 1


def _values(series) -> np.ndarray:
    if isinstance(series, FeatureSeries):
        return series.values
    return check_series(series)


class SegmentCostSSE:
    """O(1) segment SSE queries backed by prefix sums."""

    def __init__(self, values):
        values = _values(values)
        self._s1 = np.concatenate(([0.0], np.cumsum(values)))
        self._s2 = np.concatenate(([0.0], np.cumsum(values * values)))
        self.n = len(values)

    def cost(self, a: int, b: int) -> float:
        """SSE of values[a..b] (inclusive) around the segment mean."""
        if not 0 <= a <= b < self.n:
            raise ValueError(f"invalid segment [{a}, {b}] for series of length {self.n}")
        length = b - a + 1
        d1 = self._s1[b + 1] - self._s1[a]
        return float(self._s2[b + 1] - self._s2[a] - d1 * d1 / length)


def segment_cost(values, a: int, b: int) -> float:
    """SSE of ``values[a..b]`` around its mean (one-off convenience)."""
    return SegmentCostSSE(values).cost(a, b)


def standardize(series):
    """Z-score a series; a constant series maps to all zeros.

    Accepts an array or a :class:`FeatureSeries` and returns the same
    kind. Change points detected on the result are invariant to affine
    transforms of the input.
    """
    arr = _values(series)
    if len(arr) < 2:
        raise ValueError(f"standardize needs at least 2 values, got {len(arr)}")
    sd = float(arr.std())
    if sd == 0.0:
        out = np.zeros_like(arr)
    else:
        out = (arr - arr.mean()) / sd
    if isinstance(series, FeatureSeries):
        return replace(series, values=out)
    return out


def _as_result(cps: np.ndarray, total: float, penalty: float) -> ChangePointResult:
    return ChangePointResult(
        changepoints=tuple(int(c) for c in cps),
        penalty=float(penalty),
        total_cost=float(total),
    )


def pelt(series, penalty: float, record_candidates: bool = False):
    """Exact penalized segmentation with pruning.

    Returns a :class:`ChangePointResult`; with ``record_candidates``
    also the boolean matrix of candidate sets per step (row t holds the
    candidates considered when minimizing at prefix length t), which
    exists to audit the pruning.
    """
    arr = _values(series)
    penalty = check_positive(penalty, "penalty")
    if record_candidates:
        mask = np.zeros((len(arr) + 1, len(arr) + 1), dtype=np.bool_)
        cps, total = pelt_core(arr, penalty, mask)
        return _as_result(cps, total, penalty), mask
    cps, total = pelt_core(arr, penalty, _NO_MASK)
    return _as_result(cps, total, penalty)


def opt_partition(series, penalty: float) -> ChangePointResult:
    """Unpruned O(n^2) reference solving the same objective as ``pelt``."""
    arr = _values(series)
    penalty = check_positive(penalty, "penalty")
    cps, total, _ = optpart_core(arr, penalty)
    return _as_result(cps, total, penalty)


def elbow_select(counts: Sequence[int], betas: Sequence[float]) -> ElbowResult:
    """Pick the penalty at the elbow of the change-point count curve.

    The elbow maximizes the absolute second difference
    ``|counts[i+1] + counts[i-1] - 2 * counts[i]|`` over interior
    positions; ties resolve toward the smaller penalty. When every
    second difference is zero there is no elbow: the result is flagged
    degenerate and uses the smallest interior penalty.
    """
    betas = tuple(float(b) for b in betas)
    counts = tuple(int(c) for c in counts)
    if len(betas) != len(counts):
        raise ValueError("betas and counts must have the same length")
    if len(betas) < 3:
        raise ValueError("elbow selection needs at least 3 penalties")
    if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValueError("betas must be strictly increasing")
    if any(c < 0 for c in counts):
        raise ValueError("counts must be non-negative")
    curvature = [
        abs(counts[i + 1] + counts[i - 1] - 2 * counts[i])
        for i in range(1, len(counts) - 1)
    ]
    best = int(np.argmax(curvature))  # first maximum: ties go to smaller beta
    degenerate = max(curvature) == 0
    return ElbowResult(
        penalty=betas[best + 1], betas=betas, counts=counts, degenerate=degenerate
    )


def elbow_penalty(series, betas: Sequence[float] = DEFAULT_BETAS) -> ElbowResult:
    """Sweep penalties over a (standardized) series and pick the elbow."""
    arr = _values(series)
    counts = [len(pelt(arr, beta).changepoints) for beta in betas]
    return elbow_select(counts, betas)


def detect(series, betas: Sequence[float] = DEFAULT_BETAS) -> ChangePointResult:
    """Standardize, choose the penalty at the elbow, and segment.

    The returned change points index into the input series; for a
    :class:`FeatureSeries` add ``t0`` to map them to absolute slices.
    """
    arr = _values(series)
    if len(arr) < 3:
        raise ValueError(f"detect needs at least 3 values, got {len(arr)}")
    scaled = standardize(arr)
    chosen = elbow_penalty(scaled, betas)
    result = pelt(scaled, chosen.penalty)
    return replace(result, elbow=chosen)


class PeltSegmenter(BaseEstimator):
    """Estimator wrapper around exact penalized segmentation.

    Parameters
    ----------
    penalty : "auto" or float
        A fixed penalty, or "auto" to pick one by the elbow sweep.
    betas : sequence of float
        Penalties swept when ``penalty="auto"``.
    standardize : bool
        Z-score the series before segmenting (recommended; penalties
        then act on a common scale).

    Attributes (after ``fit``)
    --------------------------
    changepoints_ : ndarray of int, ascending segment end indices
    penalty_ : float, the penalty actually used
    total_cost_ : float, penalized objective at the optimum
    n_segments_ : int
    elbow_ : ElbowResult or None, sweep outcome when penalty="auto"
    """

    def __init__(self, penalty="auto", betas: Sequence[float] = DEFAULT_BETAS,
                 standardize: bool = True):
        self.penalty = penalty
        self.betas = betas
        self.standardize = standardize

    def fit(self, X, y=None) -> "PeltSegmenter":
        arr = check_series(X, min_len=1, name="X")
        if self.penalty == "auto":
            result = detect(arr, self.betas) if self.standardize else _detect_raw(arr, self.betas)
            self.elbow_ = result.elbow
        else:
            penalty = check_positive(self.penalty, "penalty")
            if self.standardize and len(arr) >= 2:
                arr = standardize(arr)
            result = pelt(arr, penalty)
            self.elbow_ = None
        self.changepoints_ = np.asarray(result.changepoints, dtype=np.intp)
        self.penalty_ = result.penalty
        self.total_cost_ = result.total_cost
        self.n_segments_ = result.n_segments
        return self

    def predict(self, X=None) -> np.ndarray:
        """Change points of ``X`` (fitting it first) or of the fitted series."""
        if X is not None:
            self.fit(X)
        if not hasattr(self, "changepoints_"):
            raise RuntimeError("PeltSegmenter is not fitted; call fit first")
        return self.changepoints_.copy()

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).predict()


def _detect_raw(arr: np.ndarray, betas: Sequence[float]) -> ChangePointResult:
    """detect() without the standardization step."""
    if len(arr) < 3:
        raise ValueError(f"detect needs at least 3 values, got {len(arr)}")
    chosen = elbow_penalty(arr, betas)
    result = pelt(arr, chosen.penalty)
    return replace(result, elbow=chosen)

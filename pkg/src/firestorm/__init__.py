"""Detect online firestorm outbreaks in time-stamped short-text streams.

The toolkit scores texts against a word-category lexicon, buckets them
into half-hour slices, builds mention-network metrics over moving
windows, and watches the resulting series with exact penalized
change-point detection. A streaming detector replays a recorded
dataset tick by tick under a constant memory budget and raises an
alert when several categories shift at once. A seeded generator
produces synthetic event streams with known ground truth for
end-to-end evaluation.
"""

from .changepoint import (
    DEFAULT_BETAS,
    ChangePointResult,
    ElbowResult,
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
from .corpus import (
    EventDataset,
    IngestError,
    RetweetRef,
    Tweet,
    bucketize,
    ingest,
    is_firestorm_tweet,
    normalize_label,
    read_dataset,
    window,
    write_dataset,
)
from .detector import (
    DEFAULT_CATEGORIES,
    CategorySummary,
    CategoryTick,
    DetectionSummary,
    RollingWindow,
    StreamConfig,
    StreamDetector,
    StreamResult,
    TickReport,
    category_series,
    category_series_matrix,
    run_stream,
    tick,
)
from .evaluation import (
    EvaluationError,
    EventTimeline,
    OffsetStats,
    TTestResult,
    WelchResult,
    compare_categories,
    component_split_compare,
    detect_categories,
    event_timeline,
    firestorm_groups,
    offset_stats,
    peaks,
    predictor_relevance,
    start_time,
    welch_ttest,
)
from .lexicon import (
    CategoryScores,
    LexCategory,
    LexEntry,
    Lexicon,
    LexiconError,
    LexiconScorer,
    load_demo_lexicon,
    load_lexicon,
    parse_lexicon,
    score_names,
    score_tokens,
    score_tweet,
    tokenize,
)
from .network import (
    METRIC_NAMES,
    MentionNetwork,
    NetworkMetrics,
    build_network,
    compute_metrics,
    largest_component_nodes,
    metric_series,
    metrics_over_windows,
)
from .synth import (
    CategoryShift,
    FirestormShape,
    GroundTruth,
    SynthConfig,
    SynthError,
    default_shifts,
    generate,
    generate_suite,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BETAS",
    "DEFAULT_CATEGORIES",
    "METRIC_NAMES",
    "CategoryScores",
    "CategoryShift",
    "CategorySummary",
    "CategoryTick",
    "ChangePointResult",
    "DetectionSummary",
    "ElbowResult",
    "EvaluationError",
    "EventDataset",
    "EventTimeline",
    "FeatureSeries",
    "FirestormShape",
    "GroundTruth",
    "IngestError",
    "LexCategory",
    "LexEntry",
    "Lexicon",
    "LexiconError",
    "LexiconScorer",
    "MentionNetwork",
    "NetworkMetrics",
    "OffsetStats",
    "PeltSegmenter",
    "RetweetRef",
    "RollingWindow",
    "SegmentCostSSE",
    "StreamConfig",
    "StreamDetector",
    "StreamResult",
    "SynthConfig",
    "SynthError",
    "TTestResult",
    "TickReport",
    "Tweet",
    "WelchResult",
    "bucketize",
    "build_network",
    "category_series",
    "category_series_matrix",
    "compare_categories",
    "component_split_compare",
    "compute_metrics",
    "default_shifts",
    "detect",
    "detect_categories",
    "elbow_penalty",
    "elbow_select",
    "event_timeline",
    "firestorm_groups",
    "generate",
    "generate_suite",
    "ingest",
    "is_firestorm_tweet",
    "largest_component_nodes",
    "load_demo_lexicon",
    "load_lexicon",
    "metric_series",
    "metrics_over_windows",
    "normalize_label",
    "offset_stats",
    "opt_partition",
    "parse_lexicon",
    "peaks",
    "pelt",
    "predictor_relevance",
    "read_dataset",
    "run_stream",
    "score_names",
    "score_tokens",
    "score_tweet",
    "segment_cost",
    "standardize",
    "start_time",
    "tick",
    "tokenize",
    "welch_ttest",
    "window",
    "write_dataset",
]

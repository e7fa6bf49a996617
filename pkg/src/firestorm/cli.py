"""Command line front end.

Subcommands cover the whole pipeline: ``ingest`` normalizes raw JSONL
into the canonical dataset form, ``synth`` generates seeded synthetic
events, ``score`` and ``networks`` turn a dataset into per-slice CSV
series, ``detect`` segments a series, ``stream`` replays a dataset
through the streaming detector, ``evaluate`` aggregates offsets,
t-tests and predictor counts over several events, and ``report``
renders the evaluation CSVs as static SVG charts.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
The ``FS_LOG`` environment variable sets log verbosity (DEBUG, INFO,
WARNING, ERROR; default WARNING). All CSV outputs carry a single
header line and are byte-identical across runs on identical inputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from datetime import date, datetime, time, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:                      # Python < 3.11
    import tomli as tomllib

from .changepoint import detect, pelt, standardize
from .corpus import (
    IngestError,
    bucketize,
    is_firestorm_tweet,
    parse_timestamp,
    read_dataset,
    write_dataset,
)
from .detector import (
    DEFAULT_CATEGORIES,
    StreamConfig,
    category_series_matrix,
    run_stream,
)
from .evaluation import (
    EvaluationError,
    compare_categories,
    detect_categories,
    firestorm_groups,
    offset_stats,
    peaks,
    predictor_relevance,
    start_time,
)
from .lexicon import load_demo_lexicon, load_lexicon, score_names
from .network import METRIC_NAMES, metric_series, metrics_over_windows
from .synth import CategoryShift, FirestormShape, SynthConfig, generate, generate_suite

log = logging.getLogger("firestorm")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    """Flag combination or value that argparse alone cannot reject."""


def _fmt(value) -> str:
    """One CSV cell; floats keep their shortest round-trip form."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return str(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def _write_csv(path, header: Sequence[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])
    log.info("wrote %s (%d rows)", path, len(rows))


def _load_lexicon(path):
    return load_lexicon(path) if path else load_demo_lexicon()


def _split_categories(arg: str | None) -> tuple[str, ...] | None:
    if arg is None:
        return None
    cats = tuple(c.strip() for c in arg.split(",") if c.strip())
    if not cats:
        raise UsageError("--categories must name at least one category")
    return cats


# ---------------------------------------------------------------- ingest

def _cmd_ingest(args) -> int:
    path = Path(args.input)
    has_meta = False
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                break
            has_meta = isinstance(record, dict) and "_meta" in record
            break
    span_days = args.span_days
    if span_days is None and not has_meta:
        span_days = 15
    span_start = parse_timestamp(args.span_start) if args.span_start else None
    ds = read_dataset(
        path,
        label=args.label,
        span_start=span_start,
        span_days=span_days,
        strict=args.strict,
    )
    write_dataset(ds, args.out)
    n_fire = sum(1 for t in ds.tweets if is_firestorm_tweet(t, ds.label))
    print(
        f"label={ds.label} tweets={ds.n_tweets} users={ds.n_users} "
        f"firestorm={n_fire} skipped={ds.skipped} out_of_span={ds.out_of_span}"
    )
    return EXIT_OK


# ----------------------------------------------------------------- synth

_SYNTH_KEYS = (
    "seed", "span_days", "n_users", "base_rate", "diurnal_amplitude",
    "mention_rate", "hashtag_rate", "tokens_per_tweet",
)
_FIRESTORM_KEYS = (
    "start_slice", "ramp_slices", "duration_slices", "magnitude",
    "target", "fraction", "mention_focus",
)


def _toml_timestamp(value) -> datetime:
    if isinstance(value, datetime):
        if value.tzinfo is None:
            value = value.replace(tzinfo=timezone.utc)
        return value.astimezone(timezone.utc)
    if isinstance(value, date):
        return datetime.combine(value, time(), tzinfo=timezone.utc)
    return parse_timestamp(value)


def _synth_config(doc: dict) -> SynthConfig:
    known = set(_SYNTH_KEYS) | {"span_start", "firestorm", "lexical_shift"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ValueError(f"unknown synth config keys: {', '.join(unknown)}")
    kwargs = {key: doc[key] for key in _SYNTH_KEYS if key in doc}
    if "span_start" in doc:
        kwargs["span_start"] = _toml_timestamp(doc["span_start"])
    if "firestorm" in doc:
        section = doc["firestorm"]
        bad = sorted(set(section) - set(_FIRESTORM_KEYS))
        if bad:
            raise ValueError(f"unknown firestorm config keys: {', '.join(bad)}")
        kwargs["firestorm"] = replace(
            FirestormShape(), **{k: section[k] for k in _FIRESTORM_KEYS if k in section}
        )
    if "lexical_shift" in doc:
        shifts = {}
        for name, pair in doc["lexical_shift"].items():
            if not isinstance(pair, dict) or set(pair) != {"baseline", "firestorm"}:
                raise ValueError(
                    f"lexical_shift.{name} needs exactly 'baseline' and 'firestorm'"
                )
            shifts[name] = CategoryShift(float(pair["baseline"]), float(pair["firestorm"]))
        kwargs["lexical_shift"] = shifts
    return SynthConfig(**kwargs)


def _truth_json(truth) -> str:
    doc = {
        "label": truth.label,
        "start_slice": truth.start_slice,
        "burst_interval": list(truth.burst_interval) if truth.burst_interval else None,
        "directions": dict(sorted(truth.directions.items())),
        "target_node": truth.target_node,
        "n_firestorm": truth.n_firestorm,
        "n_background": truth.n_background,
        "fraction": truth.fraction,
        "seed": truth.seed,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _cmd_synth(args) -> int:
    doc = {}
    if args.config:
        with open(args.config, "rb") as fh:
            doc = tomllib.load(fh)
    config = _synth_config(doc)
    if args.seed is not None:                    # flags win over the config file
        config = replace(config, seed=args.seed)
    if args.null:
        config = replace(config, firestorm=replace(config.firestorm, magnitude=1.0))
    lexicon = _load_lexicon(args.lexicon)

    if args.events is None:
        if not args.out:
            raise UsageError("synth needs --out (or --events with --out-dir)")
        ds, truth = generate(config, lexicon)
        write_dataset(ds, args.out)
        if args.truth:
            Path(args.truth).write_text(_truth_json(truth), encoding="utf-8")
        log.info("generated %s: %d tweets, fraction %.4f",
                 ds.label, ds.n_tweets, truth.fraction)
        return EXIT_OK

    if not args.out_dir:
        raise UsageError("--events needs --out-dir")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    suite = generate_suite(args.events, config, seed=config.seed)
    for i, (ds, truth) in enumerate(suite, start=1):
        write_dataset(ds, out_dir / f"event_{i:02d}.jsonl")
        (out_dir / f"truth_{i:02d}.json").write_text(_truth_json(truth), encoding="utf-8")
    log.info("generated %d events in %s", len(suite), out_dir)
    return EXIT_OK


# ----------------------------------------------------------------- score

def _cmd_score(args) -> int:
    ds = read_dataset(args.input)
    lexicon = _load_lexicon(args.lexicon)
    categories = _split_categories(args.categories) or DEFAULT_CATEGORIES
    series = category_series_matrix(bucketize(ds), lexicon, categories)
    names = list(series)
    n = ds.n_slices
    rows = [[t] + [series[name].values[t] for name in names] for t in range(n)]
    _write_csv(args.out, ["slice"] + names, rows)
    gaps = series[names[0]].gaps
    if gaps:
        log.info("%d empty slices carried forward", len(gaps))
    return EXIT_OK


# -------------------------------------------------------------- networks

def _cmd_networks(args) -> int:
    ds = read_dataset(args.input)
    if args.all_metrics:
        per_window = metrics_over_windows(ds, kind=args.kind, window_size=args.window)
        rows = [
            [t] + [getattr(m, name) for name in METRIC_NAMES]
            for t, m in enumerate(per_window)
        ]
        _write_csv(args.out, ["slice"] + list(METRIC_NAMES), rows)
    else:
        series = metric_series(ds, args.metric, kind=args.kind, window_size=args.window)
        rows = [[t, v] for t, v in enumerate(series.values)]
        _write_csv(args.out, ["slice", "value"], rows)
    return EXIT_OK


# ---------------------------------------------------------------- detect

def _read_series_csv(path, column: str | None) -> tuple[np.ndarray, np.ndarray]:
    """Read (slice indices, values) from a series CSV."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: empty CSV")
        if column is None:
            if len(header) != 2:
                raise ValueError(
                    f"{path}: wide CSV; pick a column with --column "
                    f"(available: {', '.join(header[1:])})"
                )
            column = header[1]
        try:
            idx = header.index(column)
        except ValueError:
            raise ValueError(
                f"{path}: no column {column!r} (available: {', '.join(header[1:])})"
            ) from None
        slices, values = [], []
        for row in reader:
            if not row:
                continue
            slices.append(int(row[0]))
            values.append(float(row[idx]))
    if not values:
        raise ValueError(f"{path}: no data rows")
    return np.array(slices), np.array(values)


def _cmd_detect(args) -> int:
    slices, values = _read_series_csv(args.series, args.column)
    if args.penalty == "auto":
        result = detect(values)
    else:
        try:
            penalty = float(args.penalty)
        except ValueError:
            raise UsageError(
                f"--penalty must be 'auto' or a number, got {args.penalty!r}"
            ) from None
        result = pelt(standardize(values), penalty)
    rows = [
        [int(slices[cp]), result.penalty, result.total_cost]
        for cp in result.changepoints
    ]
    _write_csv(args.out, ["changepoint_index", "penalty", "total_cost"], rows)
    if result.elbow is not None:
        out = Path(args.out)
        sidecar = out.with_name(out.stem + ".counts" + (out.suffix or ".csv"))
        _write_csv(
            sidecar,
            ["penalty", "n_changepoints"],
            list(zip(result.elbow.betas, result.elbow.counts)),
        )
    log.info("%d change points at penalty %g", len(result.changepoints), result.penalty)
    return EXIT_OK


# ---------------------------------------------------------------- stream

def _cmd_stream(args) -> int:
    ds = read_dataset(args.input)
    lexicon = _load_lexicon(args.lexicon)
    categories = _split_categories(args.categories) or DEFAULT_CATEGORIES
    config = StreamConfig(
        categories=categories,
        min_categories=args.min_categories,
        recency=args.recency,
    )
    result = run_stream(ds, lexicon, config)
    rows = []
    for report in result.ticks:
        for cat_tick in report.categories:
            for cp in cat_tick.changepoints:
                rows.append([
                    report.t,
                    cat_tick.category,
                    cp,
                    report.t - cp <= config.recency,
                    report.alert,
                ])
    _write_csv(
        args.out,
        ["tick", "category", "changepoint_abs_slice", "fresh", "alert"],
        rows,
    )
    summary = result.summary
    print(
        f"ticks={summary.n_ticks} alerts={len(summary.alert_ticks)} "
        f"state_floats={summary.max_state_floats}"
    )
    return EXIT_OK


# -------------------------------------------------------------- evaluate

def _evaluate_event(task) -> dict:
    """One event's evaluation quantities (runs in worker processes)."""
    path, lexicon_path, categories = task
    lexicon = _load_lexicon(lexicon_path)
    ds = read_dataset(path)
    start = start_time(ds)
    peak_indegree, peak_volume = peaks(ds)
    cps_by_cat = detect_categories(ds, lexicon, categories or score_names(lexicon))
    pooled = sorted(set().union(*cps_by_cat.values())) if cps_by_cat else []

    ttests = {}
    for scope in ("all", "mention"):
        fire, nonfire = firestorm_groups(ds, reference_slice=start, scope=scope)
        ttests[scope] = [
            [
                ds.label, r.category, r.n_fire, r.n_nonfire, r.mean_fire,
                r.mean_nonfire, r.t_statistic, r.dof, r.p_value, r.significant,
                r.direction, r.skipped,
            ]
            for r in compare_categories(fire, nonfire, lexicon)
        ]
    return {
        "label": ds.label,
        "start": start,
        "peak_indegree": peak_indegree,
        "peak_volume": peak_volume,
        "pooled": pooled,
        "cps_by_cat": cps_by_cat,
        "ttests": ttests,
    }


def _closest_offset_hours(pooled, reference) -> float | None:
    if not pooled:
        return None
    closest = min(pooled, key=lambda cp: (abs(cp - reference), cp))
    return (closest - reference) * 0.5


def _cmd_evaluate(args) -> int:
    categories = _split_categories(args.categories)
    tasks = [(path, args.lexicon, categories) for path in args.input]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_evaluate_event, tasks))
    else:
        results = [_evaluate_event(task) for task in tasks]

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    offset_rows = []
    for r in results:
        offset_rows.append([
            r["label"],
            len(r["pooled"]),
            r["start"],
            r["peak_indegree"],
            r["peak_volume"],
            _closest_offset_hours(r["pooled"], r["start"]),
            _closest_offset_hours(r["pooled"], r["peak_indegree"]),
            _closest_offset_hours(r["pooled"], r["peak_volume"]),
        ])
    _write_csv(
        out_dir / "offsets.csv",
        [
            "label", "n_changepoints", "start_slice", "peak_indegree_slice",
            "peak_volume_slice", "offset_start_hours",
            "offset_peak_indegree_hours", "offset_peak_volume_hours",
        ],
        offset_rows,
    )

    summary_rows = []
    for ref_key, name in (
        ("start", "start"),
        ("peak_indegree", "peak_indegree"),
        ("peak_volume", "peak_volume"),
    ):
        events = [(r["pooled"], r[ref_key]) for r in results]
        try:
            stats = offset_stats(events)
        except EvaluationError:
            continue
        summary_rows.append([
            name, stats.mean_hours, stats.sd_hours, stats.n_events, stats.n_excluded,
        ])
    _write_csv(
        out_dir / "offsets_summary.csv",
        ["reference", "mean_hours", "sd_hours", "n_events", "n_excluded"],
        summary_rows,
    )

    header = [
        "label", "category", "n_fire", "n_nonfire", "mean_fire", "mean_nonfire",
        "t_statistic", "dof", "p_value", "significant", "direction", "skipped",
    ]
    for scope, filename in (("all", "ttests_all.csv"), ("mention", "ttests_mention.csv")):
        rows = [row for r in results for row in r["ttests"][scope]]
        _write_csv(out_dir / filename, header, rows)

    events = [(r["cps_by_cat"], r["start"]) for r in results]
    counts = predictor_relevance(events, tolerance=args.tolerance)
    _write_csv(
        out_dir / "predictor_counts.csv",
        ["category", "count"],
        [[name, count] for name, count in counts.items()],
    )
    print(f"evaluated {len(results)} events into {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------- report

def _cmd_report(args) -> int:
    from .report import render_report

    written = render_report(
        args.in_dir,
        args.out_dir,
        datasets=args.input or (),
        lexicon_path=args.lexicon,
        categories=_split_categories(args.categories),
    )
    for path in written:
        log.info("wrote %s", path)
    print(f"rendered {len(written)} charts into {args.out_dir}")
    return EXIT_OK


# ------------------------------------------------------------ the parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="firestorm",
        description="Detect firestorm outbreaks in time-stamped short-text streams.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    p = sub.add_parser("ingest", help="normalize raw JSONL into a canonical dataset")
    p.add_argument("--input", required=True, help="raw JSONL file")
    p.add_argument("--label", help="event token, '#tag' or '@handle'")
    p.add_argument("--span-start", help="ISO-8601 start of the observation span")
    p.add_argument("--span-days", type=int, default=None,
                   help="span length in days (default 15)")
    p.add_argument("--out", required=True, help="canonical JSONL output")
    p.add_argument("--strict", action="store_true",
                   help="fail on the first malformed record instead of skipping")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="generate seeded synthetic event datasets")
    p.add_argument("--config", help="TOML config file; flags override it")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--lexicon", help="lexicon file (default: bundled demo lexicon)")
    p.add_argument("--null", action="store_true",
                   help="magnitude 1: background only, no burst")
    p.add_argument("--out", help="dataset JSONL output (single-event mode)")
    p.add_argument("--truth", help="ground-truth JSON output (single-event mode)")
    p.add_argument("--events", type=int,
                   help="generate a jittered suite of this many events")
    p.add_argument("--out-dir", help="directory for suite outputs")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("score", help="per-slice mean category scores as CSV")
    p.add_argument("--input", required=True, help="canonical dataset JSONL")
    p.add_argument("--lexicon", help="lexicon file (default: bundled demo lexicon)")
    p.add_argument("--categories",
                   help="comma-separated categories (default: %s)"
                        % ",".join(DEFAULT_CATEGORIES))
    p.add_argument("--out", required=True, help="CSV output: slice,<categories...>")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("networks", help="windowed network metric series as CSV")
    p.add_argument("--input", required=True, help="canonical dataset JSONL")
    p.add_argument("--metric", default="max_in_degree", choices=METRIC_NAMES,
                   metavar="NAME", help="metric name (default max_in_degree)")
    p.add_argument("--all-metrics", action="store_true",
                   help="emit a wide CSV with one column per metric")
    p.add_argument("--kind", default="mention", choices=("mention", "retweet"))
    p.add_argument("--window", type=int, default=24,
                   help="window length in slices (default 24)")
    p.add_argument("--out", required=True, help="CSV output")
    p.set_defaults(func=_cmd_networks)

    p = sub.add_parser("detect", help="change points of one series CSV")
    p.add_argument("--series", required=True, help="CSV with a slice column")
    p.add_argument("--column", help="column to segment (for wide CSVs)")
    p.add_argument("--penalty", default="auto",
                   help="'auto' (elbow over 2..10) or a fixed penalty")
    p.add_argument("--out", required=True,
                   help="CSV output: changepoint_index,penalty,total_cost")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("stream", help="replay a dataset through the streaming detector")
    p.add_argument("--input", required=True, help="canonical dataset JSONL")
    p.add_argument("--lexicon", help="lexicon file (default: bundled demo lexicon)")
    p.add_argument("--categories",
                   help="comma-separated monitored categories (default: %s)"
                        % ",".join(DEFAULT_CATEGORIES))
    p.add_argument("--min-categories", type=int, default=2,
                   help="fresh categories needed for an alert (default 2)")
    p.add_argument("--recency", type=int, default=2,
                   help="slices a change point stays fresh (default 2)")
    p.add_argument("--out", required=True,
                   help="CSV output: tick,category,changepoint_abs_slice,fresh,alert")
    p.set_defaults(func=_cmd_stream)

    p = sub.add_parser("evaluate", help="offsets, t-tests and predictor counts")
    p.add_argument("--input", required=True, nargs="+",
                   help="one or more canonical dataset JSONL files")
    p.add_argument("--lexicon", help="lexicon file (default: bundled demo lexicon)")
    p.add_argument("--categories",
                   help="categories to detect on (default: every scored category)")
    p.add_argument("--tolerance", type=int, default=2,
                   help="slices around the start counted as relevant (default 2)")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes across events (default 1)")
    p.add_argument("--out-dir", required=True, help="directory for the CSV outputs")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("report", help="render evaluation CSVs as SVG charts")
    p.add_argument("--in-dir", required=True, help="directory written by evaluate")
    p.add_argument("--out-dir", required=True, help="directory for the SVG outputs")
    p.add_argument("--input", nargs="*",
                   help="optional datasets for per-event series charts")
    p.add_argument("--lexicon", help="lexicon file (default: bundled demo lexicon)")
    p.add_argument("--categories",
                   help="categories for series charts (default: %s)"
                        % ",".join(DEFAULT_CATEGORIES))
    p.set_defaults(func=_cmd_report)

    return parser


def _setup_logging() -> None:
    level_name = os.environ.get("FS_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, OSError, UnicodeDecodeError) as exc:
        # covers IngestError, LexiconError, SynthError, EvaluationError,
        # TOML/JSON/CSV parse failures and unreadable paths
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        log.debug("data error", exc_info=True)
        return EXIT_DATA
    except Exception as exc:
        import traceback

        traceback.print_exc()
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end runs of the command line subcommands.

Most tests drive ``main(argv)`` in process and inspect files, exit
codes and the echo lines. One test runs the module under a fresh
interpreter to cover the script entry point.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from firestorm import (
    DEFAULT_CATEGORIES,
    EventDataset,
    Tweet,
    bucketize,
    category_series_matrix,
    metric_series,
    score_names,
    write_dataset,
)
from firestorm.cli import main

UTC = dt.timezone.utc
START = dt.datetime(2014, 3, 1, tzinfo=UTC)

_ids = iter(range(10**6, 2 * 10**6))


def tw(slice_index, author="a", hashtags=(), mentions=(), text=""):
    ts = START + dt.timedelta(minutes=30 * slice_index, seconds=1)
    return Tweet(id=str(next(_ids)), author=author, timestamp=ts, text=text,
                 hashtags=tuple(hashtags), mentions=tuple(mentions))


def dataset(tweets, label="#f", span_days=1):
    ordered = sorted(tweets, key=lambda t: t.timestamp)
    return EventDataset(label=label, span_start=START, span_days=span_days,
                        tweets=ordered)


def rows_of(path):
    with open(path, newline="", encoding="utf-8") as fh:
        header, *rows = list(csv.reader(fh))
    return header, rows


# ------------------------------------------------------------ exit codes

def test_no_subcommand_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["detect", "--bogus", "x"])
    assert exc.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_missing_input_is_data_error(tmp_path, capsys):
    rc = main(["score", "--input", str(tmp_path / "nope.jsonl"),
               "--out", str(tmp_path / "o.csv")])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


def test_synth_without_out_is_usage_error(capsys):
    assert main(["synth"]) == 1
    assert "usage error" in capsys.readouterr().err


def test_module_entry_point_help():
    proc = subprocess.run(
        [sys.executable, "-m", "firestorm.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    for name in ("ingest", "synth", "detect", "stream", "evaluate", "report"):
        assert name in proc.stdout


# ----------------------------------------------------------------- synth

def test_synth_matches_library(tmp_path, event42):
    ds_path = tmp_path / "ds.jsonl"
    truth_path = tmp_path / "truth.json"
    rc = main(["synth", "--seed", "42",
               "--out", str(ds_path), "--truth", str(truth_path)])
    assert rc == 0

    ds, truth = event42
    doc = json.loads(truth_path.read_text())
    assert doc["label"] == truth.label
    assert doc["start_slice"] == truth.start_slice
    assert doc["burst_interval"] == list(truth.burst_interval)
    assert doc["n_firestorm"] == truth.n_firestorm
    assert doc["n_background"] == truth.n_background
    assert doc["fraction"] == truth.fraction
    assert doc["seed"] == 42

    ref = tmp_path / "ref.jsonl"
    write_dataset(ds, ref)
    assert ds_path.read_bytes() == ref.read_bytes()


SMALL_CONFIG = """\
seed = 5
base_rate = 4.0
n_users = 500

[firestorm]
target = "#mini"
fraction = 0.03
"""


def test_synth_null_stream(tmp_path):
    config = tmp_path / "small.toml"
    config.write_text(SMALL_CONFIG)
    truth_path = tmp_path / "truth.json"
    rc = main(["synth", "--config", str(config), "--null",
               "--out", str(tmp_path / "ds.jsonl"), "--truth", str(truth_path)])
    assert rc == 0
    doc = json.loads(truth_path.read_text())
    assert doc["start_slice"] is None
    assert doc["burst_interval"] is None
    assert doc["n_firestorm"] == 0


def test_synth_flags_override_config(tmp_path):
    config = tmp_path / "small.toml"
    config.write_text(SMALL_CONFIG)
    truth_path = tmp_path / "truth.json"
    rc = main(["synth", "--config", str(config), "--seed", "9",
               "--out", str(tmp_path / "ds.jsonl"), "--truth", str(truth_path)])
    assert rc == 0
    doc = json.loads(truth_path.read_text())
    assert doc["seed"] == 9
    assert doc["label"] == "#mini"


def test_synth_rejects_unknown_config_key(tmp_path, capsys):
    config = tmp_path / "bad.toml"
    config.write_text("bogus = 1\n")
    rc = main(["synth", "--config", str(config), "--out", str(tmp_path / "x.jsonl")])
    assert rc == 2
    assert "unknown synth config keys" in capsys.readouterr().err


# ---------------------------------------------------------------- ingest

def test_ingest_echo_and_metadata(tmp_path, capsys):
    raw = tmp_path / "raw.jsonl"
    lines = [
        json.dumps({"id": "1", "user": "ann", "ts": "2014-03-01T00:10:00Z",
                    "text": "so excited #f"}),
        json.dumps({"id": "2", "user": "bob", "ts": "2014-03-01T01:10:00Z",
                    "text": "@ann morning"}),
        json.dumps({"id": "3", "user": "cat", "ts": "2014-03-01T02:10:00Z",
                    "text": "nothing here"}),
    ]
    raw.write_text("\n".join(lines) + "\n")
    out = tmp_path / "canon.jsonl"
    rc = main(["ingest", "--input", str(raw), "--label", "#f",
               "--span-start", "2014-03-01T00:00:00Z", "--span-days", "2",
               "--out", str(out)])
    assert rc == 0
    echo = capsys.readouterr().out
    assert "label=#f" in echo and "tweets=3" in echo and "firestorm=1" in echo
    first = json.loads(out.read_text().splitlines()[0])
    assert "_meta" in first


# ------------------------------------------------------------ score, networks

@pytest.fixture()
def tiny_dataset(tmp_path):
    tweets = [
        tw(0, author="ann", text="idk lol", mentions=["bob"]),
        tw(0, author="bob", text="meeting today"),
        tw(3, author="cat", text="love this", mentions=["ann"]),
        tw(40, author="dan", text="nope nope"),
    ]
    ds = dataset(tweets)
    path = tmp_path / "tiny.jsonl"
    write_dataset(ds, path)
    return ds, path


def test_score_matches_library(tmp_path, tiny_dataset, lexicon):
    ds, path = tiny_dataset
    out = tmp_path / "scores.csv"
    assert main(["score", "--input", str(path), "--out", str(out)]) == 0
    header, rows = rows_of(out)
    assert header == ["slice"] + list(DEFAULT_CATEGORIES)
    assert len(rows) == ds.n_slices
    series = category_series_matrix(bucketize(ds), lexicon, DEFAULT_CATEGORIES)
    for t in (0, 3, 17, 40):
        for j, name in enumerate(DEFAULT_CATEGORIES):
            assert float(rows[t][1 + j]) == series[name].values[t]


def test_score_rerun_is_byte_identical(tmp_path, tiny_dataset):
    _, path = tiny_dataset
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["score", "--input", str(path), "--out", str(first)])
    main(["score", "--input", str(path), "--out", str(second)])
    assert first.read_bytes() == second.read_bytes()


def test_networks_single_metric(tmp_path, tiny_dataset):
    ds, path = tiny_dataset
    out = tmp_path / "net.csv"
    rc = main(["networks", "--input", str(path),
               "--metric", "max_in_degree", "--out", str(out)])
    assert rc == 0
    header, rows = rows_of(out)
    assert header == ["slice", "value"]
    series = metric_series(ds, "max_in_degree")
    assert [float(r[1]) for r in rows] == list(series.values)


def test_networks_all_metrics(tmp_path, tiny_dataset):
    from firestorm.network import METRIC_NAMES

    _, path = tiny_dataset
    out = tmp_path / "wide.csv"
    rc = main(["networks", "--input", str(path), "--all-metrics",
               "--out", str(out)])
    assert rc == 0
    header, rows = rows_of(out)
    assert header == ["slice"] + list(METRIC_NAMES)
    assert len(rows) == 48


# ---------------------------------------------------------------- detect

def _step_series_csv(path, start=100):
    values = [0.0] * 30 + [10.0] * 30
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["slice", "value"])
        for i, v in enumerate(values):
            writer.writerow([start + i, v])


def test_detect_fixed_penalty(tmp_path):
    series = tmp_path / "series.csv"
    _step_series_csv(series, start=100)
    out = tmp_path / "cps.csv"
    rc = main(["detect", "--series", str(series), "--penalty", "5",
               "--out", str(out)])
    assert rc == 0
    header, rows = rows_of(out)
    assert header == ["changepoint_index", "penalty", "total_cost"]
    # the break sits on the last zero sample, reported in slice numbering
    assert [r[0] for r in rows] == ["129"]
    assert float(rows[0][1]) == 5.0
    # fixed penalty mode has no elbow sweep, so no counts sidecar
    assert not (tmp_path / "cps.counts.csv").exists()


def test_detect_auto_writes_counts_sidecar(tmp_path):
    series = tmp_path / "series.csv"
    _step_series_csv(series)
    out = tmp_path / "cps.csv"
    assert main(["detect", "--series", str(series), "--out", str(out)]) == 0
    header, rows = rows_of(tmp_path / "cps.counts.csv")
    assert header == ["penalty", "n_changepoints"]
    assert [float(r[0]) for r in rows] == [2, 3, 4, 5, 6, 7, 8, 9, 10]
    counts = [int(r[1]) for r in rows]
    assert counts == sorted(counts, reverse=True)


def test_detect_wide_csv_needs_column(tmp_path, tiny_dataset, capsys):
    _, path = tiny_dataset
    wide = tmp_path / "scores.csv"
    main(["score", "--input", str(path), "--out", str(wide)])
    rc = main(["detect", "--series", str(wide), "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    assert "pick a column" in capsys.readouterr().err
    rc = main(["detect", "--series", str(wide), "--column", "I",
               "--out", str(tmp_path / "x.csv")])
    assert rc == 0


def test_detect_bad_penalty_is_usage_error(tmp_path, capsys):
    series = tmp_path / "series.csv"
    _step_series_csv(series)
    rc = main(["detect", "--series", str(series), "--penalty", "soon",
               "--out", str(tmp_path / "x.csv")])
    assert rc == 1
    assert "usage error" in capsys.readouterr().err


# ---------------------------------------------------------------- stream

def test_stream_csv_and_echo(tmp_path, capsys):
    tweets = [tw(s, author=f"u{s}", text="meeting today") for s in range(90)]
    for s in range(90, 96):
        tweets += [tw(s, author=f"v{s}{i}", text="idk lol") for i in range(5)]
    path = tmp_path / "stream.jsonl"
    write_dataset(dataset(tweets, span_days=2), path)

    out = tmp_path / "ticks.csv"
    rc = main(["stream", "--input", str(path), "--out", str(out)])
    assert rc == 0
    echo = capsys.readouterr().out
    assert "ticks=48" in echo
    assert "state_floats=250" in echo

    header, rows = rows_of(out)
    assert header == ["tick", "category", "changepoint_abs_slice", "fresh", "alert"]
    assert rows, "the jump into netspeak territory must surface change points"
    for tick, category, cp, fresh, alert in rows:
        assert category in DEFAULT_CATEGORIES
        assert fresh == ("true" if int(tick) - int(cp) <= 2 else "false")
        assert alert in ("true", "false")


# ----------------------------------------------- evaluate, report, determinism

@pytest.fixture(scope="module")
def suite_dir(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("suite")
    rc = main(["synth", "--events", "2", "--seed", "3", "--out-dir", str(out_dir)])
    assert rc == 0
    return out_dir


def _evaluate(suite_dir, out_dir, *extra):
    argv = ["evaluate",
            "--input", str(suite_dir / "event_01.jsonl"),
            str(suite_dir / "event_02.jsonl"),
            "--categories", ",".join(DEFAULT_CATEGORIES),
            "--out-dir", str(out_dir)]
    argv.extend(extra)
    return main(argv)


def test_evaluate_outputs(tmp_path, suite_dir, lexicon, capsys):
    out_dir = tmp_path / "eval"
    assert _evaluate(suite_dir, out_dir) == 0
    assert "evaluated 2 events" in capsys.readouterr().out

    labels = {
        json.loads((suite_dir / f"truth_{i:02d}.json").read_text())["label"]
        for i in (1, 2)
    }

    header, rows = rows_of(out_dir / "offsets.csv")
    assert header[:3] == ["label", "n_changepoints", "start_slice"]
    assert len(rows) == 2
    assert {r[0] for r in rows} == labels

    header, rows = rows_of(out_dir / "offsets_summary.csv")
    assert header == ["reference", "mean_hours", "sd_hours", "n_events", "n_excluded"]
    assert [r[0] for r in rows] == ["start", "peak_indegree", "peak_volume"]

    header, rows = rows_of(out_dir / "ttests_all.csv")
    assert len(rows) == 2 * len(score_names(lexicon))
    assert {r[0] for r in rows} == labels
    assert (out_dir / "ttests_mention.csv").exists()

    header, rows = rows_of(out_dir / "predictor_counts.csv")
    assert {r[0] for r in rows} == set(DEFAULT_CATEGORIES)
    assert all(int(r[1]) in (0, 1, 2) for r in rows)


def test_evaluate_parallel_matches_serial(tmp_path, suite_dir):
    serial, parallel = tmp_path / "serial", tmp_path / "parallel"
    assert _evaluate(suite_dir, serial) == 0
    assert _evaluate(suite_dir, parallel, "--jobs", "2") == 0
    for name in ("offsets.csv", "offsets_summary.csv", "ttests_all.csv",
                 "ttests_mention.csv", "predictor_counts.csv"):
        assert (serial / name).read_bytes() == (parallel / name).read_bytes()


def test_report_renders_svg_charts(tmp_path, suite_dir, capsys):
    eval_dir = tmp_path / "eval"
    assert _evaluate(suite_dir, eval_dir) == 0
    report_dir = tmp_path / "report"
    rc = main(["report", "--in-dir", str(eval_dir), "--out-dir", str(report_dir),
               "--input", str(suite_dir / "event_01.jsonl")])
    assert rc == 0
    assert "rendered 5 charts" in capsys.readouterr().out

    charts = sorted(report_dir.glob("*.svg"))
    assert len(charts) == 5
    names = {p.name for p in charts}
    assert {"fig_significance_all.svg", "fig_significance_mention.svg",
            "fig_offsets.svg", "fig_predictors.svg"} <= names
    for path in charts:
        root = ET.parse(path).getroot()
        assert root.tag.endswith("svg")

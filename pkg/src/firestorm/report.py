"""Static SVG charts over the evaluation CSV outputs.

Four chart families: per-category significance counts for the two
t-test scopes (diverging bars, "less" to the left), per-event start
offsets in hours, predictor relevance counts, and optional per-event
category series with detected change points marked. Everything is
rendered with fixed formatting so identical inputs give identical
bytes.
"""

from __future__ import annotations

import csv
from collections import Counter
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .changepoint import detect, standardize
from .corpus import bucketize, read_dataset
from .detector import DEFAULT_CATEGORIES, category_series_matrix
from .lexicon import load_demo_lexicon, load_lexicon

__all__ = ["render_report"]

_FONT = "font-family=\"sans-serif\""
_AXIS = "#777777"
_LESS = "#c0504d"
_MORE = "#4f81bd"
_SERIES_COLORS = ("#4f81bd", "#c0504d", "#9bbb59", "#8064a2", "#f79646", "#4bacc6")


def _num(x: float) -> str:
    """Fixed two-decimal coordinate so output bytes are stable."""
    return f"{x:.2f}"


class _Svg:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        ]

    def line(self, x1, y1, x2, y2, color, width=1.0, dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}" '
            f'stroke="{color}" stroke-width="{_num(width)}"{extra}/>'
        )

    def rect(self, x, y, w, h, color):
        self.parts.append(
            f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num(w)}" '
            f'height="{_num(h)}" fill="{color}"/>'
        )

    def text(self, x, y, content, size=11, anchor="start", color="#000000"):
        self.parts.append(
            f'<text x="{_num(x)}" y="{_num(y)}" font-size="{size}" {_FONT} '
            f'text-anchor="{anchor}" fill="{color}">{escape(str(content))}</text>'
        )

    def polyline(self, points, color, width=1.2):
        coords = " ".join(f"{_num(x)},{_num(y)}" for x, y in points)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{_num(width)}"/>'
        )

    def write(self, path) -> None:
        self.parts.append("</svg>")
        Path(path).write_text("\n".join(self.parts) + "\n", encoding="utf-8")


def _read_csv(path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _diverging_bars(title, rows, path) -> None:
    """Horizontal bars: (label, left count, right count) per row."""
    row_h, top, left_w = 22, 48, 110
    plot_w = 420
    height = top + row_h * len(rows) + 30
    width = left_w + plot_w + 30
    svg = _Svg(width, height)
    svg.text(12, 24, title, size=14)
    svg.text(left_w + plot_w / 4, 40, "less", anchor="middle", color=_LESS)
    svg.text(left_w + 3 * plot_w / 4, 40, "more", anchor="middle", color=_MORE)
    limit = max([max(l, r) for _, l, r in rows], default=0) or 1
    mid = left_w + plot_w / 2
    scale = (plot_w / 2 - 10) / limit
    for i, (label, n_less, n_more) in enumerate(rows):
        y = top + i * row_h
        svg.text(left_w - 8, y + row_h - 8, label, anchor="end")
        if n_less:
            svg.rect(mid - n_less * scale, y + 4, n_less * scale, row_h - 10, _LESS)
            svg.text(mid - n_less * scale - 4, y + row_h - 8, n_less, anchor="end",
                     color=_LESS)
        if n_more:
            svg.rect(mid, y + 4, n_more * scale, row_h - 10, _MORE)
            svg.text(mid + n_more * scale + 4, y + row_h - 8, n_more, color=_MORE)
    svg.line(mid, top - 4, mid, top + row_h * len(rows), _AXIS)
    svg.write(path)


def _significance_chart(rows: list[dict], title: str, path) -> None:
    less: Counter = Counter()
    more: Counter = Counter()
    order: list[str] = []
    for row in rows:
        cat = row["category"]
        if cat not in order:
            order.append(cat)
        if row["significant"] == "true":
            (more if row["direction"] == "more" else less)[cat] += 1
    bars = [(cat, less[cat], more[cat]) for cat in order]
    _diverging_bars(title, bars, path)


def _offsets_chart(rows: list[dict], path) -> None:
    row_h, top, left_w = 18, 40, 130
    plot_w = 420
    height = top + row_h * len(rows) + 30
    width = left_w + plot_w + 30
    svg = _Svg(width, height)
    svg.text(12, 24, "Start offset of the closest change point (hours)", size=14)
    offsets = []
    for row in rows:
        raw = row["offset_start_hours"]
        offsets.append(float(raw) if raw else None)
    limit = max((abs(o) for o in offsets if o is not None), default=0.0) or 1.0
    mid = left_w + plot_w / 2
    scale = (plot_w / 2 - 10) / limit
    svg.line(mid, top - 4, mid, top + row_h * len(rows), _AXIS)
    for i, (row, offset) in enumerate(zip(rows, offsets)):
        y = top + i * row_h
        svg.text(left_w - 8, y + row_h - 5, row["label"], anchor="end", size=10)
        if offset is None:
            svg.text(mid, y + row_h - 5, "no change points", anchor="middle",
                     size=10, color=_AXIS)
            continue
        color = _LESS if offset < 0 else _MORE
        x = mid + offset * scale
        svg.rect(min(mid, x), y + 4, abs(offset) * scale or 0.5, row_h - 8, color)
        svg.text(x + (4 if offset >= 0 else -4), y + row_h - 5, f"{offset:+.1f}",
                 anchor="start" if offset >= 0 else "end", size=10, color=color)
    svg.write(path)


def _predictor_chart(rows: list[dict], path) -> None:
    counts = [(row["category"], int(row["count"])) for row in rows]
    counts.sort(key=lambda item: -item[1])
    row_h, top, left_w = 20, 40, 110
    plot_w = 420
    height = top + row_h * len(counts) + 30
    width = left_w + plot_w + 40
    svg = _Svg(width, height)
    svg.text(12, 24, "Events with a change point near the start, per category", size=14)
    limit = max((c for _, c in counts), default=0) or 1
    scale = (plot_w - 10) / limit
    for i, (cat, count) in enumerate(counts):
        y = top + i * row_h
        svg.text(left_w - 8, y + row_h - 6, cat, anchor="end")
        if count:
            svg.rect(left_w, y + 4, count * scale, row_h - 8, _MORE)
        svg.text(left_w + count * scale + 5, y + row_h - 6, count, color=_MORE)
    svg.write(path)


def _series_chart(ds, lexicon, categories: Sequence[str], path) -> None:
    """Standardized per-slice category series with change points marked."""
    series = category_series_matrix(bucketize(ds), lexicon, categories)
    top, left, plot_w, plot_h, gap = 36, 60, 640, 70, 16
    names = list(series)
    height = top + len(names) * (plot_h + gap) + 20
    width = left + plot_w + 30
    svg = _Svg(width, height)
    svg.text(12, 22, f"Category series with change points: {ds.label}", size=14)
    n = ds.n_slices
    for k, name in enumerate(names):
        y0 = top + k * (plot_h + gap)
        values = standardize(series[name].values)
        result = detect(values)
        lo, hi = float(values.min()), float(values.max())
        span = (hi - lo) or 1.0

        def sx(t):
            return left + t * plot_w / max(n - 1, 1)

        def sy(v):
            return y0 + plot_h - (v - lo) / span * plot_h

        svg.text(left - 8, y0 + plot_h / 2, name, anchor="end")
        svg.line(left, y0 + plot_h, left + plot_w, y0 + plot_h, _AXIS, 0.5)
        color = _SERIES_COLORS[k % len(_SERIES_COLORS)]
        svg.polyline([(sx(t), sy(values[t])) for t in range(n)], color)
        for cp in result.changepoints:
            svg.line(sx(cp), y0, sx(cp), y0 + plot_h, "#333333", 0.8, dash="3,2")
    svg.write(path)


def _safe_name(label: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in label)


def render_report(
    in_dir,
    out_dir,
    datasets: Sequence[str] = (),
    lexicon_path: str | None = None,
    categories: Sequence[str] | None = None,
) -> list[Path]:
    """Render every chart the evaluation CSVs in ``in_dir`` support."""
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    sources = [
        ("ttests_all.csv", "fig_significance_all.svg",
         lambda rows, path: _significance_chart(
             rows, "Significant category differences, all tweets", path)),
        ("ttests_mention.csv", "fig_significance_mention.svg",
         lambda rows, path: _significance_chart(
             rows, "Significant category differences, mention-network tweets", path)),
        ("offsets.csv", "fig_offsets.svg", _offsets_chart),
        ("predictor_counts.csv", "fig_predictors.svg", _predictor_chart),
    ]
    for filename, out_name, render in sources:
        source = in_dir / filename
        if not source.exists():
            continue
        rows = _read_csv(source)
        if not rows:
            continue
        out_path = out_dir / out_name
        render(rows, out_path)
        written.append(out_path)

    if datasets:
        lexicon = load_lexicon(lexicon_path) if lexicon_path else load_demo_lexicon()
        cats = tuple(categories) if categories else DEFAULT_CATEGORIES
        for path in datasets:
            ds = read_dataset(path)
            out_path = out_dir / f"fig_series_{_safe_name(ds.label)}.svg"
            _series_chart(ds, lexicon, cats, out_path)
            written.append(out_path)
    return written

"""CSV and SVG writers, and aggregation of result CSVs into a summary table."""

from __future__ import annotations

import csv
import glob
import math
import os
from collections import OrderedDict
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return str(v)
    return str(v)


def write_rows(path: str, rows: Sequence[Mapping], fieldnames: Sequence[str] | None = None) -> str:
    """Write dict rows with a stable column order; floats use repr so reruns are byte-identical."""
    if fieldnames is None:
        fieldnames = []
        for row in rows:
            for k in row:
                if k not in fieldnames:
                    fieldnames.append(k)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(fieldnames)
        for row in rows:
            wr.writerow([_fmt(row.get(k, "")) for k in fieldnames])
    return path


def read_rows(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def summarize(paths: Iterable[str]) -> list[dict]:
    """One row per tag: how many rows were checked and how many passed."""
    table: "OrderedDict[str, dict]" = OrderedDict()
    for path in sorted(paths):
        for row in read_rows(path):
            tag = row.get("tag")
            if not tag or "passed" not in row:
                continue
            entry = table.setdefault(tag, {"tag": tag, "rows": 0, "passed": 0, "sources": set()})
            entry["rows"] += 1
            entry["passed"] += row["passed"].strip().lower() == "true"
            entry["sources"].add(os.path.basename(path))
    out = []
    for tag in sorted(table):
        e = table[tag]
        out.append({"tag": tag, "rows": e["rows"], "passed_rows": e["passed"],
                    "all_passed": e["rows"] == e["passed"], "sources": ";".join(sorted(e["sources"]))})
    return out


def collect_csvs(directory: str) -> list[str]:
    return [p for p in glob.glob(os.path.join(directory, "*.csv")) if os.path.basename(p) != "summary.csv"]


def write_svg_plot(path: str, series: Mapping[str, tuple[Sequence[float], Sequence[float]]], title: str,
                   xlabel: str, ylabel: str, logx: bool = True, logy: bool = True) -> str:
    """Standalone line plot; the plotted data is embedded as an XML comment."""
    W, H, M = 640, 420, 60
    tx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    ty = (lambda v: math.log10(v)) if logy else (lambda v: v)
    pts = {name: [(tx(x), ty(y)) for x, y in zip(xs, ys) if (x > 0 or not logx) and (y > 0 or not logy)]
           for name, (xs, ys) in series.items()}
    allx = [p[0] for v in pts.values() for p in v] or [0.0, 1.0]
    ally = [p[1] for v in pts.values() for p in v] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def px(x):
        return M + (x - x0) / (x1 - x0) * (W - 2 * M)

    def py(y):
        return H - M - (y - y0) / (y1 - y0) * (H - 2 * M)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}">', "<!-- data"]
    for name, (xs, ys) in series.items():
        lines.append(f"{name}: " + " ".join(f"({_fmt(float(x))},{_fmt(float(y))})" for x, y in zip(xs, ys)))
    lines.append("-->")
    lines.append(f'<rect x="{M}" y="{M}" width="{W - 2 * M}" height="{H - 2 * M}" fill="none" stroke="black"/>')
    lines.append(f'<text x="{W / 2}" y="{M / 2}" text-anchor="middle">{title}</text>')
    lines.append(f'<text x="{W / 2}" y="{H - 15}" text-anchor="middle">{xlabel}{" (log10)" if logx else ""}</text>')
    lines.append(f'<text x="15" y="{H / 2}" transform="rotate(-90 15 {H / 2})" text-anchor="middle">'
                 f'{ylabel}{" (log10)" if logy else ""}</text>')
    for frac in (0.0, 0.5, 1.0):
        xv, yv = x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)
        lines.append(f'<text x="{px(xv):.1f}" y="{H - M + 15}" text-anchor="middle" font-size="10">{xv:.3g}</text>')
        lines.append(f'<text x="{M - 5}" y="{py(yv):.1f}" text-anchor="end" font-size="10">{yv:.3g}</text>')
    for i, (name, p) in enumerate(pts.items()):
        c = colors[i % len(colors)]
        if p:
            d = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in p)
            lines.append(f'<polyline fill="none" stroke="{c}" points="{d}"/>')
        lines.append(f'<text x="{W - M + 5}" y="{M + 15 * (i + 1)}" fill="{c}" font-size="10">{name}</text>')
    lines.append("</svg>")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path

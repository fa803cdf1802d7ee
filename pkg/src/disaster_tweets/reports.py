"""Deterministic CSV/JSON writers and optional SVG charts for analytics and evaluation output.

Files are UTF-8 with LF line endings and RFC-4180 quoting. Floats are written
with a fixed number of decimals so identical inputs give identical bytes, and
undefined metric cells are written as an em dash rather than 0 or NaN.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import analytics as an
from .corpus import Dataset, Registry

UNDEFINED_CELL = "\u2014"
FLOAT_DECIMALS = 6

TYPE_FIGURES = {"proportions": "fig2", "needs": "fig3", "attitude": "fig4", "daily": "fig5"}
HURRICANE_FIGURES = {"proportions": "fig6", "needs": "fig7", "attitude": "fig8", "daily": "fig9"}


def format_cell(value: Any) -> str:
    if value is None:
        return UNDEFINED_CELL
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return UNDEFINED_CELL
        return f"{value:.{FLOAT_DECIMALS}f}"
    if isinstance(value, (dt.date, dt.datetime)):
        return value.isoformat()
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any] | dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(header)
    for row in rows:
        if isinstance(row, dict):
            row = [row.get(h) for h in header]
        w.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode("utf-8"))
    return path


def write_csv(path: str | Path, header: Sequence[str], rows) -> Path:
    return write_text(Path(path), csv_text(header, rows))


def _jsonable(obj):
    if isinstance(obj, float):
        return None if math.isnan(obj) else round(obj, FLOAT_DECIMALS)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (dt.date, dt.datetime)):
        return obj.isoformat()
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def write_json(path: str | Path, doc: Any) -> Path:
    return write_text(Path(path), json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


# --- analytics tables ----------------------------------------------------------

def proportions_rows(group: Sequence[Dataset]) -> list[dict]:
    table = an.proportions_by_disaster(group)
    rows = []
    for ds, row in zip(group, table.rows()):
        labels = [t.label for t in ds.tweets if t.label is not None]
        neg = labels.count(1)
        rows.append({"disaster_id": row["key"], "name": ds.spec.name, "count": row["count"],
                     "share": row["share"], "percent": table.percent(row["key"]),
                     "positive": labels.count(0), "negative": neg,
                     "negative_share": neg / len(labels) if labels else None})
    return rows


PROPORTION_HEADER = ("disaster_id", "name", "count", "share", "percent", "positive",
                     "negative", "negative_share")
NEED_HEADER = ("disaster_id", "need", "count", "share")
ATTITUDE_HEADER = ("need", "sentiment", "count", "share", "need_negative_share")
DAILY_HEADER = ("day", "count", "in_duration", "phase")


def need_rows(group: Sequence[Dataset]) -> list[dict]:
    rows = []
    for ds in group:
        for r in an.need_breakdown(ds).rows():
            rows.append({"disaster_id": ds.disaster_id, "need": r["key"],
                         "count": r["count"], "share": r["share"]})
    return rows


def attitude_rows(ds: Dataset) -> list[dict]:
    return [{"need": r["need"], "sentiment": r["sentiment"], "count": r["count"],
             "share": r["share"], "need_negative_share": r["need_negative_share"]}
            for r in an.attitude_by_need(ds).rows()]


def daily_rows(ds: Dataset) -> tuple[list[dict], dict]:
    table = an.daily_volume(ds)
    rows = [{"day": r["key"], "count": r["count"], "in_duration": r["in_duration"],
             "phase": r["phase"]} for r in table.rows()]
    return rows, dict(table.notes)


def _short(disaster_id: str) -> str:
    return disaster_id.split("_")[0]


def write_group_report(group: Sequence[Dataset], out_dir: str | Path, figures: dict[str, str],
                       plots: bool = False) -> dict[str, Any]:
    """Write the four figure tables for one disaster group; returns a summary dict."""
    out = Path(out_dir)
    written = []
    summary: dict[str, Any] = {"disasters": {}}
    written.append(write_csv(out / f"{figures['proportions']}.csv", PROPORTION_HEADER,
                             proportions_rows(group)))
    written.append(write_csv(out / f"{figures['needs']}.csv", NEED_HEADER, need_rows(group)))
    for ds in group:
        sid = _short(ds.disaster_id)
        entry: dict[str, Any] = {"n_tweets": len(ds)}
        try:
            written.append(write_csv(out / f"{figures['attitude']}_{sid}.csv", ATTITUDE_HEADER,
                                     attitude_rows(ds)))
            entry["most_negative_need"] = an.most_negative_need(an.attitude_by_need(ds))
        except ValueError as exc:
            entry["attitude_error"] = str(exc)
        rows, notes = daily_rows(ds)
        written.append(write_csv(out / f"{figures['daily']}_{sid}.csv", DAILY_HEADER, rows))
        entry.update(notes)
        entry["phase_totals"] = an.phase_totals(an.daily_volume(ds))
        entry["modal_need"] = an.need_breakdown(ds).modal()
        summary["disasters"][ds.disaster_id] = entry
        if plots:
            written.extend(plot_daily(rows, out / f"{figures['daily']}_{sid}.svg", ds.spec.name))
    if plots:
        written.extend(plot_bars([r["name"] for r in proportions_rows(group)],
                                 [r["share"] for r in proportions_rows(group)],
                                 out / f"{figures['proportions']}.svg", "share of tweets"))
    summary["files"] = sorted(p.name for p in written)
    return summary


def write_analytics_bundle(datasets: dict[str, Dataset], registry: Registry, out_dir: str | Path,
                           plots: bool = False) -> dict[str, Any]:
    """Reports for every registry group whose members are all loaded, plus per-disaster tables
    for datasets outside any complete group."""
    out = Path(out_dir)
    summary: dict[str, Any] = {}
    covered = set()
    for group_name, figures in (("types", TYPE_FIGURES), ("hurricanes", HURRICANE_FIGURES)):
        ids = registry.groups.get(group_name, ())
        if ids and all(i in datasets for i in ids):
            summary[group_name] = write_group_report([datasets[i] for i in ids], out, figures, plots)
            covered.update(ids)
    rest = [datasets[i] for i in datasets if i not in covered]
    if rest:
        summary["single"] = write_group_report(
            rest, out, {"proportions": "proportions", "needs": "needs",
                        "attitude": "attitude", "daily": "daily"}, plots)
    write_json(out / "analytics_summary.json", summary)
    return summary


# --- evaluation tables ---------------------------------------------------------

METRIC_KEYS = ("acc", "precision_0", "recall_0", "f1_0", "precision_1", "recall_1", "f1_1",
               "tp", "tn", "fp", "fn")
GRID_HEADER = ("family", "cell", "fold", "config", "best") + METRIC_KEYS
BENCH_HEADER = ("disaster_id", "family", "accuracy", "auc")
TIMING_HEADER = ("disaster_id", "family", "fit_seconds", "predict_seconds", "total_seconds")


def write_grid_table(path, result) -> Path:
    return write_csv(path, GRID_HEADER, result.table())


def metrics_row(report, **keys) -> dict:
    row = dict(keys)
    row.update(report.row())
    return row


def write_benchmark(out_dir, records, plots: bool = False) -> list[Path]:
    """Accuracy/AUC go to benchmark.csv; wall-clock times to timings.csv, which
    is the only output that varies from run to run."""
    out = Path(out_dir)
    paths = [write_csv(out / "benchmark.csv", BENCH_HEADER,
                       [{"disaster_id": r.disaster_id, "family": r.family, "accuracy": r.accuracy,
                         "auc": r.auc} for r in records]),
             write_csv(out / "timings.csv", TIMING_HEADER,
                       [{"disaster_id": r.disaster_id, "family": r.family,
                         "fit_seconds": r.fit_seconds, "predict_seconds": r.predict_seconds,
                         "total_seconds": r.total_seconds} for r in records])]
    if plots:
        paths.extend(plot_bars([f"{r.family}" for r in records], [r.total_seconds for r in records],
                               out / "timings.svg", "seconds (fit + predict)"))
    return paths


def write_roc(path, curve) -> Path:
    return write_csv(path, ("fpr", "tpr", "threshold"),
                     zip(curve.fpr.tolist(), curve.tpr.tolist(),
                         [None if math.isinf(t) else t for t in curve.thresholds.tolist()]))


# --- optional SVG charts -------------------------------------------------------

def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "disaster-tweets"
    return plt


def _save_svg(fig, path: Path) -> list[Path]:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    fig.clf()
    return [path]


def plot_bars(labels: Sequence[str], values: Sequence[float], path: Path, ylabel: str) -> list[Path]:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(range(len(values)), values, color="#4c72b0")
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    paths = _save_svg(fig, path)
    plt.close(fig)
    return paths


def plot_daily(rows: list[dict], path: Path, title: str) -> list[Path]:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 3.5))
    x = list(range(len(rows)))
    counts = [r["count"] for r in rows]
    inside = [c if r["in_duration"] else None for c, r in zip(counts, rows)]
    ax.plot(x, counts, color="#1f77b4", label="before/after")
    ax.plot(x, [float("nan") if v is None else v for v in inside], color="#d62728", label="during")
    ax.set_title(title)
    ax.set_ylabel("tweets per day")
    ax.legend()
    fig.tight_layout()
    paths = _save_svg(fig, path)
    plt.close(fig)
    return paths


def plot_roc(curves: dict[str, Any], path: Path) -> list[Path]:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    for name, c in curves.items():
        ax.plot(c.fpr, c.tpr, label=f"{name} (AUC {c.auc:.2f})")
    ax.plot([0, 1], [0, 1], color="grey", linestyle="--")
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    paths = _save_svg(fig, path)
    plt.close(fig)
    return paths

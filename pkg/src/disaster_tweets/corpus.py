"""Labeled disaster tweet corpora: data model, CSV ingestion and partitioning."""
from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from ._random import stream

NEED_CATEGORIES = ("housing", "transportation", "food", "medical_supplies")
DISASTER_TYPES = ("tornado", "hurricane", "flood", "blizzard", "wildfire")
CANONICAL_HEADER = ("id", "text", "timestamp", "disaster_id", "need_category", "label")
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


class CorpusError(ValueError):
    """Raised for unreadable or structurally invalid corpus files."""


@dataclass(frozen=True)
class Tweet:
    id: str
    text: str
    timestamp: dt.datetime | None
    disaster_id: str
    need_category: str | None
    label: int | None = None

    def __post_init__(self):
        if self.label is not None and self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")
        if not self.text.strip():
            raise ValueError(f"tweet {self.id!r} has empty text")
        if self.need_category is not None and self.need_category not in NEED_CATEGORIES:
            raise ValueError(f"unknown need category {self.need_category!r}")


@dataclass(frozen=True)
class DisasterSpec:
    disaster_id: str
    name: str
    disaster_type: str
    duration_start: dt.date
    duration_end: dt.date
    window_start: dt.date
    window_end: dt.date
    keywords: tuple[str, ...]
    aliases: tuple[str, ...] = ()

    def __post_init__(self):
        if self.disaster_type not in DISASTER_TYPES:
            raise ValueError(f"unknown disaster type {self.disaster_type!r}")
        if not (self.window_start <= self.duration_start <= self.duration_end <= self.window_end):
            raise ValueError(f"{self.disaster_id}: window must enclose the duration")

    def in_window(self, when: dt.datetime | dt.date) -> bool:
        day = when.date() if isinstance(when, dt.datetime) else when
        return self.window_start <= day <= self.window_end

    def in_duration(self, when: dt.datetime | dt.date) -> bool:
        day = when.date() if isinstance(when, dt.datetime) else when
        return self.duration_start <= day <= self.duration_end


@dataclass(frozen=True)
class Registry:
    disasters: dict[str, DisasterSpec]
    groups: dict[str, tuple[str, ...]]

    def __getitem__(self, disaster_id: str) -> DisasterSpec:
        return self.disasters[disaster_id]

    def __iter__(self) -> Iterator[DisasterSpec]:
        return iter(self.disasters.values())

    def __len__(self) -> int:
        return len(self.disasters)

    def ids(self) -> list[str]:
        return list(self.disasters)


def load_registry(path: str | Path | None = None) -> Registry:
    """Read the disaster registry; the shipped one lists all nine disasters."""
    if path is None:
        text = resources.files("disaster_tweets.data").joinpath("disasters.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    doc = json.loads(text)
    disasters = {}
    for d in doc["disasters"]:
        ds, de = (dt.date.fromisoformat(s) for s in d["duration"])
        ws, we = (dt.date.fromisoformat(s) for s in d["window"])
        spec = DisasterSpec(d["disaster_id"], d["name"], d["disaster_type"], ds, de, ws, we,
                            tuple(d["keywords"]), tuple(d.get("aliases", ())))
        disasters[spec.disaster_id] = spec
    groups = {name: tuple(ids) for name, ids in doc.get("groups", {}).items()}
    for name, ids in groups.items():
        missing = set(ids) - set(disasters)
        if missing:
            raise CorpusError(f"group {name!r} references unknown disasters {sorted(missing)}")
    return Registry(disasters, groups)


@dataclass
class LoadReport:
    path: str
    n_rows: int = 0
    n_loaded: int = 0
    bad_label: int = 0
    bad_timestamp: int = 0
    empty_text: int = 0
    bad_need: int = 0
    unknown_need: int = 0
    outside_window: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)

    def summary(self) -> str:
        return (f"{self.path}: {self.n_loaded}/{self.n_rows} rows loaded, "
                f"{len(self.rejected)} rejected (bad_label={self.bad_label}, "
                f"empty_text={self.empty_text}, bad_need={self.bad_need}), "
                f"{self.bad_timestamp} without timestamp, {self.outside_window} outside window")


@dataclass(frozen=True)
class Dataset:
    spec: DisasterSpec
    tweets: tuple[Tweet, ...]
    report: LoadReport | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for t in self.tweets:
            if t.disaster_id != self.spec.disaster_id:
                raise ValueError(f"tweet {t.id!r} belongs to {t.disaster_id!r}, "
                                 f"not {self.spec.disaster_id!r}")

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self) -> Iterator[Tweet]:
        return iter(self.tweets)

    def __getitem__(self, i: int) -> Tweet:
        return self.tweets[i]

    @property
    def disaster_id(self) -> str:
        return self.spec.disaster_id

    def labels(self) -> np.ndarray:
        """Labels as an int array; raises if any tweet is unlabeled."""
        if any(t.label is None for t in self.tweets):
            raise ValueError(f"{self.disaster_id}: dataset contains unlabeled tweets")
        return np.fromiter((t.label for t in self.tweets), dtype=np.int64, count=len(self.tweets))

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return Dataset(self.spec, tuple(self.tweets[i] for i in indices))

    def outside_window(self) -> list[bool]:
        """Flag per tweet: timestamp known and outside the collection window."""
        return [t.timestamp is not None and not self.spec.in_window(t.timestamp) for t in self.tweets]


# --- canonical CSV -----------------------------------------------------------

def _parse_canonical_timestamp(s: str) -> dt.datetime | None:
    return dt.datetime.strptime(s, TIMESTAMP_FORMAT).replace(tzinfo=dt.timezone.utc)


def format_timestamp(ts: dt.datetime | None) -> str:
    if ts is None:
        return ""
    if ts.tzinfo is not None:
        ts = ts.astimezone(dt.timezone.utc)
    return ts.strftime(TIMESTAMP_FORMAT)


def _normalize_header(row: Sequence[str]) -> tuple[str, ...]:
    return tuple(c.strip().lstrip("﻿").strip().lower() for c in row)


def load_dataset(path: str | Path, spec: DisasterSpec) -> Dataset:
    """Load a canonical-schema CSV for one disaster.

    Rows with an invalid label, empty text or unknown need category are
    rejected and recorded in ``dataset.report``; unparseable timestamps are
    kept as ``None``.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus file not found: {path}")
    raw = path.read_text(encoding="utf-8")
    if not raw.strip():
        raise CorpusError(f"{path}: empty file")
    reader = csv.reader(io.StringIO(raw, newline=""))
    header = _normalize_header(next(reader))
    if header != CANONICAL_HEADER:
        raise CorpusError(f"{path}: malformed header {header!r}, expected {CANONICAL_HEADER!r}")

    report = LoadReport(str(path))
    tweets = []
    for row in reader:
        if not row:
            continue
        report.n_rows += 1
        line = reader.line_num
        if len(row) != len(CANONICAL_HEADER):
            report.rejected.append((line, f"expected {len(CANONICAL_HEADER)} fields, got {len(row)}"))
            continue
        tid, text, ts_raw, disaster_id, need, label_raw = row
        label_raw = label_raw.strip()
        if label_raw == "":
            label = None
        elif label_raw in ("0", "1"):
            label = int(label_raw)
        else:
            report.bad_label += 1
            report.rejected.append((line, f"label {label_raw!r} not in {{0,1}}"))
            continue
        if not text.strip():
            report.empty_text += 1
            report.rejected.append((line, "empty text"))
            continue
        need = need.strip() or None
        if need is not None and need not in NEED_CATEGORIES:
            report.bad_need += 1
            report.rejected.append((line, f"need category {need!r}"))
            continue
        if need is None:
            report.unknown_need += 1
        if disaster_id.strip() != spec.disaster_id:
            report.rejected.append((line, f"disaster_id {disaster_id!r} != {spec.disaster_id!r}"))
            continue
        ts = None
        if ts_raw.strip():
            try:
                ts = _parse_canonical_timestamp(ts_raw.strip())
            except ValueError:
                ts = None
        if ts is None:
            report.bad_timestamp += 1
        elif not spec.in_window(ts):
            report.outside_window += 1
        tweets.append(Tweet(tid, text, ts, spec.disaster_id, need, label))
    report.n_loaded = len(tweets)
    return Dataset(spec, tuple(tweets), report)


def _quote(value: str, always: bool = False) -> str:
    if always or any(c in value for c in ',"\n\r'):
        return '"' + value.replace('"', '""') + '"'
    return value


def dumps_dataset(ds: Dataset) -> str:
    """Serialize to canonical CSV (LF line endings, text always quoted)."""
    lines = [",".join(CANONICAL_HEADER)]
    for t in ds.tweets:
        lines.append(",".join([
            _quote(t.id),
            _quote(t.text, always=True),
            format_timestamp(t.timestamp),
            _quote(t.disaster_id),
            t.need_category or "",
            "" if t.label is None else str(t.label),
        ]))
    return "\n".join(lines) + "\n"


def write_dataset(ds: Dataset, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_dataset(ds).encode("utf-8"))


# --- adapter for the published dataset layout --------------------------------

_TEXT_COLS = ("text", "tweet", "tweets", "content", "tweet_text", "full_text")
_TIME_COLS = ("timestamp", "date", "datetime", "created_at", "time", "date_time", "created")
_LABEL_COLS = ("label", "sentiment", "class", "polarity", "labels")
_ID_COLS = ("id", "tweet_id", "tweetid", "id_str")
_NEED_COLS = ("need_category", "need", "category", "keyword", "supply", "needs")

_NEED_PATTERNS = (
    ("housing", re.compile(r"\bhous(e|es|ing)\b|\bshelters?\b", re.I)),
    ("transportation", re.compile(r"\btransport(ation)?\b", re.I)),
    ("food", re.compile(r"\bfoods?\b", re.I)),
    ("medical_supplies", re.compile(r"\bmedical\b|\bmedicines?\b", re.I)),
)
_LABEL_WORDS = {"0": 0, "1": 1, "positive": 0, "pos": 0, "negative": 1, "neg": 1,
                "0.0": 0, "1.0": 1}
_TIME_FORMATS = ("%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%dT%H:%M:%SZ",
                 "%Y-%m-%d %H:%M", "%Y-%m-%d", "%m/%d/%Y %H:%M:%S", "%m/%d/%Y %H:%M",
                 "%m/%d/%Y", "%m/%d/%y %H:%M", "%m/%d/%y", "%a %b %d %H:%M:%S %z %Y",
                 "%Y-%m-%d %H:%M:%S%z", "%Y-%m-%dT%H:%M:%S%z")


def parse_loose_timestamp(s: str) -> dt.datetime | None:
    """Best-effort timestamp parsing for upstream files; result is UTC or None."""
    s = s.strip()
    if not s:
        return None
    for fmt in _TIME_FORMATS:
        try:
            ts = dt.datetime.strptime(s, fmt)
        except ValueError:
            continue
        if ts.tzinfo is None:
            return ts.replace(tzinfo=dt.timezone.utc)
        return ts.astimezone(dt.timezone.utc)
    return None


def infer_need(text: str) -> str | None:
    """First need category whose keyword occurs in ``text`` (by position)."""
    best = None
    for need, pat in _NEED_PATTERNS:
        m = pat.search(text)
        if m and (best is None or m.start() < best[0]):
            best = (m.start(), need)
    return best[1] if best else None


def _normalize_need(value: str) -> str | None:
    v = value.strip().lower().replace(" ", "_")
    if v in NEED_CATEGORIES:
        return v
    if v in ("medical", "medical_supply", "medicine"):
        return "medical_supplies"
    if v in ("house", "shelter"):
        return "housing"
    if v == "transport":
        return "transportation"
    return infer_need(value)


def _pick(header: Sequence[str], candidates: Sequence[str]) -> int | None:
    for c in candidates:
        if c in header:
            return header.index(c)
    return None


def load_published(path: str | Path, spec: DisasterSpec, encoding: str = "utf-8") -> Dataset:
    """Map one file of the published corpus onto the canonical data model.

    Columns are located by common names (``Tweet``/``text``, ``Date``,
    ``Sentiment``/``label`` ...). When the file carries no need column, the
    need category is inferred from the collection keyword found in the text;
    tweets where none is found keep ``need_category=None`` and are counted
    as ``unknown_need``. Only rows with a label outside the two classes or
    with empty text are rejected, so row totals stay comparable with the
    published counts.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus file not found: {path}")
    raw = path.read_bytes().decode(encoding, errors="replace")
    if not raw.strip():
        raise CorpusError(f"{path}: empty file")
    sample = raw[:4096]
    try:
        dialect = csv.Sniffer().sniff(sample, delimiters=",\t;")
    except csv.Error:
        dialect = csv.excel
    reader = csv.reader(io.StringIO(raw, newline=""), dialect)
    header = _normalize_header(next(reader))
    text_i = _pick(header, _TEXT_COLS)
    if text_i is None:
        raise CorpusError(f"{path}: no text column in header {header!r}")
    time_i = _pick(header, _TIME_COLS)
    label_i = _pick(header, _LABEL_COLS)
    id_i = _pick(header, _ID_COLS)
    need_i = _pick(header, _NEED_COLS)

    report = LoadReport(str(path))
    tweets = []
    for n, row in enumerate(reader):
        if not row or all(not c.strip() for c in row):
            continue
        report.n_rows += 1
        line = reader.line_num
        get = lambda i: row[i] if i is not None and i < len(row) else ""  # noqa: E731
        text = get(text_i)
        if not text.strip():
            report.empty_text += 1
            report.rejected.append((line, "empty text"))
            continue
        label_raw = get(label_i).strip().lower()
        if label_raw == "":
            label = None
        elif label_raw in _LABEL_WORDS:
            label = _LABEL_WORDS[label_raw]
        else:
            report.bad_label += 1
            report.rejected.append((line, f"label {label_raw!r}"))
            continue
        need = _normalize_need(get(need_i)) if need_i is not None else infer_need(text)
        if need is None:
            report.unknown_need += 1
        ts = parse_loose_timestamp(get(time_i))
        if ts is None:
            report.bad_timestamp += 1
        elif not spec.in_window(ts):
            report.outside_window += 1
        tid = get(id_i).strip() or f"{spec.disaster_id}-{n:06d}"
        tweets.append(Tweet(tid, text, ts, spec.disaster_id, need, label))
    report.n_loaded = len(tweets)
    return Dataset(spec, tuple(tweets), report)


def find_published_files(directory: str | Path, registry: Registry) -> dict[str, Path]:
    """Match data files in ``directory`` to disasters by filename alias."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {directory}")
    files = sorted(p for p in directory.rglob("*") if p.is_file()
                   and p.suffix.lower() in (".csv", ".tsv", ".txt"))
    found: dict[str, Path] = {}
    for spec in registry:
        hits = [p for p in files if any(a in p.name.lower() for a in spec.aliases)]
        if len(hits) > 1:
            raise CorpusError(f"{spec.disaster_id}: ambiguous files {[str(h) for h in hits]}")
        if hits:
            found[spec.disaster_id] = hits[0]
    return found


# --- partitioning ------------------------------------------------------------

@dataclass(frozen=True)
class FoldAssignment:
    k: int
    assignment: np.ndarray
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)

    def __iter__(self):
        for i in range(self.k):
            yield self.train_indices(i), self.test_indices(i)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _check_two_classes(labels: Sequence[int | None], what: str) -> None:
    present = {y for y in labels if y is not None}
    if present != {0, 1}:
        raise ValueError(f"{what}: need labeled tweets of both classes, found {sorted(present)}")


def split_indices(labels: Sequence[int | None], train_fraction: float, seed: int,
                  stratify: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Seeded train/test index split; both parts are returned in ascending order."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    n = len(labels)
    if n < 2:
        raise ValueError("need at least 2 samples to split")
    _check_two_classes(labels, "split_train_test")
    rng = stream(seed, "split")
    n_train = min(max(_round_half_up(train_fraction * n), 1), n - 1)
    if not stratify:
        perm = rng.permutation(n)
        train = np.sort(perm[:n_train])
    else:
        lab = np.array([-1 if y is None else y for y in labels])
        chosen = []
        classes = sorted(set(lab.tolist()))
        quota = {c: _round_half_up(train_fraction * np.sum(lab == c)) for c in classes}
        for c in classes:
            idx = np.flatnonzero(lab == c)
            chosen.append(rng.permutation(idx)[:quota[c]])
        train = np.sort(np.concatenate(chosen))
    mask = np.zeros(n, dtype=bool)
    mask[train] = True
    return train, np.flatnonzero(~mask)


def split_train_test(ds: Dataset, train_fraction: float = 0.30, seed: int = 0,
                     stratify: bool = False) -> tuple[Dataset, Dataset]:
    """Disjoint train/test partition with ``round(train_fraction * n)`` training tweets.

    The default fraction reproduces the 30% training share of the original
    protocol. Both parts keep file order.
    """
    train, test = split_indices([t.label for t in ds.tweets], train_fraction, seed, stratify)
    return ds.subset(train), ds.subset(test)


def stratified_fold_indices(labels: Sequence[int], k: int, seed: int) -> np.ndarray:
    """Per-sample fold index: each class is shuffled, then dealt round-robin.

    The dealing position carries over from one class to the next, so total
    fold sizes also differ by at most one.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    labels = np.asarray(labels)
    assignment = np.full(len(labels), -1, dtype=np.int64)
    pos = 0
    for c in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == c)
        if len(idx) < k:
            raise ValueError(f"class {c} has {len(idx)} members, fewer than k={k}")
        shuffled = stream(seed, "kfold", int(c)).permutation(idx)
        assignment[shuffled] = (pos + np.arange(len(shuffled))) % k
        pos = (pos + len(shuffled)) % k
    return assignment


def stratified_kfold(ds: Dataset, k: int = 5, seed: int = 0) -> FoldAssignment:
    labels = ds.labels()
    return FoldAssignment(k, stratified_fold_indices(labels, k, seed), seed)

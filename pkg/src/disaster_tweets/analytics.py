"""Descriptive breakdowns of labelled disaster corpora: corpus shares, sentiment
split, need categories, attitude by need and daily tweet volume."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import Any, Hashable, Sequence

from .corpus import NEED_CATEGORIES, Dataset

LABEL_NAMES = {0: "positive", 1: "negative"}
UNKNOWN_NEED = "unknown"


@dataclass(frozen=True)
class BreakdownTable:
    """Counts per key, with shares of ``total``.

    ``extra`` holds per-row columns beyond count/share (for instance the
    in-duration flag of a day) and ``notes`` table-level facts such as the
    number of tweets left out.
    """

    name: str
    keys: tuple[Hashable, ...]
    counts: tuple[int, ...]
    extra: dict[Hashable, dict[str, Any]] = field(default_factory=dict)
    notes: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.keys) != len(self.counts):
            raise ValueError("keys and counts differ in length")
        if any(c < 0 for c in self.counts):
            raise ValueError("negative count")

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def shares(self) -> tuple[float, ...]:
        t = self.total
        return tuple(c / t for c in self.counts) if t else tuple(0.0 for _ in self.counts)

    def count(self, key) -> int:
        return self.counts[self.keys.index(key)]

    def share(self, key) -> float:
        return self.shares[self.keys.index(key)]

    def percent(self, key) -> int:
        """Share in whole percent, rounded half up."""
        return int(self.share(key) * 100 + 0.5)

    def modal(self) -> Hashable:
        """Key with the largest count; the first listed wins ties."""
        return self.keys[max(range(len(self.keys)), key=lambda i: (self.counts[i], -i))]

    def rows(self) -> list[dict[str, Any]]:
        out = []
        for k, c, s in zip(self.keys, self.counts, self.shares):
            row = {"key": k, "count": c, "share": s}
            row.update(self.extra.get(k, {}))
            out.append(row)
        return out


def _labelled(ds: Dataset, what: str) -> list[int]:
    labels = [t.label for t in ds.tweets]
    if any(y is None for y in labels):
        raise ValueError(f"{what}: {ds.disaster_id} contains unlabeled tweets")
    return labels


def proportions_by_disaster(group: Sequence[Dataset], name: str = "proportions") -> BreakdownTable:
    if not group:
        raise ValueError("need at least one dataset")
    return BreakdownTable(name, tuple(d.disaster_id for d in group), tuple(len(d) for d in group))


def sentiment_proportions(ds: Dataset) -> BreakdownTable:
    labels = _labelled(ds, "sentiment_proportions")
    if not labels:
        raise ValueError("sentiment_proportions: no labelled tweets")
    return BreakdownTable(f"sentiment_{ds.disaster_id}", (0, 1),
                          (labels.count(0), labels.count(1)),
                          extra={0: {"sentiment": LABEL_NAMES[0]}, 1: {"sentiment": LABEL_NAMES[1]}})


def need_breakdown(ds: Dataset) -> BreakdownTable:
    """Tweets per need category; tweets with no recognised need form an extra row if present."""
    counts = {n: 0 for n in NEED_CATEGORIES}
    unknown = 0
    for t in ds.tweets:
        if t.need_category is None:
            unknown += 1
        else:
            counts[t.need_category] += 1
    keys, vals = list(counts), list(counts.values())
    if unknown:
        keys.append(UNKNOWN_NEED)
        vals.append(unknown)
    return BreakdownTable(f"needs_{ds.disaster_id}", tuple(keys), tuple(vals))


def attitude_by_need(ds: Dataset) -> BreakdownTable:
    """Need x sentiment crosstab; each row carries that need's negative share."""
    _labelled(ds, "attitude_by_need")
    cells = {(n, y): 0 for n in NEED_CATEGORIES for y in (0, 1)}
    skipped = 0
    for t in ds.tweets:
        if t.need_category is None:
            skipped += 1
            continue
        cells[(t.need_category, t.label)] += 1
    extra = {}
    for n in NEED_CATEGORIES:
        tot = cells[(n, 0)] + cells[(n, 1)]
        neg = cells[(n, 1)] / tot if tot else None
        for y in (0, 1):
            extra[(n, y)] = {"need": n, "sentiment": LABEL_NAMES[y], "need_negative_share": neg}
    return BreakdownTable(f"attitude_{ds.disaster_id}", tuple(cells), tuple(cells.values()),
                          extra, {"excluded_unknown_need": skipped})


def negative_share_by_need(table: BreakdownTable) -> dict[str, float | None]:
    return {n: table.extra[(n, 1)]["need_negative_share"] for n in NEED_CATEGORIES}


def most_negative_need(table: BreakdownTable) -> str | None:
    shares = {n: s for n, s in negative_share_by_need(table).items() if s is not None}
    if not shares:
        return None
    return max(NEED_CATEGORIES, key=lambda n: (shares.get(n, -1.0), -NEED_CATEGORIES.index(n)))


def daily_volume(ds: Dataset) -> BreakdownTable:
    """Tweets per UTC day over the collection window.

    Every window day gets a row, tagged with whether it lies inside the
    disaster duration. Tweets without a timestamp, or dated outside the window,
    are excluded and counted in ``notes``.
    """
    spec = ds.spec
    n_days = (spec.window_end - spec.window_start).days + 1
    days = [spec.window_start + dt.timedelta(days=i) for i in range(n_days)]
    counts = dict.fromkeys(days, 0)
    no_ts = outside = 0
    for t in ds.tweets:
        if t.timestamp is None:
            no_ts += 1
            continue
        ts = t.timestamp
        if ts.tzinfo is not None:
            ts = ts.astimezone(dt.timezone.utc)
        day = ts.date()
        if day in counts:
            counts[day] += 1
        else:
            outside += 1
    extra = {d: {"in_duration": spec.in_duration(d),
                 "phase": "before" if d < spec.duration_start else
                          "after" if d > spec.duration_end else "during"} for d in days}
    return BreakdownTable(f"daily_{ds.disaster_id}", tuple(days), tuple(counts.values()), extra,
                          {"excluded_no_timestamp": no_ts, "excluded_outside_window": outside})


def phase_totals(table: BreakdownTable) -> dict[str, int]:
    """Sum a daily-volume table into before/during/after totals."""
    out = {"before": 0, "during": 0, "after": 0}
    for k, c in zip(table.keys, table.counts):
        out[table.extra[k]["phase"]] += c
    return out

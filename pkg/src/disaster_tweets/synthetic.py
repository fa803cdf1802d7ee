"""Seeded synthetic corpora for tests, demos and determinism checks.

Two generators: a two-class corpus with disjoint vocabularies (every learner
should separate it) and a noisier tweet-like corpus shaped after a registered
disaster, with URLs, mentions, hashtags and timestamps spread over the
collection window.
"""
from __future__ import annotations

import datetime as dt

import numpy as np

from ._random import stream
from .corpus import NEED_CATEGORIES, Dataset, DisasterSpec, Tweet

POSITIVE_WORDS = ("shelter", "rescue", "volunteer", "donate", "thanks",
                  "helpful", "safe", "support", "relief", "grateful")
NEGATIVE_WORDS = ("stranded", "empty", "flooded", "shortage", "waiting",
                  "ignored", "trapped", "hungry", "outage", "desperate")

SYNTHETIC_SPEC = DisasterSpec(
    disaster_id="synthetic", name="Synthetic", disaster_type="hurricane",
    duration_start=dt.date(2020, 1, 8), duration_end=dt.date(2020, 1, 14),
    window_start=dt.date(2020, 1, 1), window_end=dt.date(2020, 1, 21),
    keywords=("synthetic housing", "synthetic transportation", "synthetic food",
              "synthetic medical supplies"))


def separable_corpus(n_docs: int = 200, seed: int = 0, words_per_doc: int = 6,
                     spec: DisasterSpec = SYNTHETIC_SPEC) -> Dataset:
    """Balanced corpus where class 0 and class 1 documents share no word."""
    rng = stream(seed, "separable")
    labels = np.r_[np.zeros(n_docs // 2, dtype=int), np.ones(n_docs - n_docs // 2, dtype=int)]
    rng.shuffle(labels)
    start = dt.datetime.combine(spec.window_start, dt.time(), tzinfo=dt.timezone.utc)
    span = (spec.window_end - spec.window_start).days * 86400
    tweets = []
    for i, y in enumerate(labels):
        pool = NEGATIVE_WORDS if y else POSITIVE_WORDS
        words = rng.choice(pool, size=words_per_doc, replace=False)
        ts = start + dt.timedelta(seconds=int(rng.integers(span)))
        tweets.append(Tweet(f"s{i:05d}", " ".join(words), ts, spec.disaster_id,
                            NEED_CATEGORIES[i % 4], int(y)))
    return Dataset(spec, tuple(tweets))


_NEED_WORDS = {
    "housing": ("housing", "shelter", "home", "roof", "apartment", "motel"),
    "transportation": ("transportation", "road", "bus", "traffic", "highway", "evacuation route"),
    "food": ("food", "water", "meals", "groceries", "pantry", "supplies"),
    "medical_supplies": ("medical supplies", "medicine", "insulin", "clinic", "first aid", "pharmacy"),
}
_POSITIVE_PHRASES = ("thank you", "great job", "so grateful for", "volunteers delivered",
                     "donations arriving", "amazing support with", "finally got", "helping with")
_NEGATIVE_PHRASES = ("still no", "nobody brought", "desperate for", "ran out of",
                     "waiting hours for", "no help with", "cannot find", "stuck without")
_FILLER = ("today", "tonight", "please", "everyone", "our town", "downtown", "near the river",
           "after the storm", "right now", "again")


def disaster_corpus(spec: DisasterSpec, n_tweets: int = 400, seed: int = 0,
                    negative_share: float = 0.6, label_noise: float = 0.05,
                    need_weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)
                    ) -> Dataset:
    """Tweet-like labelled corpus for ``spec``: sentiment phrases, need words and noise.

    About 70% of timestamps fall inside the duration, the rest elsewhere in the window.
    """
    rng = stream(seed, "disaster-corpus", spec.disaster_id)
    needs = rng.choice(len(NEED_CATEGORIES), size=n_tweets, p=np.asarray(need_weights) / sum(need_weights))
    labels = (rng.random(n_tweets) < negative_share).astype(int)
    flips = rng.random(n_tweets) < label_noise
    tag = spec.name.lower().replace(" ", "")
    dur_days = (spec.duration_end - spec.duration_start).days + 1
    win_days = (spec.window_end - spec.window_start).days + 1
    tweets = []
    for i in range(n_tweets):
        need = NEED_CATEGORIES[needs[i]]
        phrases = _NEGATIVE_PHRASES if labels[i] else _POSITIVE_PHRASES
        parts = [str(rng.choice(phrases)), str(rng.choice(_NEED_WORDS[need])),
                 str(rng.choice(_FILLER))]
        if rng.random() < 0.3:
            parts.insert(0, f"@user{int(rng.integers(1000))}")
        if rng.random() < 0.3:
            parts.append(f"#{tag}")
        if rng.random() < 0.2:
            parts.append(f"https://t.co/{int(rng.integers(10**6)):06d}")
        if rng.random() < 0.1:
            parts.insert(0, "RT")
        if rng.random() < 0.7:
            day = spec.duration_start + dt.timedelta(days=int(rng.integers(dur_days)))
        else:
            day = spec.window_start + dt.timedelta(days=int(rng.integers(win_days)))
        ts = dt.datetime.combine(day, dt.time(), tzinfo=dt.timezone.utc) + dt.timedelta(
            seconds=int(rng.integers(86400)))
        label = int(labels[i] ^ flips[i])
        tweets.append(Tweet(f"{spec.disaster_id}-{i:06d}", " ".join(parts), ts,
                            spec.disaster_id, need, label))
    return Dataset(spec, tuple(tweets))

"""Text classification pipeline: tokens -> tf-idf (vocabulary fit on training data only) -> model."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .corpus import Dataset
from .features import TfidfConfig, Vocabulary
from .models import ClassifierModel, TrainingSet, canonical_family, fit_model
from .preprocess import StopList, default_stoplist, preprocess_text

FEATURE_KEYS = ("ngram_range", "min_df", "idf", "sublinear_tf", "norm")


def split_config(config: dict[str, Any] | None) -> tuple[TfidfConfig, dict[str, Any]]:
    """Separate feature settings from model hyperparameters in a flat config."""
    config = dict(config or {})
    feats = {k: config.pop(k) for k in FEATURE_KEYS if k in config}
    if "ngram_range" in feats:
        feats["ngram_range"] = tuple(feats["ngram_range"])
    return TfidfConfig(**feats), config


@dataclass(frozen=True)
class PreprocessOptions:
    stop: StopList | None = None
    stemming: bool = True

    def tokens(self, texts: Sequence[str]) -> list[tuple[str, ...]]:
        stop = self.stop or default_stoplist()
        return [preprocess_text(t, stop, self.stemming) for t in texts]


def dataset_tokens(ds: Dataset, options: PreprocessOptions | None = None) -> list[tuple[str, ...]]:
    return (options or PreprocessOptions()).tokens([t.text for t in ds.tweets])


@dataclass
class FittedPipeline:
    family: str
    config: dict[str, Any]
    features: TfidfConfig
    vocab: Vocabulary
    model: ClassifierModel
    seed: int
    info: dict[str, Any] = field(default_factory=dict)

    def transform(self, docs):
        return self.features.transform(docs, self.vocab)

    def scores(self, docs) -> np.ndarray:
        return self.model.decision_scores(self.transform(docs))

    def predict(self, docs) -> np.ndarray:
        return self.model.predict_many(self.transform(docs))


def fit_pipeline(family: str, config: dict[str, Any] | None, docs: Sequence, labels,
                 seed: int = 0) -> FittedPipeline:
    """Build the vocabulary on ``docs`` and fit ``family`` on their tf-idf vectors."""
    family = canonical_family(family)
    features, model_cfg = split_config(config)
    vocab = features.fit(docs)
    X = features.transform(docs, vocab)
    ts = TrainingSet(X, np.asarray(labels), len(vocab))
    model = fit_model(family, ts, model_cfg, seed)
    return FittedPipeline(family, dict(config or {}), features, vocab, model, seed)

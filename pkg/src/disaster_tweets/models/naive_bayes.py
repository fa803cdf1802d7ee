"""Multinomial naive Bayes over non-negative feature weights."""
from __future__ import annotations

import numpy as np

from .base import ClassifierModel, IncompatibleFeaturesError, TrainingSet


class NaiveBayes(ClassifierModel):
    family = "NB"
    threshold = 0.0

    def _scores(self, X):
        p = self.params
        return X @ (p["feature_log_prob"][1] - p["feature_log_prob"][0]) + (
            p["class_log_prior"][1] - p["class_log_prior"][0])


def fit_naive_bayes(ts: TrainingSet, alpha: float = 1.0, seed: int = 0) -> NaiveBayes:
    """Score is the log posterior odds ``log P(y=1|x) - log P(y=0|x)``."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    if ts.x.nnz and ts.x.data.min() < 0:
        raise IncompatibleFeaturesError(
            "naive Bayes needs non-negative feature weights; the literal idf gives negative "
            "weights to terms present in (almost) every document. Use idf='smooth' or idf='none'.")
    n, dim = ts.x.shape
    counts = np.bincount(ts.y, minlength=2).astype(np.float64)
    class_log_prior = np.log(counts / n)
    feature_sums = np.vstack([np.asarray(ts.x[ts.y == c].sum(axis=0)).ravel() for c in (0, 1)])
    smoothed = feature_sums + alpha
    feature_log_prob = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    return NaiveBayes(dim, {"alpha": alpha}, seed,
                      {"class_log_prior": class_log_prior, "feature_log_prob": feature_log_prob})

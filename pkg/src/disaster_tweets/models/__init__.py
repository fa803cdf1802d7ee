"""The eight classifier families behind one fit/score/predict contract."""
from __future__ import annotations

from typing import Any, Callable

import numpy as np

from .base import (ClassifierModel, DimensionError, IncompatibleFeaturesError, NumericalError,
                   TrainingSet, as_csr)
from .knn import KNN, fit_knn
from .linear import (LinearSVM, LogisticRegression, fit_linear_svm, fit_logistic_regression,
                     logistic_objective, svm_objective)
from .mlp import MLP, fit_mlp, mlp_loss_and_grad
from .naive_bayes import NaiveBayes, fit_naive_bayes
from .serialize import FingerprintMismatch, dumps_model, load_model, save_model
from .trees import AdaBoost, DecisionTree, RandomForest, fit_adaboost, fit_decision_tree, fit_random_forest

FAMILIES = ("NB", "LR", "DT", "SVM", "KNN", "RF", "AdaBoost", "MNN")
_ALIASES = {"MLP": "MNN", "ADABOOST": "AdaBoost"}


class MajorityClass(ClassifierModel):
    """Baseline that always predicts the training majority (ties go to label 0)."""

    family = "majority"
    threshold = 0.5
    probabilistic = True

    def _scores(self, X):
        return np.full(X.shape[0], self.params["p"])


def fit_majority(ts: TrainingSet, seed: int = 0) -> MajorityClass:
    p = 1.0 if ts.y.mean() > 0.5 else 0.0
    return MajorityClass(ts.feature_dim, {}, seed, {"p": p})


_FIT: dict[str, Callable[..., ClassifierModel]] = {
    "NB": fit_naive_bayes,
    "LR": fit_logistic_regression,
    "DT": fit_decision_tree,
    "SVM": fit_linear_svm,
    "KNN": fit_knn,
    "RF": fit_random_forest,
    "AdaBoost": fit_adaboost,
    "MNN": fit_mlp,
    "majority": fit_majority,
}
_CLASSES = {"NB": NaiveBayes, "LR": LogisticRegression, "DT": DecisionTree, "SVM": LinearSVM,
            "KNN": KNN, "RF": RandomForest, "AdaBoost": AdaBoost, "MNN": MLP,
            "majority": MajorityClass}


def canonical_family(name: str) -> str:
    if name in _FIT:
        return name
    upper = name.upper()
    if upper in _ALIASES:
        return _ALIASES[upper]
    for fam in _FIT:
        if fam.upper() == upper:
            return fam
    raise ValueError(f"unknown model family {name!r}; choose from {', '.join(FAMILIES)}")


def model_class(family: str) -> type[ClassifierModel]:
    return _CLASSES[canonical_family(family)]


def fit_model(family: str, ts: TrainingSet, config: dict[str, Any] | None = None,
              seed: int = 0) -> ClassifierModel:
    """Fit ``family`` with hyperparameters ``config`` (keyword arguments of its fit function)."""
    return _FIT[canonical_family(family)](ts, seed=seed, **(config or {}))


__all__ = ["FAMILIES", "ClassifierModel", "TrainingSet", "DimensionError", "NumericalError",
           "IncompatibleFeaturesError", "FingerprintMismatch", "fit_model", "canonical_family",
           "model_class", "as_csr", "fit_naive_bayes", "fit_logistic_regression",
           "fit_decision_tree", "fit_linear_svm", "fit_knn", "fit_random_forest", "fit_adaboost",
           "fit_mlp", "fit_majority", "logistic_objective", "svm_objective", "mlp_loss_and_grad",
           "save_model", "load_model", "dumps_model"]

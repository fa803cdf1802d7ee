"""Shared classifier contract: training sets, input coercion, thresholding."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, ClassVar, Sequence

import numpy as np
import scipy.sparse as sp

from ..features import SparseVector, vectors_to_csr


class DimensionError(ValueError):
    """Input vector does not match the model's feature dimension."""


class NumericalError(ArithmeticError):
    """Training produced a non-finite loss or parameter."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message if epoch is None else f"{message} (epoch {epoch})")
        self.epoch = epoch


class IncompatibleFeaturesError(ValueError):
    """Features violate a family's input requirement (e.g. negative weights for NB)."""


@dataclass(frozen=True)
class TrainingSet:
    x: sp.csr_matrix
    y: np.ndarray
    feature_dim: int

    def __post_init__(self):
        x = as_csr(self.x, self.feature_dim)
        y = np.asarray(self.y, dtype=np.int64)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.shape[0] != len(y):
            raise ValueError(f"{x.shape[0]} vectors but {len(y)} labels")
        if len(y) < 2:
            raise ValueError("a training set needs at least 2 samples")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if len(np.unique(y)) < 2:
            raise ValueError("both classes must be present in the training set")

    @classmethod
    def from_vectors(cls, vectors: Sequence[SparseVector], y, feature_dim: int) -> "TrainingSet":
        return cls(as_csr(list(vectors), feature_dim), y, feature_dim)

    def __len__(self) -> int:
        return len(self.y)


def as_csr(x, dim: int) -> sp.csr_matrix:
    """Coerce a SparseVector, a list of them, a sparse or dense matrix to CSR of width ``dim``."""
    if isinstance(x, SparseVector):
        x = [x]
    if isinstance(x, (list, tuple)) and (not x or isinstance(x[0], SparseVector)):
        if any(len(v) and v.indices[-1] >= dim for v in x):
            raise DimensionError(f"vector index out of range for feature_dim={dim}")
        return vectors_to_csr(list(x), dim)
    if sp.issparse(x):
        m = sp.csr_matrix(x, dtype=np.float64)
    else:
        arr = np.asarray(x, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[None, :]
        m = sp.csr_matrix(arr)
    if m.shape[1] != dim:
        raise DimensionError(f"input has {m.shape[1]} features, model expects {dim}")
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return m


class ClassifierModel:
    """A fitted binary classifier.

    ``predict`` is 1 exactly when ``score`` exceeds ``threshold``; a score equal
    to the threshold maps to label 0.
    """

    family: ClassVar[str] = ""
    threshold: ClassVar[float] = 0.0
    probabilistic: ClassVar[bool] = False

    def __init__(self, feature_dim: int, config: dict[str, Any], seed: int,
                 params: dict[str, Any], info: dict[str, Any] | None = None):
        self.feature_dim = int(feature_dim)
        self.config = dict(config)
        self.seed = int(seed)
        self.params = params
        self.info = info or {}

    def _scores(self, X: sp.csr_matrix) -> np.ndarray:
        raise NotImplementedError

    def decision_scores(self, x) -> np.ndarray:
        return self._scores(as_csr(x, self.feature_dim))

    def score(self, x) -> float:
        """Class-1 confidence for a single vector."""
        X = as_csr(x, self.feature_dim)
        if X.shape[0] != 1:
            raise ValueError("score() takes one vector; use decision_scores() for batches")
        return float(self._scores(X)[0])

    def predict(self, x) -> int:
        return int(self.score(x) > self.threshold)

    def predict_many(self, x) -> np.ndarray:
        return (self.decision_scores(x) > self.threshold).astype(np.int64)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.feature_dim}, config={self.config}, seed={self.seed})"

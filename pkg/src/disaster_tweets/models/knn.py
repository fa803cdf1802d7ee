"""Brute-force k-nearest-neighbour classifier under cosine distance."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .base import ClassifierModel, TrainingSet

# distances are compared on this grid so ties do not hinge on rounding order
_DISTANCE_DECIMALS = 12


def _row_normalize(X: sp.csr_matrix) -> sp.csr_matrix:
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return sp.csr_matrix(sp.diags(inv) @ X)


def cosine_distances(A: sp.csr_matrix, B: sp.csr_matrix) -> np.ndarray:
    """``1 - cos`` for every pair of rows; a zero vector is at distance 1 from everything."""
    sims = (_row_normalize(A) @ _row_normalize(B).T).toarray()
    return np.round(1.0 - sims, _DISTANCE_DECIMALS)


class KNN(ClassifierModel):
    family = "KNN"
    threshold = 0.5
    probabilistic = True
    block_size = 512

    def neighbors(self, X) -> np.ndarray:
        """Indices of the k nearest training points per row, nearest first;
        equal distances keep training order."""
        k = self.config["k"]
        Xtr = self.params["x"]
        out = []
        for start in range(0, X.shape[0], self.block_size):
            d = cosine_distances(X[start:start + self.block_size], Xtr)
            out.append(np.argsort(d, axis=1, kind="stable")[:, :k])
        return np.vstack(out) if out else np.empty((0, k), dtype=np.int64)

    def _scores(self, X):
        return self.params["y"][self.neighbors(X)].mean(axis=1)


def fit_knn(ts: TrainingSet, k: int = 5, seed: int = 0) -> KNN:
    """Lazy learner: stores the training vectors; score is the positive fraction of the k neighbours."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(ts):
        raise ValueError(f"k={k} exceeds the {len(ts)} training samples")
    return KNN(ts.feature_dim, {"k": k}, seed,
               {"x": ts.x.copy(), "y": ts.y.astype(np.float64)})

"""Linear classifiers: L2 logistic regression (full-batch gradient descent)
and a Pegasos-trained linear SVM."""
from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .._random import stream
from .base import ClassifierModel, NumericalError, TrainingSet


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_objective(w: np.ndarray, b: float, X, y: np.ndarray, c: float = 1.0,
                       penalty: str = "l2") -> tuple[float, np.ndarray, float]:
    """Mean logistic loss plus ``||w||^2 / (2c)``; returns (loss, dL/dw, dL/db)."""
    n = X.shape[0]
    z = X @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    r = (sigmoid(z) - y) / n
    grad_w = np.asarray(X.T @ r).ravel()
    grad_b = float(r.sum())
    if penalty == "l2":
        loss += float(w @ w) / (2.0 * c)
        grad_w = grad_w + w / c
    elif penalty != "none":
        raise ValueError(f"unknown penalty {penalty!r}")
    return loss, grad_w, grad_b


class LogisticRegression(ClassifierModel):
    family = "LR"
    threshold = 0.5
    probabilistic = True

    def _scores(self, X):
        return sigmoid(X @ self.params["w"] + self.params["b"])


def _lipschitz_bound(X: sp.csr_matrix, c: float, penalty: str) -> float:
    # ||[X 1]||_F^2 bounds the top eigenvalue of [X 1]^T [X 1]
    n = X.shape[0]
    L = (float(X.multiply(X).sum()) + n) / (4.0 * n)
    if penalty == "l2":
        L += 1.0 / c
    return L


def fit_logistic_regression(ts: TrainingSet, penalty: str = "l2", c: float = 1.0,
                            lr: float | None = None, epochs: int = 300,
                            seed: int = 0) -> LogisticRegression:
    """Gradient descent from zero weights.

    ``lr=None`` picks ``1/L`` for a Lipschitz bound ``L`` of the gradient, which
    cannot diverge; an explicit ``lr`` is used as given.
    """
    if c <= 0:
        raise ValueError("c must be > 0")
    step = 1.0 / _lipschitz_bound(ts.x, c, penalty) if lr is None else float(lr)
    if step <= 0:
        raise ValueError("lr must be > 0")
    y = ts.y.astype(np.float64)
    w = np.zeros(ts.feature_dim)
    b = 0.0
    history = []
    # overflow is reported as NumericalError below, not as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(epochs):
            loss, gw, gb = logistic_objective(w, b, ts.x, y, c, penalty)
            if not math.isfinite(loss):
                raise NumericalError("logistic loss diverged; lower lr", epoch)
            history.append(loss)
            w -= step * gw
            b -= step * gb
        loss, _, _ = logistic_objective(w, b, ts.x, y, c, penalty)
    if not math.isfinite(loss) or not np.all(np.isfinite(w)):
        raise NumericalError("logistic loss diverged; lower lr", epochs)
    history.append(loss)
    config = {"penalty": penalty, "c": c, "lr": lr, "epochs": epochs}
    return LogisticRegression(ts.feature_dim, config, seed, {"w": w, "b": float(b)},
                              {"loss_history": history, "step": step})


class LinearSVM(ClassifierModel):
    family = "SVM"
    threshold = 0.0

    def _scores(self, X):
        return X @ self.params["w"] + self.params["b"]


def svm_objective(w: np.ndarray, b: float, X, y_pm: np.ndarray, lam: float,
                  intercept_scaling: float = 1.0) -> float:
    """``lam/2 ||(w, b/s)||^2 + mean hinge``; the bias is a regularized extra feature."""
    margins = y_pm * (X @ w + b)
    wb = b / intercept_scaling
    return 0.5 * lam * (float(w @ w) + wb * wb) + float(np.mean(np.maximum(0.0, 1.0 - margins)))


def fit_linear_svm(ts: TrainingSet, c: float = 1.0, epochs: int = 20, seed: int = 0,
                   intercept_scaling: float = 1.0) -> LinearSVM:
    """Pegasos stochastic subgradient descent on the hinge loss.

    ``c`` maps to the Pegasos regularizer as ``lambda = 1 / (c n)``. Each epoch
    visits the samples in a seeded random order; the returned weights are the
    average of the last epoch's iterates. Labels {0,1} become {-1,+1}.
    """
    if c <= 0:
        raise ValueError("c must be > 0")
    X = ts.x
    n, dim = X.shape
    lam = 1.0 / (c * n)
    radius = 1.0 / math.sqrt(lam)
    y_pm = np.where(ts.y == 1, 1.0, -1.0)
    indptr, indices, data = X.indptr, X.indices, X.data
    row_sq = np.asarray(X.multiply(X).sum(axis=1)).ravel() + intercept_scaling ** 2

    # w_aug = scale * v, with the bias weight stored at v[dim]
    v = np.zeros(dim + 1)
    scale = 1.0
    v_sq = 0.0
    rng = stream(seed, "svm")
    t = 0
    history = []
    w_avg = np.zeros(dim + 1)
    for epoch in range(epochs):
        # running epoch sum S = u + acc * v
        u = np.zeros(dim + 1)
        acc = 0.0
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            lo, hi = indptr[i], indptr[i + 1]
            idx, xv = indices[lo:hi], data[lo:hi]
            margin = y_pm[i] * scale * (v[idx] @ xv + v[dim] * intercept_scaling)
            shrink = 1.0 - eta * lam
            if shrink <= 0.0:
                u += acc * v
                v[:] = 0.0
                scale, v_sq = 1.0, 0.0
            else:
                scale *= shrink
            if margin < 1.0:
                delta = eta * y_pm[i] / scale
                dot = v[idx] @ xv + v[dim] * intercept_scaling
                v_sq += 2.0 * delta * dot + delta * delta * row_sq[i]
                v[idx] += delta * xv
                v[dim] += delta * intercept_scaling
                u[idx] -= acc * delta * xv
                u[dim] -= acc * delta * intercept_scaling
            norm = scale * math.sqrt(max(v_sq, 0.0))
            if norm > radius:
                scale *= radius / norm
            if scale < 1e-6:
                # fold the running sum into u before rescaling so u and acc*v stay small
                u += acc * v
                v *= scale
                v_sq *= scale * scale
                acc = 0.0
                scale = 1.0
            acc += scale
        w_avg = (u + acc * v) / n
        if not np.all(np.isfinite(w_avg)):
            raise NumericalError("SVM weights became non-finite", epoch)
        history.append(svm_objective(w_avg[:dim], w_avg[dim] * intercept_scaling, X, y_pm,
                                     lam, intercept_scaling))
    config = {"c": c, "epochs": epochs, "intercept_scaling": intercept_scaling}
    params = {"w": w_avg[:dim].copy(), "b": float(w_avg[dim] * intercept_scaling)}
    return LinearSVM(dim, config, seed, params, {"objective_history": history, "lambda": lam})

"""One-hidden-layer perceptron: ReLU hidden units, sigmoid output, cross-entropy loss."""
from __future__ import annotations

import math

import numpy as np

from .._random import stream
from .base import ClassifierModel, NumericalError, TrainingSet
from .linear import sigmoid


def mlp_forward(params, X):
    pre = X @ params["W1"] + params["b1"]
    hidden = np.maximum(pre, 0.0)
    z = hidden @ params["w2"] + params["b2"]
    return pre, hidden, z


def mlp_loss_and_grad(params: dict, X, y: np.ndarray) -> tuple[float, dict]:
    """Mean binary cross-entropy and its gradient w.r.t. every parameter."""
    n = X.shape[0]
    pre, hidden, z = mlp_forward(params, X)
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    dz = (sigmoid(z) - y) / n
    grads = {"w2": hidden.T @ dz, "b2": float(dz.sum())}
    dpre = np.outer(dz, params["w2"]) * (pre > 0)
    grads["W1"] = np.asarray(X.T @ dpre)
    grads["b1"] = dpre.sum(axis=0)
    return loss, grads


def init_mlp(dim: int, hidden: int, rng: np.random.Generator) -> dict:
    """Uniform Glorot initialization; biases start at zero."""
    a1 = math.sqrt(6.0 / (dim + hidden))
    a2 = math.sqrt(6.0 / (hidden + 1))
    return {"W1": rng.uniform(-a1, a1, size=(dim, hidden)),
            "b1": np.zeros(hidden),
            "w2": rng.uniform(-a2, a2, size=hidden),
            "b2": 0.0}


class MLP(ClassifierModel):
    family = "MNN"
    threshold = 0.5
    probabilistic = True

    def _scores(self, X):
        return sigmoid(mlp_forward(self.params, X)[2])


def fit_mlp(ts: TrainingSet, hidden: int = 16, lr: float = 0.5, epochs: int = 100,
            seed: int = 0, batch_size: int = 32) -> MLP:
    """Mini-batch gradient descent; batch order is reshuffled each epoch from the seed.

    Only the input-weight rows of features present in a batch are updated,
    which is exact since the others receive zero gradient.
    """
    if hidden < 1:
        raise ValueError("hidden must be >= 1")
    X, y = ts.x, ts.y.astype(np.float64)
    n = X.shape[0]
    params = init_mlp(ts.feature_dim, hidden, stream(seed, "mlp", "init"))
    order_rng = stream(seed, "mlp", "batches")
    history = []
    for epoch in range(epochs):
        total = 0.0
        perm = order_rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = perm[start:start + batch_size]
            Xb = X[idx]
            cols = np.unique(Xb.indices)
            Xs = Xb[:, cols]
            W1s = params["W1"][cols]
            pre = Xs @ W1s + params["b1"]
            h = np.maximum(pre, 0.0)
            z = h @ params["w2"] + params["b2"]
            yb = y[idx]
            total += float(np.sum(np.logaddexp(0.0, z) - yb * z))
            dz = (sigmoid(z) - yb) / len(idx)
            dpre = np.outer(dz, params["w2"]) * (pre > 0)
            params["w2"] = params["w2"] - lr * (h.T @ dz)
            params["b2"] = params["b2"] - lr * float(dz.sum())
            params["W1"][cols] = W1s - lr * np.asarray(Xs.T @ dpre)
            params["b1"] = params["b1"] - lr * dpre.sum(axis=0)
        loss = total / n
        if not math.isfinite(loss):
            raise NumericalError("MLP loss is not finite; lower lr", epoch)
        history.append(loss)
    config = {"hidden": hidden, "lr": lr, "epochs": epochs, "batch_size": batch_size}
    params["b2"] = float(params["b2"])
    return MLP(ts.feature_dim, config, seed, params, {"loss_history": history})

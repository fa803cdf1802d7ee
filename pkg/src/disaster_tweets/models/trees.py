"""CART trees on sparse features, bagged forests and boosted stumps.

Split search works on the nonzero entries of the node's rows, presorted once
by (feature, value); implicit zeros of each feature form one block whose
class totals are recovered from the node totals. Candidate thresholds are
midpoints between consecutive distinct values, ``x <= threshold`` goes left,
and ties between equally good splits resolve to the lowest feature index,
then the lowest threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .._random import child_seed, stream
from .base import ClassifierModel, TrainingSet


@dataclass
class Split:
    feature: int
    threshold: float
    score: float


def _find_split(col, val, n, w0, w1, N, W0, W1, min_leaf, criterion, rng=None,
                max_features=None):
    if len(col) == 0:
        return None
    first = np.r_[True, col[1:] != col[:-1]]
    last = np.r_[col[1:] != col[:-1], True]
    gstart = np.flatnonzero(first)
    gid = np.cumsum(first) - 1

    def group_cum(a):
        cum = np.cumsum(a)
        before = (cum - a)[gstart]
        return cum - before[gid], np.add.reduceat(a, gstart)

    cn, tn = group_cum(n)
    c0, t0 = group_cum(w0)
    c1, t1 = group_cum(w1)
    zn, z0, z1 = N - tn, W0 - t0, W1 - t1
    has_zero = zn[gid] > 0
    pos = val > 0

    # cuts right after a nonzero entry
    next_val = np.r_[val[1:], np.inf]
    nxt = np.where(last, np.nan, next_val)
    crosses_zero = (val < 0) & has_zero & (last | (next_val > 0))
    nxt = np.where(crosses_zero, 0.0, nxt)
    ok = ~np.isnan(nxt) & (nxt > val)
    cand_col = col[ok]
    cand_thr = 0.5 * (val[ok] + nxt[ok])
    ln = (cn + pos * zn[gid])[ok]
    l0 = (c0 + pos * z0[gid])[ok]
    l1 = (c1 + pos * z1[gid])[ok]

    # cuts right after the zero block, before the first positive entry
    first_pos = pos & (first | ~np.r_[False, pos[:-1]])
    zb = first_pos & has_zero
    if zb.any():
        g = gid[zb]
        neg = ~pos
        neg_n = np.bincount(gid, weights=n * neg, minlength=len(gstart))
        neg_0 = np.bincount(gid, weights=w0 * neg, minlength=len(gstart))
        neg_1 = np.bincount(gid, weights=w1 * neg, minlength=len(gstart))
        cand_col = np.r_[cand_col, col[zb]]
        cand_thr = np.r_[cand_thr, 0.5 * val[zb]]
        ln = np.r_[ln, neg_n[g] + zn[g]]
        l0 = np.r_[l0, neg_0[g] + z0[g]]
        l1 = np.r_[l1, neg_1[g] + z1[g]]

    rn, r0, r1 = N - ln, W0 - l0, W1 - l1
    valid = (ln >= min_leaf) & (rn >= min_leaf)
    if not valid.any():
        return None
    if max_features is not None:
        feats = np.unique(cand_col[valid])
        if len(feats) > max_features:
            chosen = rng.choice(feats, size=max_features, replace=False)
            valid &= np.isin(cand_col, chosen)
    cand_col, cand_thr = cand_col[valid], cand_thr[valid]
    l0, l1, r0, r1 = l0[valid], l1[valid], r0[valid], r1[valid]
    if criterion == "gini":
        lw, rw = l0 + l1, r0 + r1
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(lw > 0, (l0 * l0 + l1 * l1) / lw, 0.0) + \
                np.where(rw > 0, (r0 * r0 + r1 * r1) / rw, 0.0)
    elif criterion == "error":
        s = -(np.minimum(l0, l1) + np.minimum(r0, r1))
    else:
        raise ValueError(f"unknown criterion {criterion!r}")
    best = s.max()
    tied = np.flatnonzero(s == best)
    order = np.lexsort((cand_thr[tied], cand_col[tied]))
    j = tied[order[0]]
    return Split(int(cand_col[j]), float(cand_thr[j]), float(best))


class _Entries:
    """Nonzero entries of a CSR matrix sorted by (feature, value)."""

    def __init__(self, X: sp.csr_matrix):
        coo = X.tocoo()
        order = np.lexsort((coo.data, coo.col))
        self.row = coo.row[order].astype(np.int64)
        self.col = coo.col[order].astype(np.int64)
        self.val = coo.data[order]


def build_tree(X: sp.csr_matrix, y: np.ndarray, counts: np.ndarray | None = None,
               weights: np.ndarray | None = None, max_depth: int | None = None,
               min_leaf: int = 1, max_features: int | None = None,
               rng: np.random.Generator | None = None, criterion: str = "gini",
               entries: _Entries | None = None) -> dict[str, np.ndarray]:
    """Grow one tree; returns flat node arrays.

    ``counts`` are per-sample multiplicities (bootstrap) used for ``min_leaf``;
    ``weights`` scale the class totals (boosting). Leaves store the weighted
    positive-class fraction.
    """
    n_total = X.shape[0]
    counts = np.ones(n_total, dtype=np.int64) if counts is None else np.asarray(counts)
    weights = counts.astype(np.float64) if weights is None else np.asarray(weights, dtype=np.float64)
    wy0 = weights * (y == 0)
    wy1 = weights * (y == 1)
    ent = entries or _Entries(X)
    e_row, e_col, e_val = ent.row, ent.col, ent.val

    rows0 = np.flatnonzero(counts > 0)
    active = np.zeros(n_total, dtype=bool)
    active[rows0] = True
    ents0 = np.flatnonzero(active[e_row])

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    scratch = np.zeros(n_total, dtype=bool)
    stack = [(new_node(), rows0, ents0, 0)]
    while stack:
        node, rows, ents, depth = stack.pop()
        N = int(counts[rows].sum())
        W0 = float(wy0[rows].sum())
        W1 = float(wy1[rows].sum())
        value[node] = W1 / (W0 + W1) if W0 + W1 > 0 else 0.0
        if W0 == 0 or W1 == 0 or (max_depth is not None and depth >= max_depth) or N < 2 * min_leaf:
            continue
        er = e_row[ents]
        split = _find_split(e_col[ents], e_val[ents], counts[er], wy0[er], wy1[er], N, W0, W1,
                            min_leaf, criterion, rng, max_features)
        if split is None:
            continue
        f, thr = split.feature, split.threshold
        scratch[rows] = 0.0 <= thr
        on_f = ents[e_col[ents] == f]
        scratch[e_row[on_f]] = e_val[on_f] <= thr
        go_left = scratch[rows]
        ent_left = scratch[er]
        feature[node], threshold[node] = f, thr
        li, ri = new_node(), new_node()
        left[node], right[node] = li, ri
        # right pushed first so the left subtree is grown first
        stack.append((ri, rows[~go_left], ents[~ent_left], depth + 1))
        stack.append((li, rows[go_left], ents[ent_left], depth + 1))
    return {"feature": np.array(feature, dtype=np.int64),
            "threshold": np.array(threshold, dtype=np.float64),
            "left": np.array(left, dtype=np.int64),
            "right": np.array(right, dtype=np.int64),
            "value": np.array(value, dtype=np.float64)}


def tree_apply(tree: dict[str, np.ndarray], Xc: sp.csc_matrix) -> np.ndarray:
    """Leaf index reached by every row of ``Xc`` (CSC for column access)."""
    n = Xc.shape[0]
    leaf = np.zeros(n, dtype=np.int64)
    feature, threshold = tree["feature"], tree["threshold"]
    left, right = tree["left"], tree["right"]
    xcol = np.zeros(n)
    todo = [(0, np.arange(n))]
    while todo:
        node, rows = todo.pop()
        f = feature[node]
        if f < 0 or len(rows) == 0:
            leaf[rows] = node
            continue
        lo, hi = Xc.indptr[f], Xc.indptr[f + 1]
        nz_rows = Xc.indices[lo:hi]
        xcol[nz_rows] = Xc.data[lo:hi]
        go_left = xcol[rows] <= threshold[node]
        xcol[nz_rows] = 0.0
        todo.append((right[node], rows[~go_left]))
        todo.append((left[node], rows[go_left]))
    return leaf


def tree_scores(tree, X) -> np.ndarray:
    Xc = X.tocsc() if not sp.isspmatrix_csc(X) else X
    return tree["value"][tree_apply(tree, Xc)]


def tree_depth(tree) -> int:
    depth = np.zeros(len(tree["feature"]), dtype=np.int64)
    for node in range(len(depth)):
        if tree["feature"][node] >= 0:
            depth[tree["left"][node]] = depth[tree["right"][node]] = depth[node] + 1
    return int(depth.max())


class DecisionTree(ClassifierModel):
    family = "DT"
    threshold = 0.5
    probabilistic = True

    def _scores(self, X):
        return tree_scores(self.params["tree"], X)


def fit_decision_tree(ts: TrainingSet, max_depth: int | None = None, min_leaf: int = 1,
                      seed: int = 0) -> DecisionTree:
    """Binary CART tree with Gini splits; score is the leaf's positive fraction."""
    if max_depth is not None and max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    tree = build_tree(ts.x, ts.y, max_depth=max_depth, min_leaf=min_leaf)
    return DecisionTree(ts.feature_dim, {"max_depth": max_depth, "min_leaf": min_leaf}, seed,
                        {"tree": tree}, {"n_nodes": len(tree["feature"])})


class RandomForest(ClassifierModel):
    family = "RF"
    threshold = 0.5
    probabilistic = True

    def _scores(self, X):
        Xc = X.tocsc()
        trees = self.params["trees"]
        return np.mean([tree_scores(t, Xc) for t in trees], axis=0)


def fit_random_forest(ts: TrainingSet, n_trees: int = 100, max_depth: int | None = None,
                      seed: int = 0, min_leaf: int = 1, bootstrap: bool = True,
                      max_features: str | int | None = "sqrt") -> RandomForest:
    """Bagged CART trees; each split considers ``sqrt(V)`` random features
    among those able to split the node."""
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    n, dim = ts.x.shape
    if max_features == "sqrt":
        m = max(1, int(math.sqrt(dim)))
    elif max_features is None:
        m = None
    else:
        m = int(max_features)
    entries = _Entries(ts.x)
    trees = []
    for i in range(n_trees):
        rng = stream(child_seed(seed, "forest", i), "tree")
        counts = np.bincount(rng.integers(0, n, n), minlength=n) if bootstrap else None
        trees.append(build_tree(ts.x, ts.y, counts=counts, max_depth=max_depth,
                                min_leaf=min_leaf, max_features=m, rng=rng, entries=entries))
    config = {"n_trees": n_trees, "max_depth": max_depth, "min_leaf": min_leaf,
              "bootstrap": bootstrap, "max_features": max_features}
    return RandomForest(dim, config, seed, {"trees": trees})


class AdaBoost(ClassifierModel):
    family = "AdaBoost"
    threshold = 0.0

    def _scores(self, X):
        p = self.params
        out = np.zeros(X.shape[0])
        if len(p["alpha"]) == 0:
            return out
        Xc = X.tocsc()
        xcol = np.zeros(X.shape[0])
        for f, thr, hl, hr, a in zip(p["feature"], p["threshold"], p["left_sign"],
                                     p["right_sign"], p["alpha"]):
            if f < 0:
                out += a * hl
                continue
            lo, hi = Xc.indptr[f], Xc.indptr[f + 1]
            xcol[:] = 0.0
            xcol[Xc.indices[lo:hi]] = Xc.data[lo:hi]
            out += a * np.where(xcol <= thr, hl, hr)
        return out


def _stump_signs(X, y, w, split):
    """Weighted-majority sign (+1 means class 1) on each side of a split."""
    if split is None:
        s = 1.0 if w[y == 1].sum() > w[y == 0].sum() else -1.0
        return s, s
    col = X[:, split.feature].toarray().ravel()
    sides = []
    for mask in (col <= split.threshold, col > split.threshold):
        sides.append(1.0 if w[mask & (y == 1)].sum() > w[mask & (y == 0)].sum() else -1.0)
    return sides[0], sides[1]


def fit_adaboost(ts: TrainingSet, n_rounds: int = 50, seed: int = 0,
                 min_error: float = 1e-10) -> AdaBoost:
    """Discrete AdaBoost over error-minimizing decision stumps.

    Round weight is ``0.5 * ln((1 - eps) / eps)``. Boosting stops when the best
    stump's weighted error reaches 0.5 (that stump is discarded) or 0 (that
    stump is kept, its error floored at ``min_error`` to keep its weight finite).
    """
    if n_rounds < 1:
        raise ValueError("n_rounds must be >= 1")
    X, y = ts.x, ts.y
    n = len(y)
    y_pm = np.where(y == 1, 1.0, -1.0)
    w = np.full(n, 1.0 / n)
    entries = _Entries(X)
    e_row, e_col, e_val = entries.row, entries.col, entries.val
    counts = np.ones(n, dtype=np.int64)
    stumps = {"feature": [], "threshold": [], "left_sign": [], "right_sign": [], "alpha": []}
    errors, train_errors = [], []
    F = np.zeros(n)
    halted = None
    Xc = X.tocsc()
    for m in range(n_rounds):
        W0, W1 = float(w[y == 0].sum()), float(w[y == 1].sum())
        split = _find_split(e_col, e_val, counts[e_row], w[e_row] * (y[e_row] == 0),
                            w[e_row] * (y[e_row] == 1), n, W0, W1, 1, "error")
        hl, hr = _stump_signs(Xc, y, w, split)
        if split is None:
            h = np.full(n, hl)
        else:
            col = Xc[:, split.feature].toarray().ravel()
            h = np.where(col <= split.threshold, hl, hr)
        eps = float(w[h != y_pm].sum() / w.sum())
        errors.append(eps)
        if eps >= 0.5:
            halted = f"round {m}: weighted error {eps:.4f} >= 0.5"
            break
        alpha = 0.5 * math.log((1.0 - max(eps, min_error)) / max(eps, min_error))
        stumps["feature"].append(-1 if split is None else split.feature)
        stumps["threshold"].append(0.0 if split is None else split.threshold)
        stumps["left_sign"].append(hl)
        stumps["right_sign"].append(hr)
        stumps["alpha"].append(alpha)
        F += alpha * h
        train_errors.append(float(np.mean((F > 0).astype(int) != y)))
        if eps == 0.0:
            halted = f"round {m}: zero-error stump"
            break
        w = w * np.exp(-alpha * y_pm * h)
        w /= w.sum()
    params = {"feature": np.array(stumps["feature"], dtype=np.int64),
              "threshold": np.array(stumps["threshold"], dtype=np.float64),
              "left_sign": np.array(stumps["left_sign"], dtype=np.float64),
              "right_sign": np.array(stumps["right_sign"], dtype=np.float64),
              "alpha": np.array(stumps["alpha"], dtype=np.float64)}
    info = {"stump_errors": errors, "train_errors": train_errors, "halted": halted}
    return AdaBoost(ts.feature_dim, {"n_rounds": n_rounds}, seed, params, info)

"""Newton-boosted regression trees on the logistic loss (exact greedy splits)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _accel
from ..errors import ValidationError


@dataclass(frozen=True)
class GbtParams:
    n_trees: int = 100
    learning_rate: float = 0.1
    max_depth: int = 6
    subsample: float = 0.8
    colsample: float = 0.8
    l2_lambda: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 0 or self.max_depth < 0:
            raise ValidationError("n_trees and max_depth must be >= 0")
        if not 0 < self.learning_rate:
            raise ValidationError("learning_rate must be > 0")
        for name in ("subsample", "colsample"):
            if not 0 < getattr(self, name) <= 1:
                raise ValidationError(f"{name} must be in (0, 1]")
        if self.l2_lambda < 0:
            raise ValidationError("l2_lambda must be >= 0")


@dataclass
class Tree:
    """Flat node arrays; a node is a leaf when ``feature == -1``. Rows with x < threshold go left."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray
    columns: np.ndarray  # feature subset this tree could split on

    @property
    def depth(self) -> int:
        depth = np.zeros(len(self.feature), dtype=np.int64)
        for i in range(len(self.feature)):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def predict(self, X) -> np.ndarray:
        return tree_predict(self.feature, self.threshold, self.left, self.right, self.value,
                            np.ascontiguousarray(X, dtype=np.float64))

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in
                ("feature", "threshold", "left", "right", "value", "gain", "columns")}

    @classmethod
    def from_dict(cls, d) -> "Tree":
        ints = {"feature", "left", "right", "columns"}
        return cls(**{k: np.asarray(v, dtype=np.int64 if k in ints else np.float64)
                      for k, v in d.items()})


def _tree_predict_loop(feature, threshold, left, right, value, X):
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] < threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


def _tree_predict_numpy(feature, threshold, left, right, value, X):
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    active = feature[node] >= 0
    while active.any():
        r, nd = rows[active], node[active]
        go_left = X[r, feature[nd]] < threshold[nd]
        node[active] = np.where(go_left, left[nd], right[nd])
        active = feature[node] >= 0
    return value[node]


tree_predict_jit = _accel.njit(_tree_predict_loop)
tree_predict = _accel.pick(tree_predict_jit, _tree_predict_numpy)


# --- level-wise exact split search ---------------------------------------------
# sorted_idx[:, f] lists all rows ordered by column f; slot[r] is the index of the open
# node holding row r at this level (-1 if the row is out of sample or already in a leaf).

def _midpoint_py(a, b):
    m = 0.5 * (a + b)
    return b if m <= a else m


_midpoint = _accel.njit(_midpoint_py)


def _best_splits_loop(X, sorted_idx, slot, g, h, G, H, feats, lam):
    n_open = G.shape[0]
    best_gain = np.zeros(n_open)
    best_feat = np.full(n_open, -1, dtype=np.int64)
    best_thr = np.zeros(n_open)
    parent = G * G / (H + lam)
    gl = np.empty(n_open)
    hl = np.empty(n_open)
    last = np.empty(n_open)
    seen = np.empty(n_open, dtype=np.bool_)
    for f in feats:
        gl[:] = 0.0
        hl[:] = 0.0
        seen[:] = False
        for k in range(sorted_idx.shape[0]):
            r = sorted_idx[k, f]
            s = slot[r]
            if s < 0:
                continue
            x = X[r, f]
            if seen[s] and x > last[s]:
                gr = G[s] - gl[s]
                hr = H[s] - hl[s]
                gain = 0.5 * (gl[s] * gl[s] / (hl[s] + lam) + gr * gr / (hr + lam) - parent[s])
                if gain > best_gain[s]:
                    best_gain[s] = gain
                    best_feat[s] = f
                    best_thr[s] = _midpoint(last[s], x)
            gl[s] += g[r]
            hl[s] += h[r]
            last[s] = x
            seen[s] = True
    return best_gain, best_feat, best_thr


def _best_splits_numpy(X, sorted_idx, slot, g, h, G, H, feats, lam):
    n_open = G.shape[0]
    best_gain = np.zeros(n_open)
    best_feat = np.full(n_open, -1, dtype=np.int64)
    best_thr = np.zeros(n_open)
    parent = G * G / (H + lam)
    for f in feats:
        order = sorted_idx[:, f]
        s = slot[order]
        keep = s >= 0
        order, s = order[keep], s[keep]
        grp = np.argsort(s, kind="stable")
        order, s = order[grp], s[grp]
        x = X[order, f]
        cg = np.cumsum(g[order])
        ch = np.cumsum(h[order])
        first = np.searchsorted(s, s)  # index where each row's slot group starts
        base_g = np.where(first > 0, cg[first - 1], 0.0)
        base_h = np.where(first > 0, ch[first - 1], 0.0)
        gl = cg - base_g
        hl = ch - base_h
        cand = np.flatnonzero((s[:-1] == s[1:]) & (x[1:] > x[:-1]))
        if cand.size == 0:
            continue
        sc = s[cand]
        glc, hlc = gl[cand], hl[cand]
        gr, hr = G[sc] - glc, H[sc] - hlc
        gain = 0.5 * (glc**2 / (hlc + lam) + gr**2 / (hr + lam) - parent[sc])
        # first maximum per slot
        pick = np.lexsort((cand, -gain, sc))
        head = pick[np.r_[True, sc[pick][1:] != sc[pick][:-1]]]
        for j in head:
            slot_j = sc[j]
            if gain[j] > best_gain[slot_j]:
                best_gain[slot_j] = gain[j]
                best_feat[slot_j] = f
                best_thr[slot_j] = _midpoint_py(x[cand[j]], x[cand[j] + 1])
    return best_gain, best_feat, best_thr


best_splits_jit = _accel.njit(_best_splits_loop)
best_splits = _accel.pick(best_splits_jit, _best_splits_numpy)


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


def log_loss(y, p) -> float:
    p = np.clip(p, 1e-15, 1 - 1e-15)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log1p(-p)))


def grow_tree(X, sorted_idx, rows, g, h, columns, max_depth, lam) -> Tree:
    """Grow one tree level by level on ``rows`` using only ``columns``."""
    n = X.shape[0]
    feature, threshold, left, right, value, gain = [-1], [0.0], [-1], [-1], [0.0], [0.0]
    slot = np.full(n, -1, dtype=np.int64)
    slot[rows] = 0
    open_nodes = [0]
    for depth in range(max_depth + 1):
        if not open_nodes:
            break
        live = slot >= 0
        G = np.bincount(slot[live], weights=g[live], minlength=len(open_nodes))
        H = np.bincount(slot[live], weights=h[live], minlength=len(open_nodes))
        if depth < max_depth:
            b_gain, b_feat, b_thr = best_splits(X, sorted_idx, slot, g, h, G, H, columns, lam)
        else:
            b_feat = np.full(len(open_nodes), -1)
        next_open = []
        child_slot = np.full((len(open_nodes), 2), -1, dtype=np.int64)
        for s, node in enumerate(open_nodes):
            if b_feat[s] < 0:
                value[node] = -G[s] / (H[s] + lam)
                continue
            feature[node], threshold[node], gain[node] = int(b_feat[s]), float(b_thr[s]), float(b_gain[s])
            for side, store in ((0, left), (1, right)):
                store[node] = len(feature)
                child_slot[s, side] = len(next_open)
                next_open.append(len(feature))
                feature.append(-1)
                threshold.append(0.0)
                left.append(-1)
                right.append(-1)
                value.append(0.0)
                gain.append(0.0)
        if next_open:
            r = np.flatnonzero(live)
            s = slot[r]
            f = np.asarray(b_feat)[s]
            split = f >= 0
            goes_right = np.zeros(len(r), dtype=np.int64)
            goes_right[split] = X[r[split], f[split]] >= np.asarray(b_thr)[s[split]]
            slot[r] = child_slot[s, goes_right]
        else:
            slot[:] = -1
        open_nodes = next_open
    as_int = lambda a: np.asarray(a, dtype=np.int64)  # noqa: E731
    return Tree(as_int(feature), np.asarray(threshold), as_int(left), as_int(right),
                np.asarray(value), np.asarray(gain), as_int(columns))


@dataclass
class GbtModel:
    params: GbtParams
    base_score: float
    n_features: int
    trees: list = field(default_factory=list)
    train_loss: list = field(default_factory=list)  # log-loss after each round

    def margin(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValidationError(
                f"dimension mismatch: model has {self.n_features} features, input has {X.shape[1]}")
        out = np.full(X.shape[0], self.base_score)
        for t in self.trees:
            out += self.params.learning_rate * t.predict(X)
        return out

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.margin(X))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)


def gbt_fit(X, y, params: GbtParams = GbtParams()) -> GbtModel:
    """Boost ``params.n_trees`` trees on labels in {0, 1}.

    Each round uses gradient ``p - y`` and hessian ``p (1 - p)`` of the logistic loss, a
    fresh row/column subsample from the seeded generator, and leaf weights ``-G / (H + lambda)``.
    """
    X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(X) != len(y):
        raise ValidationError("X and y differ in length")
    if not set(np.unique(y)) <= {0.0, 1.0}:
        raise ValidationError("GBT labels must be 0 or 1")
    if len(X) == 0:
        raise ValidationError("empty training set")
    n, d = X.shape
    rng = np.random.default_rng(params.seed)
    prior = np.clip(y.mean(), 1e-6, 1 - 1e-6)
    model = GbtModel(params, float(np.log(prior / (1 - prior))), d)
    sorted_idx = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable"))
    n_rows = max(1, int(round(params.subsample * n)))
    n_cols = max(1, int(round(params.colsample * d)))
    margin = np.full(n, model.base_score)
    for _ in range(params.n_trees):
        p = sigmoid(margin)
        g = p - y
        h = p * (1 - p)
        rows = np.sort(rng.choice(n, n_rows, replace=False)) if n_rows < n else np.arange(n)
        cols = np.sort(rng.choice(d, n_cols, replace=False)) if n_cols < d else np.arange(d)
        tree = grow_tree(X, sorted_idx, rows, g, h, cols, params.max_depth, params.l2_lambda)
        model.trees.append(tree)
        margin += params.learning_rate * tree.predict(X)
        model.train_loss.append(log_loss(y, sigmoid(margin)))
    return model


def gbt_predict(m: GbtModel, x) -> tuple[float, int]:
    p = float(m.predict_proba(np.asarray(x, dtype=np.float64)[None, :])[0])
    return p, int(p >= 0.5)


class GBTClassifier:
    """Binary classifier on {0, 1} labels."""

    def __init__(self, params: GbtParams = GbtParams()):
        self.params = params
        self.model_ = None

    def fit(self, X, y):
        self.model_ = gbt_fit(X, y, self.params)
        return self

    def decision_function(self, X):
        return self.model_.margin(X)

    def predict(self, X):
        return self.model_.predict(X)

"""Seeded problem generators shared by the unit and acceptance tests."""

import numpy as np


def svm_problem(seed, n=20, d=5):
    """Two overlapping Gaussian clouds, z-scored per column, labels alternating +-1."""
    rng = np.random.default_rng(seed)
    y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    X = rng.standard_normal((n, d)) + 0.5 * y[:, None]
    X = (X - X.mean(axis=0)) / X.std(axis=0)
    return X, y


def annulus(seed, n_per_class=100, noise=0.1):
    """Inner disc (class 1) inside an outer ring (class 0): not linearly separable."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi, 2 * n_per_class)
    r = np.r_[rng.uniform(0, 1, n_per_class), rng.uniform(2, 3, n_per_class)]
    X = np.c_[r * np.cos(theta), r * np.sin(theta)] + noise * rng.standard_normal((2 * n_per_class, 2))
    y = np.r_[np.ones(n_per_class, dtype=np.int64), np.zeros(n_per_class, dtype=np.int64)]
    return X, y


def gbt_problem(seed, n=50, d=5):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    X[:, -1] = np.round(X[:, -1])  # a column with ties
    y = (X[:, 0] + X[:, 1] ** 2 + 0.5 * rng.standard_normal(n) > 0.8).astype(np.int64)
    return X, y


def replay_split_gains(model, X, y, oracle):
    """Re-derive every node's gradients/hessians and compare to ``oracle``.

    Yields ``(fitted_gain, oracle_gain, is_split)`` for every node that could have split.
    """
    from eegadhd.model.gbt import sigmoid

    lam = model.params.l2_lambda
    margin = np.full(len(X), model.base_score)
    for tree in model.trees:
        p = sigmoid(margin)
        g, h = p - y, p * (1 - p)
        reach = {0: np.arange(len(X))}
        depth = {0: 0}
        for node in range(len(tree.feature)):
            rows = reach[node]
            if tree.feature[node] >= 0:
                _, _, og = oracle(X[rows][:, tree.columns], g[rows], h[rows], lam)
                yield tree.gain[node], og, True
                go_left = X[rows, tree.feature[node]] < tree.threshold[node]
                reach[tree.left[node]] = rows[go_left]
                reach[tree.right[node]] = rows[~go_left]
                depth[tree.left[node]] = depth[tree.right[node]] = depth[node] + 1
            elif depth[node] < model.params.max_depth:
                _, _, og = oracle(X[rows][:, tree.columns], g[rows], h[rows], lam)
                yield 0.0, og, False
        margin = margin + model.params.learning_rate * tree.predict(X)

"""Slow brute-force reference implementations used to check the fast paths.

Nothing here shares code with the production kernels: the DFT is a literal double
sum, the SVM dual is solved by projected gradient ascent, and splits are found by
trying every threshold with boolean masks.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .spectral import PsdEstimate


def oracle_dft_psd(x, n_w: int, fs: float) -> PsdEstimate:
    """Periodogram of the first ``n_w`` samples via an explicit O(N^2) DFT."""
    if n_w > 1024:
        raise ValidationError("oracle DFT capped at 1024 samples")
    x = np.asarray(x, dtype=np.float64)[:n_w]
    n = np.arange(n_w)
    freqs_k = np.arange(n_w // 2 + 1)
    vals = np.empty(len(freqs_k))
    for k in freqs_k:
        re = np.sum(x * np.cos(2 * np.pi * k * n / n_w))
        im = -np.sum(x * np.sin(2 * np.pi * k * n / n_w))
        p = (re * re + im * im) / (n_w * fs)
        if 0 < k < n_w / 2:
            p *= 2
        vals[k] = p
    return PsdEstimate(freqs_k * fs / n_w, vals)


def _project(v, y, C):
    """Euclidean projection onto {0 <= a <= C, y.a = 0} by locating the multiplier exactly."""
    # a(mu) = clip(v - mu*y, 0, C); phi(mu) = y.a(mu) is non-increasing and piecewise linear
    knots = np.unique(np.concatenate([v * y, (v - C) * y]))

    def phi(mu):
        return np.clip(v[None, :] - np.outer(mu, y), 0, C) @ y

    vals = phi(knots)
    if vals[0] < 0 or vals[-1] > 0:
        raise AssertionError("projection bracket failed")
    k = np.searchsorted(-vals, 0.0)  # first knot with phi <= 0
    if vals[k] == 0 or k == 0:
        mu = knots[k]
    else:
        lo, hi = knots[k - 1], knots[k]
        mu = lo + (hi - lo) * vals[k - 1] / (vals[k - 1] - vals[k])
    return np.clip(v - mu * y, 0, C)


def oracle_qp_svm(K, y, C, max_iter=200_000, tol=1e-12):
    """Maximise the soft-margin dual by accelerated projected gradient ascent.

    Returns ``(objective, alpha)``. Works from a precomputed Gram matrix ``K``.
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(y) > 100:
        raise ValidationError("oracle QP capped at 100 points")
    Q = K * np.outer(y, y)
    L = max(np.linalg.eigvalsh(Q).max(), 1e-12)
    step = 1.0 / L

    def obj(a):
        return a.sum() - 0.5 * a @ Q @ a

    a = _project(np.zeros(len(y)), y, C)
    z = a.copy()
    t = 1.0
    f_prev = obj(a)
    for _ in range(max_iter):
        a_new = _project(z + step * (1.0 - Q @ z), y, C)
        f_new = obj(a_new)
        if f_new < f_prev:  # restart momentum on a non-ascent step
            z = a.copy()
            t = 1.0
            a_new = _project(a + step * (1.0 - Q @ a), y, C)
            f_new = obj(a_new)
        t_new = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        z = a_new + (t - 1) / t_new * (a_new - a)
        done = np.max(np.abs(a_new - a)) < tol
        a, t, f_prev = a_new, t_new, f_new
        if done:
            break
    return float(obj(a)), a


def oracle_split_search(rows, gradients, hessians, lam):
    """Best axis-aligned split by trying every midpoint threshold on every column.

    Returns ``(feature, threshold, gain)``; ``feature`` is -1 when no split exists.
    Gain is ``0.5 * (GL^2/(HL+lam) + GR^2/(HR+lam) - G^2/(H+lam))``.
    """
    rows = np.asarray(rows, dtype=np.float64)
    g = np.asarray(gradients, dtype=np.float64)
    h = np.asarray(hessians, dtype=np.float64)
    G, H = g.sum(), h.sum()
    parent = G * G / (H + lam)
    best = (-1, np.nan, -np.inf)
    for f in range(rows.shape[1]):
        vals = np.unique(rows[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            left = rows[:, f] <= lo
            gl, hl = g[left].sum(), h[left].sum()
            gr, hr = g[~left].sum(), h[~left].sum()
            gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent)
            if gain > best[2]:
                best = (f, 0.5 * (lo + hi), gain)
    return best

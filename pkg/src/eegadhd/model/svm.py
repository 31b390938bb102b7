"""Soft-margin kernel SVM trained with Platt's sequential minimal optimisation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .. import _accel
from ..errors import ConvergenceError, ValidationError

KERNELS = ("linear", "rbf", "poly", "sigmoid")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma_mode: str = "scale"
    gamma: float = 0.0
    degree: int = 3
    coef0: float = 0.0

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValidationError(f"unknown kernel {self.kind!r}; expected one of {KERNELS}")
        if self.gamma_mode not in ("scale", "fixed"):
            raise ValidationError(f"gamma_mode must be 'scale' or 'fixed', got {self.gamma_mode!r}")
        if self.gamma_mode == "fixed" and not self.gamma > 0:
            raise ValidationError("fixed gamma must be > 0")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValidationError("poly degree must be a positive integer")

    def resolve(self, X) -> "KernelSpec":
        """Pin ``gamma='scale'`` to a number computed from the training matrix."""
        if self.gamma_mode == "fixed":
            return self
        return replace(self, gamma_mode="fixed", gamma=gamma_scale(X))


def gamma_scale(X) -> float:
    """``1 / (n_features * Var(X))`` with the variance pooled over every entry."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.size == 0:
        raise ValidationError("gamma_scale on an empty matrix")
    var = X.var()
    if var == 0:
        raise ValidationError("gamma_scale: zero variance")
    return 1.0 / (X.shape[1] * var)


def _need_gamma(spec):
    if spec.kind != "linear" and spec.gamma_mode != "fixed":
        raise ValidationError("kernel gamma unresolved; call KernelSpec.resolve(X) first")


def kernel_eval(spec: KernelSpec, u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValidationError(f"dimension mismatch: {u.shape} vs {v.shape}")
    _need_gamma(spec)
    if spec.kind == "linear":
        return float(u @ v)
    if spec.kind == "rbf":
        d = u - v
        return float(np.exp(-spec.gamma * (d @ d)))
    if spec.kind == "poly":
        return float((spec.gamma * (u @ v) + spec.coef0) ** spec.degree)
    return float(np.tanh(spec.gamma * (u @ v) + spec.coef0))


def kernel_matrix(spec: KernelSpec, A, B=None) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    same = B is None
    B = A if same else np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise ValidationError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]} features")
    _need_gamma(spec)
    dot = A @ B.T
    if spec.kind == "linear":
        return dot
    if spec.kind == "rbf":
        sq = np.einsum("ij,ij->i", A, A)[:, None] + np.einsum("ij,ij->i", B, B)[None, :] - 2 * dot
        np.maximum(sq, 0.0, out=sq)
        if same:
            np.fill_diagonal(sq, 0.0)
            sq = 0.5 * (sq + sq.T)
        return np.exp(-spec.gamma * sq)
    if spec.kind == "poly":
        return (spec.gamma * dot + spec.coef0) ** spec.degree
    return np.tanh(spec.gamma * dot + spec.coef0)


# --- SMO kernel -------------------------------------------------------------
# Decision function f(x) = sum_j alpha_j y_j K(x_j, x) + b; err[i] = f(x_i) - y_i is kept
# up to date for every point after each successful pair update.

@_accel.jit
def _lcg(state):
    return (state * 1103515245 + 12345) % 2147483648


@_accel.jit
def _snap(a, C):
    tol = 1e-12 * C
    if a < tol:
        return 0.0
    if a > C - tol:
        return C
    return a


@_accel.jit
def _take_step(i1, i2, alpha, err, K, y, C, b, eps):
    if i1 == i2:
        return False, b
    a1_old = alpha[i1]
    a2_old = alpha[i2]
    y1 = y[i1]
    y2 = y[i2]
    e1 = err[i1]
    e2 = err[i2]
    s = y1 * y2
    if s < 0:
        lo = max(0.0, a2_old - a1_old)
        hi = min(C, C + a2_old - a1_old)
    else:
        lo = max(0.0, a1_old + a2_old - C)
        hi = min(C, a1_old + a2_old)
    if hi - lo < 1e-12:
        return False, b
    k11 = K[i1, i1]
    k12 = K[i1, i2]
    k22 = K[i2, i2]
    eta = k11 + k22 - 2.0 * k12
    slope = y2 * (e1 - e2)
    if eta > 1e-12:
        a2 = min(max(a2_old + slope / eta, lo), hi)
    else:
        # dual gain along the constraint line is slope*t - eta*t^2/2; take the better end
        t_lo = lo - a2_old
        t_hi = hi - a2_old
        w_lo = slope * t_lo - 0.5 * eta * t_lo * t_lo
        w_hi = slope * t_hi - 0.5 * eta * t_hi * t_hi
        if w_lo > w_hi + eps:
            a2 = lo
        elif w_hi > w_lo + eps:
            a2 = hi
        else:
            a2 = a2_old
    # rounding in lo/hi and in the pair constraint leaves values a hair off a bound
    a2 = _snap(a2, C)
    if abs(a2 - a2_old) < eps * (a2 + a2_old + eps):
        return False, b
    a1 = a1_old + s * (a2_old - a2)
    if a1 != _snap(a1, C):
        a1 = _snap(a1, C)
        a2 = _snap(min(max(a2_old + s * (a1_old - a1), lo), hi), C)

    d1 = y1 * (a1 - a1_old)
    d2 = y2 * (a2 - a2_old)
    b1 = b - e1 - d1 * k11 - d2 * k12
    b2 = b - e2 - d1 * k12 - d2 * k22
    if 0.0 < a1 < C:
        b_new = b1
    elif 0.0 < a2 < C:
        b_new = b2
    else:
        b_new = 0.5 * (b1 + b2)
    err += d1 * K[i1] + d2 * K[i2] + (b_new - b)
    alpha[i1] = a1
    alpha[i2] = a2
    return True, b_new


@_accel.jit
def _examine(i2, alpha, err, K, y, C, b, tol, eps, state):
    a2 = alpha[i2]
    r2 = err[i2] * y[i2]
    if not ((r2 < -tol and a2 < C) or (r2 > tol and a2 > 0.0)):
        return False, b, state
    n = alpha.shape[0]
    free = (alpha > 0.0) & (alpha < C)
    if free.sum() > 1:
        gap = np.abs(err - err[i2])
        gap[~free] = -1.0
        ok, b = _take_step(int(np.argmax(gap)), i2, alpha, err, K, y, C, b, eps)
        if ok:
            return True, b, state
    state = _lcg(state)
    start = state % n
    for k in range(n):
        i1 = (start + k) % n
        if free[i1]:
            ok, b = _take_step(i1, i2, alpha, err, K, y, C, b, eps)
            if ok:
                return True, b, state
    state = _lcg(state)
    start = state % n
    for k in range(n):
        ok, b = _take_step((start + k) % n, i2, alpha, err, K, y, C, b, eps)
        if ok:
            return True, b, state
    return False, b, state


@_accel.jit
def _smo(K, y, C, tol, eps, max_passes, max_iter, seed):
    n = y.shape[0]
    alpha = np.zeros(n)
    err = -y.copy()
    b = 0.0
    state = seed % 2147483648
    n_updates = 0
    quiet = 0
    examine_all = True
    converged = True
    while True:
        changed = 0
        for i in range(n):
            if examine_all or (0.0 < alpha[i] < C):
                ok, b, state = _examine(i, alpha, err, K, y, C, b, tol, eps, state)
                if ok:
                    changed += 1
        n_updates += changed
        if n_updates > max_iter:
            converged = False
            break
        if examine_all:
            if changed == 0:
                quiet += 1
                if quiet >= max_passes:
                    break
            else:
                quiet = 0
                examine_all = False
        elif changed == 0:
            examine_all = True
    return alpha, _final_bias(alpha, K, y, C, b), n_updates, converged


@_accel.jit
def _final_bias(alpha, K, y, C, b):
    # The running Platt threshold is only pinned down by free vectors. Re-derive it as the
    # value minimising the worst KKT violation: free vectors want b = y_i - g_i exactly,
    # bound vectors give one-sided limits.
    g = K @ (alpha * y)
    lo = -np.inf  # b must be >= every lower limit
    hi = np.inf
    for i in range(y.shape[0]):
        target = y[i] - g[i]
        if 0.0 < alpha[i] < C:
            lo = max(lo, target)
            hi = min(hi, target)
        elif (alpha[i] <= 0.0) == (y[i] > 0):
            lo = max(lo, target)
        else:
            hi = min(hi, target)
    if np.isfinite(lo) and np.isfinite(hi):
        return 0.5 * (lo + hi)
    if np.isfinite(lo):
        return max(b, lo)
    if np.isfinite(hi):
        return min(b, hi)
    return b


def smo_solve(K, y, C=1.0, tol=1e-3, eps=1e-8, max_passes=10, max_iter=1_000_000, seed=0):
    """Run SMO on a precomputed Gram matrix. Returns ``(alpha, b, n_updates, converged)``."""
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    return _smo(K, y, float(C), float(tol), float(eps), int(max_passes), int(max_iter), int(seed))


def dual_objective(alpha, y, K) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def kkt_violation(alpha, y, K, b, C) -> float:
    """Largest KKT violation of ``y_i f(x_i)`` against the margin conditions."""
    m = y * (K @ (alpha * y) + b)
    viol = np.where(alpha <= 0, np.maximum(0, 1 - m),
                    np.where(alpha >= C, np.maximum(0, m - 1), np.abs(m - 1)))
    return float(viol.max()) if viol.size else 0.0


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    dual_coeffs: np.ndarray  # alpha_i * y_i
    bias: float
    kernel: KernelSpec  # gamma resolved
    C: float = 1.0
    support_indices: np.ndarray = field(default=None, repr=False)
    n_updates: int = 0

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.support_vectors.shape[1]:
            raise ValidationError(
                f"dimension mismatch: model has {self.support_vectors.shape[1]} features, "
                f"input has {X.shape[1]}")
        return kernel_matrix(self.kernel, X, self.support_vectors) @ self.dual_coeffs + self.bias

    def predict(self, X) -> np.ndarray:
        """Labels in {-1, +1}; a zero score counts as +1."""
        return np.where(self.decision_function(X) >= 0, 1, -1)


def svm_fit(X, y, kernel: KernelSpec = KernelSpec(), C: float = 1.0, tol: float = 1e-3,
            max_passes: int = 10, max_iter: int = 1_000_000, seed: int = 0) -> SvmModel:
    """Fit on labels in {-1, +1}."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if len(X) != len(y):
        raise ValidationError("X and y differ in length")
    if not set(np.unique(y)) <= {-1.0, 1.0}:
        raise ValidationError("SVM labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise ValidationError("SVM training needs both classes")
    if not C > 0:
        raise ValidationError("C must be > 0")
    kernel = kernel.resolve(X)
    K = kernel_matrix(kernel, X)
    alpha, b, n_updates, converged = smo_solve(K, y, C, tol, max_passes=max_passes,
                                               max_iter=max_iter, seed=seed)
    if not converged:
        raise ConvergenceError(
            f"SMO hit the {max_iter}-update cap; dual objective {dual_objective(alpha, y, K):.6g}, "
            f"max KKT violation {kkt_violation(alpha, y, K, b, C):.3g}",
            best=(alpha, b))
    sv = np.flatnonzero(alpha > 0)
    return SvmModel(X[sv].copy(), alpha[sv] * y[sv], float(b), kernel, float(C), sv, int(n_updates))


def svm_predict(m: SvmModel, x) -> tuple[float, int]:
    score = float(m.decision_function(np.asarray(x, dtype=np.float64)[None, :])[0])
    return score, 1 if score >= 0 else -1


class SVC:
    """Binary classifier on {0, 1} labels (1 = positive / ADHD)."""

    def __init__(self, kernel: KernelSpec = KernelSpec(), C: float = 1.0, tol: float = 1e-3,
                 max_passes: int = 10, max_iter: int = 1_000_000):
        self.kernel = kernel
        self.C = C
        self.tol = tol
        self.max_passes = max_passes
        self.max_iter = max_iter
        self.model_ = None

    def fit(self, X, y):
        y = np.asarray(y)
        self.model_ = svm_fit(X, np.where(y == 1, 1.0, -1.0), self.kernel, self.C, self.tol,
                              self.max_passes, self.max_iter)
        return self

    def decision_function(self, X):
        return self.model_.decision_function(X)

    def predict(self, X):
        return (self.decision_function(X) >= 0).astype(np.int64)

"""Soft-margin RBF SVM trained by sequential minimal optimization.

Kernel convention: k(x, y) = exp(-sigma * ||x - y||^2), sigma multiplying.
The dual is solved to a KKT tolerance of 1e-3 with Platt's two-level
examine loop; the second multiplier maximizes |E1 - E2| with index
tie-breaks so the optimization is deterministic.  Probabilities come from
Platt scaling fit on decision values gathered by an internal 3-fold CV.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DataError

KKT_TOL = 1e-3
EPS = 1e-12
MAX_PASSES = 1_000_000


@dataclass(frozen=True)
class SvmParams:
    c: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.c <= 0 or self.sigma <= 0:
            raise DataError("C and sigma must be > 0")


def rbf_kernel(A, B, sigma: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    sq = (A**2).sum(axis=1)[:, None] + (B**2).sum(axis=1)[None, :] - 2.0 * A @ B.T
    return np.exp(-sigma * np.maximum(sq, 0.0))


class _Smo:
    """Platt-style SMO on a precomputed kernel matrix."""

    def __init__(self, K, y, c):
        self.K = K
        self.y = y.astype(float)  # -1 / +1
        self.c = c
        self.n = len(y)
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        self.errors = -self.y.copy()  # f(x_i) - y_i with alpha = 0, b = 0

    def _f(self, i):
        return (self.alpha * self.y) @ self.K[:, i] + self.b

    def _take_step(self, i1, i2):
        if i1 == i2:
            return False
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        e1, e2 = self.errors[i1], self.errors[i2]
        s = y1 * y2
        if s > 0:
            lo, hi = max(0.0, a1 + a2 - self.c), min(self.c, a1 + a2)
        else:
            lo, hi = max(0.0, a2 - a1), min(self.c, self.c + a2 - a1)
        if hi - lo < EPS:
            return False
        k11, k12, k22 = self.K[i1, i1], self.K[i1, i2], self.K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta <= EPS:
            # duplicate points (RBF eta >= 0): no progress possible here
            return False
        a2_new = a2 + y2 * (e1 - e2) / eta
        a2_new = min(max(a2_new, lo), hi)
        if abs(a2_new - a2) < EPS * (a2_new + a2 + EPS):
            return False
        a1_new = a1 + s * (a2 - a2_new)

        b1 = self.b - e1 - y1 * (a1_new - a1) * k11 - y2 * (a2_new - a2) * k12
        b2 = self.b - e2 - y1 * (a1_new - a1) * k12 - y2 * (a2_new - a2) * k22
        if 0.0 < a1_new < self.c:
            b_new = b1
        elif 0.0 < a2_new < self.c:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0

        delta1 = y1 * (a1_new - a1)
        delta2 = y2 * (a2_new - a2)
        self.errors += delta1 * self.K[i1] + delta2 * self.K[i2] + (b_new - self.b)
        self.alpha[i1] = a1_new
        self.alpha[i2] = a2_new
        self.b = b_new
        return True

    def _examine(self, i2):
        y2, a2, e2 = self.y[i2], self.alpha[i2], self.errors[i2]
        r2 = e2 * y2
        if not ((r2 < -KKT_TOL and a2 < self.c) or (r2 > KKT_TOL and a2 > 0)):
            return False
        non_bound = np.flatnonzero((self.alpha > 0) & (self.alpha < self.c))
        if non_bound.size > 1:
            gaps = np.abs(self.errors[non_bound] - e2)
            i1 = int(non_bound[np.argmax(gaps)])
            if self._take_step(i1, i2):
                return True
        for i1 in non_bound:
            if self._take_step(int(i1), i2):
                return True
        for i1 in range(self.n):
            if self._take_step(i1, i2):
                return True
        return False

    def solve(self):
        examinations = 0
        examine_all = True
        changed = 1
        while changed > 0 or examine_all:
            changed = 0
            idx = (
                range(self.n)
                if examine_all
                else np.flatnonzero((self.alpha > 0) & (self.alpha < self.c))
            )
            for i in idx:
                changed += int(self._examine(int(i)))
                examinations += 1
            if examinations >= MAX_PASSES:
                warnings.warn(
                    "SMO hit the iteration cap before KKT convergence",
                    stacklevel=2,
                )
                break
            if examine_all:
                examine_all = False
            elif changed == 0:
                examine_all = True
        return self.alpha, self.b

    def max_kkt_violation(self) -> float:
        """Largest complementary-slackness violation over all multipliers."""
        r = self.errors * self.y  # y_i f(x_i) - 1
        viol = np.zeros(self.n)
        free = (self.alpha > 0) & (self.alpha < self.c)
        viol[self.alpha <= 0] = np.maximum(0.0, -r[self.alpha <= 0])
        viol[self.alpha >= self.c] = np.maximum(0.0, r[self.alpha >= self.c])
        viol[free] = np.abs(r[free])
        return float(viol.max())


def _platt_fit(decision, targets, max_iter=100):
    """Newton fit of P(y=1|f) = 1 / (1 + exp(A f + B)) (Lin et al. 2007)."""
    f = np.asarray(decision, dtype=float)
    t = np.asarray(targets, dtype=float)
    n = len(f)
    a, b = 0.0, float(np.log((n - t.sum() + 1.0) / (t.sum() + 1.0)))
    sigma_min = 1e-12

    def fval(a, b):
        z = a * f + b
        return float(np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-z)),
                                     (t - 1) * z + np.log1p(np.exp(z)))))

    best = fval(a, b)
    for _ in range(max_iter):
        z = a * f + b
        p = 1.0 / (1.0 + np.exp(np.clip(z, -500, 500)))
        d1 = t - p  # note: p here is P(y=1) under current (a,b)
        w = np.maximum(p * (1.0 - p), sigma_min)
        g_a = float((d1 * f).sum())
        g_b = float(d1.sum())
        if max(abs(g_a), abs(g_b)) < 1e-5:
            break
        h_aa = float((w * f * f).sum()) + 1e-12
        h_ab = float((w * f).sum())
        h_bb = float(w.sum()) + 1e-12
        det = h_aa * h_bb - h_ab * h_ab
        da = -(h_bb * g_a - h_ab * g_b) / det
        db = -(-h_ab * g_a + h_aa * g_b) / det
        step = 1.0
        while step >= 1e-10:
            cand = fval(a + step * da, b + step * db)
            if cand < best + 1e-12:
                a += step * da
                b += step * db
                best = cand
                break
            step /= 2.0
        else:
            break
    return a, b


class SvmModel:
    algorithm = "SVM"

    def __init__(self, support_x, support_ay, b, sigma, platt_a, platt_b,
                 n_features, kkt_violation):
        self.support_x = support_x
        self.support_ay = support_ay  # alpha_i * y_i for support vectors
        self.b = b
        self.sigma = sigma
        self.platt_a = platt_a
        self.platt_b = platt_b
        self.n_features = n_features
        self.kkt_violation = kkt_violation

    def decision_scores(self, X) -> np.ndarray:
        if len(self.support_ay) == 0:
            return np.full(len(np.asarray(X)), self.b)
        K = rbf_kernel(np.asarray(X, dtype=float), self.support_x, self.sigma)
        return K @ self.support_ay + self.b

    def predict_proba(self, X) -> np.ndarray:
        z = self.platt_a * self.decision_scores(X) + self.platt_b
        return 1.0 / (1.0 + np.exp(np.clip(z, -500, 500)))


def _solve_dual(X, y_pm, params):
    K = rbf_kernel(X, X, params.sigma)
    smo = _Smo(K, y_pm, params.c)
    smo.solve()
    return smo


def train_svm_rbf(X, y, params: SvmParams, rng) -> SvmModel:
    """Fit the C-SVC dual, then Platt-scale decision values from an internal
    3-fold CV (folds drawn from ``rng``) into probabilities."""
    X = np.asarray(X, dtype=float)
    y01 = np.asarray(y, dtype=int)
    y_pm = np.where(y01 == 1, 1.0, -1.0)
    n = len(y01)

    # Regularized Platt targets
    n_pos = int(y01.sum())
    n_neg = n - n_pos
    t_pos = (n_pos + 1.0) / (n_pos + 2.0)
    t_neg = 1.0 / (n_neg + 2.0)
    targets = np.where(y01 == 1, t_pos, t_neg)

    if n >= 6 and n_pos >= 1 and n_neg >= 1:
        perm = rng.permutation(n)
        folds = [perm[i::3] for i in range(3)]
        decision = np.zeros(n)
        for fold in folds:
            mask = np.ones(n, dtype=bool)
            mask[fold] = False
            sub = _solve_dual(X[mask], y_pm[mask], params)
            ay = sub.alpha * sub.y
            Kx = rbf_kernel(X[fold], X[mask], params.sigma)
            decision[fold] = Kx @ ay + sub.b
    else:
        decision = None

    smo = _solve_dual(X, y_pm, params)
    ay_full = smo.alpha * smo.y
    if decision is None:
        decision = smo.K @ ay_full + smo.b
    platt_a, platt_b = _platt_fit(decision, targets)

    sv = np.flatnonzero(smo.alpha > 0)
    return SvmModel(
        support_x=X[sv],
        support_ay=ay_full[sv],
        b=smo.b,
        sigma=params.sigma,
        platt_a=platt_a,
        platt_b=platt_b,
        n_features=X.shape[1],
        kkt_violation=smo.max_kkt_violation(),
    )

"""Stagewise gradient boosting with logistic loss.

The initial score is the log-odds of the training base rate; each stage
fits a squared-error regression tree to the negative log-loss gradient
(y - p), replaces leaf values with a Newton step sum(r) / sum(p(1-p)),
and adds the tree scaled by the learn rate.  Scores are clipped at +-30
before the logistic so no NaN can escape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from . import tree

SCORE_CLIP = 30.0
RATE_CLIP = 1e-6


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -SCORE_CLIP, SCORE_CLIP)))


@dataclass(frozen=True)
class GbmParams:
    n_trees: int = 100
    max_depth: int = 5
    learn_rate: float = 0.1
    min_rows: int = 10                  # minimum rows in a leaf
    min_split_improvement: float = 1e-5

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1 or self.min_rows < 1:
            raise DataError("gbm counts must be >= 1")
        if self.learn_rate <= 0:
            raise DataError("learn_rate must be > 0")


class GbmModel:
    algorithm = "GBM"

    def __init__(self, f0: float, trees_, learn_rate: float, n_features: int,
                 train_logloss):
        self.f0 = f0
        self.trees = trees_
        self.learn_rate = learn_rate
        self.n_features = n_features
        self.train_logloss = train_logloss  # per-stage, monitored during fit

    def decision_scores(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        f = np.full(len(X), self.f0)
        for t in self.trees:
            f += self.learn_rate * tree.predict(t, X)
        return f

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.decision_scores(X))


def train_gbm(X, y, params: GbmParams, rng=None) -> GbmModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    base = float(np.clip(y.mean(), RATE_CLIP, 1.0 - RATE_CLIP))
    f0 = float(np.log(base / (1.0 - base)))
    f = np.full(len(y), f0)

    grow_params = tree.GrowParams(
        criterion="mse",
        max_depth=params.max_depth,
        min_split=max(2 * params.min_rows, 2),
        min_leaf=params.min_rows,
        min_improvement=params.min_split_improvement,
    )
    trees_ = []
    losses = []

    def logloss():
        p = _sigmoid(f)
        p = np.clip(p, RATE_CLIP, 1.0 - RATE_CLIP)
        return float(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)).mean())

    losses.append(logloss())
    for _ in range(params.n_trees):
        p = _sigmoid(f)
        residual = y - p
        weight = p * (1.0 - p)

        def newton_leaf(rows):
            denom = weight[rows].sum()
            if denom <= 0:
                return 0.0
            return float(residual[rows].sum() / denom)

        t = tree.grow(X, residual, grow_params, leaf_value=newton_leaf)
        trees_.append(t)
        f = np.clip(f + params.learn_rate * tree.predict(t, X), -SCORE_CLIP, SCORE_CLIP)
        losses.append(logloss())
    return GbmModel(f0, trees_, params.learn_rate, X.shape[1], tuple(losses))

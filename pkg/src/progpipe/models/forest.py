"""Random forest: bagged Gini trees with per-split feature sampling.

Tree growth reuses the CART grower, including its node-size-to-split
default of 20 rows, so a single unbagged tree with mtry = p and min_rows 7
reproduces an unpruned CART exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from . import tree


@dataclass(frozen=True)
class ForestParams:
    mtry: int = 1
    max_depth: int | None = None
    min_rows: int = 1                  # minimum rows in a leaf
    min_split_improvement: float = 0.0
    n_trees: int = 500
    bootstrap: bool = True

    def __post_init__(self):
        if self.mtry < 1 or self.min_rows < 1 or self.n_trees < 1:
            raise DataError("forest counts must be >= 1")


class ForestModel:
    algorithm = "RF"

    def __init__(self, trees_, n_features: int):
        self.trees = trees_
        self.n_features = n_features

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        acc = np.zeros(len(X))
        for t in self.trees:
            acc += tree.predict(t, X)
        return acc / len(self.trees)

    def impurity_importance(self) -> np.ndarray:
        """Per-feature sum of population-weighted impurity decreases."""
        scores = np.zeros(self.n_features)
        for t in self.trees:
            tree.importance_accumulate(t, scores, t.n)
        return scores


def train_random_forest(X, y, params: ForestParams, rng) -> ForestModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    n, p = X.shape
    grow_params = tree.GrowParams(
        criterion="gini",
        max_depth=params.max_depth,
        min_split=tree.DEFAULT_MIN_SPLIT,
        min_leaf=params.min_rows,
        min_improvement=params.min_split_improvement,
        mtry=min(params.mtry, p),
    )
    trees_ = []
    for _ in range(params.n_trees):
        if params.bootstrap:
            rows = rng.integers(0, n, size=n)
            xb, yb = X[rows], y[rows]
        else:
            xb, yb = X, y
        trees_.append(tree.grow(xb, yb, grow_params, rng=rng))
    return ForestModel(trees_, p)

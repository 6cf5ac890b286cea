"""Classification tree with Gini growth and cost-complexity pruning.

The tuning grid is a whole-number complexity index 1..250; the effective
pruning penalty is index * 1e-4 so the grid spans alpha in (0, 0.025].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from . import tree

CP_UNIT = 1e-4


@dataclass(frozen=True)
class CartParams:
    cp_index: int = 1
    minsplit: int = 20
    minbucket: int = 7
    max_depth: int | None = None
    min_improvement: float = 0.0

    def __post_init__(self):
        if self.cp_index < 0:
            raise DataError("cp_index must be >= 0")
        if self.minsplit < 2 or self.minbucket < 1:
            raise DataError("bad minsplit/minbucket")

    @property
    def alpha(self) -> float:
        return self.cp_index * CP_UNIT


class CartModel:
    algorithm = "CART"

    def __init__(self, root: tree.Node, n_features: int):
        self.root = root
        self.n_features = n_features

    def predict_proba(self, X) -> np.ndarray:
        return tree.predict(self.root, X)


def train_cart(X, y, params: CartParams) -> CartModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    grown = tree.grow(
        X,
        y,
        tree.GrowParams(
            criterion="gini",
            max_depth=params.max_depth,
            min_split=params.minsplit,
            min_leaf=params.minbucket,
            min_improvement=params.min_improvement,
        ),
    )
    pruned = tree.prune(grown, params.alpha, len(y))
    return CartModel(pruned, X.shape[1])

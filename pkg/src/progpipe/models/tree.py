"""Binary decision-tree grower shared by the tree-based classifiers.

Splits are exhaustive over features and midpoint thresholds between sorted
distinct values.  Criterion is Gini impurity for classification trees and
squared error for the regression trees used inside boosting.  Ties in split
quality resolve to the lowest feature index, then the lowest threshold, so
growth is fully deterministic given the (optional) feature-sampling RNG.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Node-count guard: candidate split must leave >= min_leaf rows per child
# and the node itself must hold >= min_split rows.
DEFAULT_MIN_SPLIT = 20
DEFAULT_MIN_LEAF = 7


@dataclass
class Node:
    value: float                 # leaf prediction (positive fraction / leaf score)
    n: int
    impurity: float
    pos: int = 0                 # positive count (classification only)
    feature: int = -1
    threshold: float = 0.0
    improvement: float = 0.0     # node-local impurity decrease of the split
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass(frozen=True)
class GrowParams:
    criterion: str = "gini"          # "gini" | "mse"
    max_depth: int | None = None
    min_split: int = DEFAULT_MIN_SPLIT
    min_leaf: int = DEFAULT_MIN_LEAF
    min_improvement: float = 0.0
    mtry: int | None = None          # features sampled per split; None = all


def _gini(pos: int, n: int) -> float:
    if n == 0:
        return 0.0
    p = pos / n
    return 2.0 * p * (1.0 - p)


def _best_split_gini(X, y, rows, params: GrowParams, rng):
    n = len(rows)
    pos = int(y[rows].sum())
    parent = _gini(pos, n)
    features = _candidate_features(X.shape[1], params.mtry, rng)
    best = None
    for f in features:
        v = X[rows, f]
        order = np.argsort(v, kind="mergesort")
        sv = v[order]
        sy = y[rows][order]
        pos_cum = np.cumsum(sy)
        # candidate boundaries: value changes between consecutive rows
        change = np.flatnonzero(sv[:-1] < sv[1:])
        for b in change:
            n_l = b + 1
            n_r = n - n_l
            if n_l < params.min_leaf or n_r < params.min_leaf:
                continue
            pos_l = int(pos_cum[b])
            gain = parent - (n_l * _gini(pos_l, n_l) + n_r * _gini(pos - pos_l, n_r)) / n
            thr = (sv[b] + sv[b + 1]) / 2.0
            if gain <= 0.0 or gain < params.min_improvement:
                continue
            key = (-gain, f, thr)
            if best is None or key < best[0]:
                best = (key, f, thr, gain)
    return best


def _best_split_mse(X, y, rows, params: GrowParams, rng):
    n = len(rows)
    target = y[rows]
    total = target.sum()
    sse_parent = float(((target - total / n) ** 2).sum())
    features = _candidate_features(X.shape[1], params.mtry, rng)
    best = None
    for f in features:
        v = X[rows, f]
        order = np.argsort(v, kind="mergesort")
        sv = v[order]
        sy = target[order]
        cum = np.cumsum(sy)
        cum2 = np.cumsum(sy**2)
        change = np.flatnonzero(sv[:-1] < sv[1:])
        for b in change:
            n_l = b + 1
            n_r = n - n_l
            if n_l < params.min_leaf or n_r < params.min_leaf:
                continue
            sse_l = float(cum2[b] - cum[b] ** 2 / n_l)
            s_r = total - cum[b]
            sse_r = float((cum2[-1] - cum2[b]) - s_r**2 / n_r)
            gain = (sse_parent - sse_l - sse_r) / n  # variance decrease
            thr = (sv[b] + sv[b + 1]) / 2.0
            if gain <= 0.0 or gain < params.min_improvement:
                continue
            key = (-gain, f, thr)
            if best is None or key < best[0]:
                best = (key, f, thr, gain)
    return best


def _candidate_features(p: int, mtry, rng):
    if mtry is None or mtry >= p:
        return range(p)
    chosen = rng.choice(p, size=mtry, replace=False)
    return sorted(int(f) for f in chosen)


def grow(X, y, params: GrowParams, rng=None, leaf_value=None) -> Node:
    """Grow a tree on rows of X with targets y.

    ``leaf_value(rows)`` overrides the leaf prediction (used for boosting's
    Newton leaf steps); the default is the mean target (= positive fraction
    for 0/1 targets).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    splitter = _best_split_gini if params.criterion == "gini" else _best_split_mse

    def impurity(rows):
        if params.criterion == "gini":
            return _gini(int(y[rows].sum()), len(rows))
        return float(np.var(y[rows]))

    def build(rows, depth):
        n = len(rows)
        value = float(y[rows].mean()) if leaf_value is None else leaf_value(rows)
        node = Node(
            value=value,
            n=n,
            impurity=impurity(rows),
            pos=int(y[rows].sum()) if params.criterion == "gini" else 0,
        )
        if n < params.min_split:
            return node
        if params.max_depth is not None and depth >= params.max_depth:
            return node
        found = splitter(X, y, rows, params, rng)
        if found is None:
            return node
        _, f, thr, gain = found
        mask = X[rows, f] <= thr
        node.feature = f
        node.threshold = thr
        node.improvement = gain
        node.left = build(rows[mask], depth + 1)
        node.right = build(rows[~mask], depth + 1)
        return node

    return build(np.arange(len(y)), 0)


def predict_one(node: Node, x) -> float:
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node.value


def predict(node: Node, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return np.asarray([predict_one(node, row) for row in X])


def _leaves(node: Node):
    if node.is_leaf:
        return [node]
    return _leaves(node.left) + _leaves(node.right)


def _misclass(node: Node) -> int:
    """Resubstitution misclassification count at this node (majority vote)."""
    return min(node.pos, node.n - node.pos)


def prune(root: Node, alpha: float, n_total: int) -> Node:
    """Weakest-link cost-complexity pruning on misclassification risk.

    Repeatedly collapses the internal node(s) with the smallest link value
    g(t) = (R(t) - R(T_t)) / (|leaves(T_t)| - 1) while that minimum is
    <= alpha.  Risk is measured in units of fraction of the training set.
    At alpha = 0 the tree is returned unchanged: zero-gain subtrees are
    kept so an unpruned tree and a tree pruned at zero coincide.
    """
    if alpha <= 0.0:
        return root

    def links(node, acc):
        if node.is_leaf:
            return 1, _misclass(node)
        nl, rl = links(node.left, acc)
        nr, rr = links(node.right, acc)
        leaves, risk = nl + nr, rl + rr
        g = (_misclass(node) - risk) / n_total / (leaves - 1)
        acc.append((g, node))
        return leaves, risk

    while not root.is_leaf:
        acc: list = []
        links(root, acc)
        g_min = min(g for g, _ in acc)
        if g_min > alpha:
            break
        for g, node in acc:
            if g == g_min:
                node.left = node.right = None
                node.feature = -1
    return root


def importance_accumulate(node: Node, scores: np.ndarray, n_total: int) -> None:
    """Add each split's population-weighted impurity decrease to ``scores``."""
    if node.is_leaf:
        return
    scores[node.feature] += node.n / n_total * node.improvement
    importance_accumulate(node.left, scores, n_total)
    importance_accumulate(node.right, scores, n_total)

"""Grid search with stratified inner 5-fold cross-validation.

Ships reference tuning grids as presets, plus named fixed-parameter
presets pinned at known-good per-cohort values for fast runs.  Selection metric
is mean held-out AUC; ties resolve to the earliest combination in declared
order, and every combination is scored on one shared fold partition.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import models
from .errors import DataError
from .metrics import auc
from .rng import PURPOSE_INNER_CV, stream

INNER_FOLDS = 5

# The full GBM ranges are huge; the default preset subsamples them for
# desk-scale runtime, the full integer ranges sit behind full_gbm.
GBM_TREES = (1, 10, 50, 100, 200, 400)
GBM_MIN_ROWS = (1, 5, 10, 20, 40, 50)
GBM_DEPTHS = (25, 50, 75, 100)
GBM_LEARN_RATES = (0.01, 0.11)  # 0.01 to 0.2 by 0.1


def _frange(start_tenths: int, stop_tenths: int, unit: float):
    return tuple(round(i * unit, 10) for i in range(start_tenths, stop_tenths + 1))


@dataclass(frozen=True)
class Grid:
    """Ordered Cartesian grid for one algorithm."""

    algorithm: str
    axes: tuple[tuple[str, tuple], ...]  # (name, values), first axis slowest

    def __post_init__(self):
        if self.algorithm not in models.ALGORITHMS:
            raise DataError(f"unknown algorithm {self.algorithm!r}")
        if not self.axes or any(len(v) == 0 for _, v in self.axes):
            raise DataError("grid axes must be non-empty")

    @property
    def size(self) -> int:
        n = 1
        for _, values in self.axes:
            n *= len(values)
        return n

    def combinations(self):
        """Yield HyperParams in declared order (first axis slowest)."""
        names = [name for name, _ in self.axes]
        cls = models.PARAM_TYPES[self.algorithm]
        for combo in itertools.product(*(v for _, v in self.axes)):
            yield cls(**dict(zip(names, combo)))


def preset_grid(algorithm: str, p: int = 1, full_gbm: bool = False) -> Grid:
    """The reference tuning grid for ``algorithm``; ``p`` is the predictor
    count (needed for the forest's mtry axis).  Degenerate zero values of
    C/sigma are excluded: those axes start at the first positive step."""
    if p < 1:
        raise DataError("p must be >= 1")
    if algorithm == "RF":
        return Grid("RF", (
            ("mtry", tuple(range(1, p + 1))),
            ("max_depth", tuple(range(1, 11))),
            ("min_split_improvement", _frange(1, 20, 0.01)),
            ("min_rows", tuple(range(1, 8))),
        ))
    if algorithm == "SVM":
        return Grid("SVM", (
            ("c", _frange(1, 50, 0.1)),
            ("sigma", _frange(1, 50, 0.1)),
        ))
    if algorithm == "GBM":
        trees = tuple(range(1, 401)) if full_gbm else GBM_TREES
        min_rows = tuple(range(1, 51)) if full_gbm else GBM_MIN_ROWS
        return Grid("GBM", (
            ("n_trees", trees),
            ("max_depth", GBM_DEPTHS),
            ("learn_rate", GBM_LEARN_RATES),
            ("min_rows", min_rows),
        ))
    if algorithm == "EN":
        return Grid("EN", (
            ("lam", _frange(0, 100, 0.1)),
            ("alpha", _frange(0, 100, 0.01)),
        ))
    if algorithm == "GP":
        return Grid("GP", (("sigma", _frange(1, 2000, 0.001)),))
    if algorithm == "CART":
        return Grid("CART", (("cp_index", tuple(range(1, 251))),))
    raise DataError(f"unknown algorithm {algorithm!r}")


# Fixed-parameter presets pinned at known-good per-cohort values; fast to
# run but never asserted as test expectations.
FIXED_PRESETS = {
    "rf_cn": ("RF", dict(mtry=6, max_depth=9, min_rows=1, min_split_improvement=0.06)),
    "rf_mci": ("RF", dict(mtry=6, max_depth=10, min_rows=4, min_split_improvement=0.06)),
    "svm_cn": ("SVM", dict(c=0.2, sigma=0.8)),
    "svm_mci": ("SVM", dict(c=0.1, sigma=0.1)),
    "gbm_cn": ("GBM", dict(n_trees=10, max_depth=50, min_rows=40,
                           learn_rate=0.01, min_split_improvement=1e-5)),
    "gbm_mci": ("GBM", dict(n_trees=100, max_depth=50, min_rows=40,
                            learn_rate=0.01, min_split_improvement=1e-5)),
    "en_cn": ("EN", dict(lam=10.0, alpha=0.0)),
    "en_mci": ("EN", dict(lam=3.0, alpha=0.01)),
    "gp_cn": ("GP", dict(sigma=1.288)),
    "gp_mci": ("GP", dict(sigma=1.191)),
    "cart_cn": ("CART", dict(cp_index=200)),
    "cart_mci": ("CART", dict(cp_index=200)),
}


def fixed_preset(name: str) -> Grid:
    """A single-combination grid pinned at a named preset's values."""
    if name not in FIXED_PRESETS:
        raise DataError(f"unknown preset {name!r}")
    algorithm, values = FIXED_PRESETS[name]
    return Grid(algorithm, tuple((k, (v,)) for k, v in values.items()))


@dataclass(frozen=True)
class TuningResult:
    best: object                      # winning HyperParams
    scores: tuple[float, ...]         # per-combination mean inner-CV AUC
    fold_count: int = INNER_FOLDS


def stratified_kfold(y, k: int, rng) -> list[np.ndarray]:
    """k folds with per-fold class counts within 1 of n_class / k."""
    y = np.asarray(y, dtype=int)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in (1, 0):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        for pos, i in enumerate(idx):
            folds[pos % k].append(int(i))
    return [np.asarray(sorted(f), dtype=int) for f in folds]


def grid_search(X, y, algorithm: str, grid: Grid, master_seed: int,
                path: tuple = ()) -> TuningResult:
    """Score every grid combination by mean held-out AUC on one shared
    stratified 5-fold partition; argmax with first-in-order tie-break.

    ``path`` addresses this search in the seed tree (repeat, fold, ...).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos < INNER_FOLDS or n_neg < INNER_FOLDS:
        raise DataError(
            f"stratified {INNER_FOLDS}-fold needs >= {INNER_FOLDS} rows per "
            f"class, got {n_pos} positive / {n_neg} negative"
        )
    if grid.algorithm != algorithm:
        raise DataError("grid algorithm tag does not match")

    fold_rng = stream(master_seed, *path, PURPOSE_INNER_CV, 0)
    folds = stratified_kfold(y, INNER_FOLDS, fold_rng)
    masks = []
    for fold in folds:
        m = np.zeros(len(y), dtype=bool)
        m[fold] = True
        masks.append(m)

    best_idx = -1
    best_score = -np.inf
    scores = []
    for c_idx, params in enumerate(grid.combinations()):
        fold_aucs = []
        for f_idx, test_mask in enumerate(masks):
            rng = stream(master_seed, *path, PURPOSE_INNER_CV, 1, c_idx, f_idx)
            model = models.train(algorithm, X[~test_mask], y[~test_mask], params, rng)
            probs = models.predict_proba(model, X[test_mask])
            fold_aucs.append(auc(probs, y[test_mask]))
        score = float(np.mean(fold_aucs))
        scores.append(score)
        if score > best_score:
            best_score = score
            best_idx = c_idx
    best = next(itertools.islice(grid.combinations(), best_idx, None))
    return TuningResult(best=best, scores=tuple(scores))

"""Variable-importance reports: forest impurity, elastic-net coefficients,
and model-agnostic permutation importance.

Indicator columns always aggregate back into their parent nominal variable,
and scores are rescaled so the maximum is 100 (unless all raw scores are 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import models, preprocess, tuning
from .errors import DataError
from .metrics import auc
from .rng import PURPOSE_PERMUTE, stream
from .tabular import TabularDataset, split_rows


@dataclass(frozen=True)
class ImportanceReport:
    method: str
    entries: tuple[tuple[str, float], ...]  # (variable, score), nonincreasing


def _aggregate_and_scale(raw: dict, method: str) -> ImportanceReport:
    max_score = max(raw.values()) if raw else 0.0
    if max_score > 0:
        raw = {k: 100.0 * v / max_score for k, v in raw.items()}
    entries = tuple(sorted(raw.items(), key=lambda kv: (-kv[1], kv[0])))
    return ImportanceReport(method=method, entries=entries)


def _by_parent(scores: np.ndarray, parents) -> dict:
    agg: dict = {}
    for parent, score in zip(parents, scores):
        agg[parent] = agg.get(parent, 0.0) + float(score)
    return agg


def rf_impurity_importance(model, parents) -> ImportanceReport:
    """Sum of impurity decreases per feature over all splits and trees,
    aggregated to parent variables; ``parents`` maps design-matrix columns
    to schema variables (PreprocessModel.feature_parents)."""
    if getattr(model, "algorithm", None) != "RF":
        raise DataError("impurity importance needs a random forest model")
    return _aggregate_and_scale(_by_parent(model.impurity_importance(), parents),
                                "rf_impurity")


def en_coefficient_importance(model, parents) -> ImportanceReport:
    """Absolute standardized coefficients, dummies aggregated by sum of
    absolute values."""
    if getattr(model, "algorithm", None) != "EN":
        raise DataError("coefficient importance needs an elastic net model")
    return _aggregate_and_scale(_by_parent(np.abs(model.coef), parents),
                                "en_coefficient")


def permutation_importance(ds: TabularDataset, algorithm: str, params,
                           k_impute: int = 5, seed: int = 0,
                           repeats: int = 10) -> ImportanceReport:
    """Mean out-of-fold AUC drop per schema variable under within-fold
    permutation of that variable's design columns; negative drops floor at 0.
    """
    y = np.asarray(ds.outcome)
    folds = tuning.stratified_kfold(y, 5, stream(seed, PURPOSE_PERMUTE, 0))

    fitted = []
    baseline_probs = np.zeros(ds.n_rows)
    for f_idx, fold in enumerate(folds):
        test_ds, train_ds = split_rows(ds, fold)
        pp = preprocess.fit(train_ds, k_impute)
        x_train, y_train, _ = preprocess.transform(pp, train_ds)
        x_test, _, _ = preprocess.transform(pp, test_ds)
        rng = stream(seed, PURPOSE_PERMUTE, 1, f_idx)
        model = models.train(algorithm, x_train, y_train, params, rng)
        baseline_probs[fold] = models.predict_proba(model, x_test)
        fitted.append((fold, x_test, model, pp))
    baseline_auc = auc(baseline_probs, y)

    variables = [c.name for c in ds.schema.columns]
    drops: dict = {}
    for v_idx, var in enumerate(variables):
        if not any(var in pp.feature_parents for _, _, _, pp in fitted):
            drops[var] = 0.0  # dropped at fit (e.g. constant column)
            continue
        drop_sum = 0.0
        for rep in range(repeats):
            probs = baseline_probs.copy()
            for f_idx, (fold, x_test, model, pp) in enumerate(fitted):
                cols = [j for j, p in enumerate(pp.feature_parents) if p == var]
                rng = stream(seed, PURPOSE_PERMUTE, 2, v_idx, rep, f_idx)
                x_perm = x_test.copy()
                perm = rng.permutation(len(fold))
                x_perm[:, cols] = x_perm[perm][:, cols]
                probs[fold] = models.predict_proba(model, x_perm)
            drop_sum += baseline_auc - auc(probs, y)
        drops[var] = max(0.0, drop_sum / repeats)
    return _aggregate_and_scale(drops, "permutation")

"""Leave-3-rows-out nested cross-validation and its repeated extension.

Rows are shuffled once per run and chunked into N = floor(n / 3) outer
folds; the n mod 3 leftover rows go one each to the earliest folds, so
every fold holds 3 or 4 rows and every row is predicted exactly once.
Per outer fold, preprocessing is fitted on the training complement only,
hyperparameters are tuned by an inner stratified 5-fold grid search, the
winner is refitted on the full training part, and test probabilities are
recorded.  All randomness is pre-derived from the seed tree, so worker
count can never change a result.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import models, preprocess, tuning
from .errors import DataError
from .metrics import MetricsSummary, youden_summary
from .rng import PURPOSE_FOLD_SHUFFLE, PURPOSE_REFIT, stream
from .tabular import TabularDataset, split_rows

MAX_PLAN_ATTEMPTS = 10


@dataclass(frozen=True)
class FoldPlan:
    seed: int
    attempt: int
    fold_of_row: tuple[int, ...]
    n_folds: int

    def fold_rows(self, fold_id: int) -> list[int]:
        return [i for i, f in enumerate(self.fold_of_row) if f == fold_id]


@dataclass(frozen=True)
class OofPredictions:
    probabilities: tuple[float, ...]   # aligned to dataset row order
    fold_of_row: tuple[int, ...]
    winners: tuple                     # winning HyperParams per fold


@dataclass(frozen=True)
class RepeatSummary:
    repeats: tuple[MetricsSummary, ...]
    mean: dict
    sd: dict


def make_fold_plan(n: int, seed: int, attempt: int = 0,
                   path: tuple = ()) -> FoldPlan:
    """Pure function of (n, seed, attempt): shuffle rows, chunk into
    floor(n/3) folds, remainder rows one each to the first folds."""
    if n < 6:
        raise DataError("nested CV needs at least 6 rows")
    n_folds = n // 3
    remainder = n % 3
    rng = stream(seed, *path, PURPOSE_FOLD_SHUFFLE, attempt)
    order = rng.permutation(n)
    fold_of_row = np.empty(n, dtype=int)
    start = 0
    for fold in range(n_folds):
        size = 3 + (1 if fold < remainder else 0)
        fold_of_row[order[start : start + size]] = fold
        start += size
    return FoldPlan(seed, attempt, tuple(int(f) for f in fold_of_row), n_folds)


def _plan_with_coverage(ds: TabularDataset, seed: int, path: tuple) -> FoldPlan:
    """Redraw the plan (incremented sub-seed) until every outer training
    complement holds both classes, at most MAX_PLAN_ATTEMPTS times."""
    y = np.asarray(ds.outcome)
    for attempt in range(MAX_PLAN_ATTEMPTS):
        plan = make_fold_plan(ds.n_rows, seed, attempt, path)
        fold_of_row = np.asarray(plan.fold_of_row)
        ok = True
        for fold in range(plan.n_folds):
            train_y = y[fold_of_row != fold]
            if train_y.min() == train_y.max():
                ok = False
                break
        if ok:
            return plan
    raise DataError(
        f"no fold plan with full class coverage in {MAX_PLAN_ATTEMPTS} attempts"
    )


def _run_fold(args):
    ds, plan, fold, algorithm, grid, k_impute, seed, path = args
    test_rows = plan.fold_rows(fold)
    test_ds, train_ds = split_rows(ds, test_rows)
    model = preprocess.fit(train_ds, k_impute)
    x_train, y_train, _ = preprocess.transform(model, train_ds)
    x_test, _, _ = preprocess.transform(model, test_ds)
    result = tuning.grid_search(
        x_train, y_train, algorithm, grid, seed, path=path + (fold,)
    )
    refit_rng = stream(seed, *path, fold, PURPOSE_REFIT)
    final = models.train(algorithm, x_train, y_train, result.best, refit_rng)
    probs = models.predict_proba(final, x_test)
    return fold, test_rows, [float(p) for p in probs], result.best


def run_nested_cv(ds: TabularDataset, algorithm: str, grid: tuning.Grid,
                  k_impute: int = 5, seed: int = 0, workers: int = 1,
                  path: tuple = ()):
    """Full nested CV; returns (OofPredictions, MetricsSummary).

    ``path`` prefixes the seed tree (the repeat index, when driven by
    run_repeated).  Fold results reduce by fold id, never completion order,
    so any worker count gives bit-identical output.
    """
    y = np.asarray(ds.outcome)
    if y.min() == y.max():
        raise DataError("both classes must be present")
    plan = _plan_with_coverage(ds, seed, path)
    jobs = [
        (ds, plan, fold, algorithm, grid, k_impute, seed, path)
        for fold in range(plan.n_folds)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_fold, jobs, chunksize=4))
    else:
        results = [_run_fold(j) for j in jobs]
    results.sort(key=lambda r: r[0])

    probs = np.full(ds.n_rows, np.nan)
    winners = []
    for fold, test_rows, fold_probs, best in results:
        for i, p in zip(test_rows, fold_probs):
            probs[i] = p
        winners.append(best)
    if np.isnan(probs).any():
        raise DataError("out-of-fold coverage hole")  # partition violated

    oof = OofPredictions(
        probabilities=tuple(float(p) for p in probs),
        fold_of_row=plan.fold_of_row,
        winners=tuple(winners),
    )
    return oof, youden_summary(probs, y)


def summarize_repeats(per_repeat) -> RepeatSummary:
    stats = MetricsSummary.STATS
    mean = {}
    sd = {}
    for s in stats:
        values = np.asarray([getattr(m, s) for m in per_repeat], dtype=float)
        mean[s] = float(values.mean())
        sd[s] = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return RepeatSummary(repeats=tuple(per_repeat), mean=mean, sd=sd)


def run_repeated(ds: TabularDataset, algorithm: str, grid: tuning.Grid,
                 k_impute: int = 5, master_seed: int = 0, n_repeats: int = 2,
                 workers: int = 1):
    """Repeat nested CV; repeat i runs under seed path (i,).  Returns
    (list of OofPredictions, RepeatSummary)."""
    if n_repeats < 2:
        raise DataError("repeated nested CV needs R >= 2")
    oofs = []
    summaries = []
    for repeat in range(n_repeats):
        oof, summary = run_nested_cv(
            ds, algorithm, grid, k_impute, master_seed,
            workers=workers, path=(repeat,),
        )
        oofs.append(oof)
        summaries.append(summary)
    return oofs, summarize_repeats(summaries)

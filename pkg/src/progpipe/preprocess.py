"""Fit-on-train / apply-to-test preprocessing.

Order of operations: drop high-missingness and zero-variance columns,
standardize numerics by train statistics, KNN-impute missing numerics in
standardized space, mode-impute missing nominals, dummy-code nominals with
the first sorted level as the dropped reference.  Everything the transform
needs is captured at fit time, so mutating test rows can never change the
fitted model.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .tabular import Column, TabularDataset

DROP_THRESHOLD = 0.90  # strictly greater than this missing fraction is dropped


@dataclass(frozen=True)
class PreprocessModel:
    """Train-only statistics sufficient to transform any conforming dataset."""

    columns: tuple[Column, ...]          # retained predictors, schema order
    means: tuple[float, ...]             # per retained numeric column
    sds: tuple[float, ...]               # sample SD, n-1 denominator
    reference: np.ndarray                # standardized train numerics, NaN = missing
    k_neighbors: int
    modes: tuple[int, ...]               # per retained nominal column, level index

    @property
    def numeric_columns(self) -> tuple[Column, ...]:
        return tuple(c for c in self.columns if not c.is_nominal)

    @property
    def nominal_columns(self) -> tuple[Column, ...]:
        return tuple(c for c in self.columns if c.is_nominal)

    @property
    def feature_names(self) -> tuple[str, ...]:
        """Design-matrix column order: retained numerics first (schema
        order), then per nominal its non-reference level indicators."""
        names = [c.name for c in self.numeric_columns]
        for c in self.nominal_columns:
            names.extend(f"{c.name}={lvl}" for lvl in c.levels[1:])
        return tuple(names)

    @property
    def feature_parents(self) -> tuple[str, ...]:
        """Schema variable owning each design-matrix column (dummy columns
        map back to their nominal parent)."""
        parents = [c.name for c in self.numeric_columns]
        for c in self.nominal_columns:
            parents.extend([c.name] * (len(c.levels) - 1))
        return tuple(parents)


def _column_values(ds: TabularDataset, j: int):
    return [row[j] for row in ds.cells]


def fit(train: TabularDataset, k_neighbors: int = 5) -> PreprocessModel:
    """Fit preprocessing statistics on the training partition only."""
    if train.n_rows < 2:
        raise DataError("preprocess fit needs at least 2 rows")
    if k_neighbors < 1:
        raise DataError("K must be >= 1")

    retained: list[Column] = []
    means: list[float] = []
    sds: list[float] = []
    modes: list[int] = []
    numeric_obs: list[np.ndarray] = []

    n = train.n_rows
    for j, col in enumerate(train.schema.columns):
        values = _column_values(train, j)
        n_missing = sum(1 for v in values if v is None)
        if n_missing / n > DROP_THRESHOLD:
            continue
        observed = [v for v in values if v is not None]
        if col.is_nominal:
            counts = {}
            for v in observed:
                counts[v] = counts.get(v, 0) + 1
            best = max(counts.items(), key=lambda kv: (kv[1], -kv[0]))[0]
            retained.append(col)
            modes.append(best)
        else:
            if len(observed) < 2:
                continue  # cannot estimate a spread
            arr = np.asarray(observed, dtype=float)
            mu = float(arr.mean())
            sd = float(arr.std(ddof=1))
            if sd == 0.0:
                continue  # zero variance cannot be scaled
            retained.append(col)
            means.append(mu)
            sds.append(sd)
            numeric_obs.append(
                np.asarray([np.nan if v is None else v for v in values], dtype=float)
            )
    if not retained:
        raise DataError("all predictors dropped at fit")

    if numeric_obs:
        ref = np.column_stack(numeric_obs)
        ref = (ref - np.asarray(means)) / np.asarray(sds)
    else:
        ref = np.empty((n, 0))
    return PreprocessModel(
        columns=tuple(retained),
        means=tuple(means),
        sds=tuple(sds),
        reference=ref,
        k_neighbors=k_neighbors,
        modes=tuple(modes),
    )


def masked_distances(reference: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Missingness-aware Euclidean distance from ``target`` to every
    reference row.

    Only features observed in both rows contribute; the sum is rescaled by
    p / p_common to compensate for the narrowed feature set.  Rows sharing
    no observed feature get +inf.
    """
    p = reference.shape[1]
    both = ~np.isnan(reference) & ~np.isnan(target)
    diff = np.where(both, reference - np.where(np.isnan(target), 0.0, target), 0.0)
    common = both.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = (diff**2).sum(axis=1) * (p / common)
    d = np.sqrt(scaled)
    d[common == 0] = np.inf
    return d


def knn_impute_cell(model: PreprocessModel, target: np.ndarray, j: int) -> float:
    """Impute standardized numeric column ``j`` of a standardized target row.

    Takes the K nearest reference rows that observe column j (ties at equal
    distance: lower row index first) and returns the mean of their values.
    Falls back to the train mean (0 in standardized space) with a warning
    when no reference row observes j.
    """
    d = masked_distances(model.reference, target)
    eligible = np.flatnonzero(~np.isnan(model.reference[:, j]) & np.isfinite(d))
    if eligible.size == 0:
        warnings.warn(
            f"no reference row observes numeric column {j}; using train mean",
            stacklevel=2,
        )
        return 0.0
    order = eligible[np.lexsort((eligible, d[eligible]))]
    chosen = order[: model.k_neighbors]
    return float(model.reference[chosen, j].mean())


def transform(model: PreprocessModel, ds: TabularDataset):
    """Apply fitted preprocessing; returns (X, y, feature_names).

    X is fully numeric with no missing values; columns are ordered as
    ``model.feature_names``.
    """
    for col in model.columns:
        found = next((c for c in ds.schema.columns if c.name == col.name), None)
        if found is None or found.levels != col.levels:
            raise DataError(f"dataset does not provide fitted column {col.name!r}")

    n = ds.n_rows
    num_cols = model.numeric_columns
    nom_cols = model.nominal_columns
    num_idx = [ds.schema.column_index(c.name) for c in num_cols]
    nom_idx = [ds.schema.column_index(c.name) for c in nom_cols]

    Z = np.empty((n, len(num_cols)))
    for out_j, j in enumerate(num_idx):
        col = np.asarray(
            [np.nan if row[j] is None else row[j] for row in ds.cells], dtype=float
        )
        Z[:, out_j] = (col - model.means[out_j]) / model.sds[out_j]
    missing = np.isnan(Z)
    for i in np.flatnonzero(missing.any(axis=1)):
        for out_j in np.flatnonzero(missing[i]):
            Z[i, out_j] = knn_impute_cell(model, np.where(missing[i], np.nan, Z[i]), out_j)

    dummy_parts = []
    for out_j, j in enumerate(nom_idx):
        col = model.nominal_columns[out_j]
        levels = np.asarray(
            [model.modes[out_j] if row[j] is None else row[j] for row in ds.cells]
        )
        block = np.zeros((n, len(col.levels) - 1))
        for lvl in range(1, len(col.levels)):
            block[:, lvl - 1] = (levels == lvl).astype(float)
        dummy_parts.append(block)

    X = np.hstack([Z] + dummy_parts) if dummy_parts else Z
    y = np.asarray(ds.outcome, dtype=int)
    return X, y, model.feature_names


def serialize(model: PreprocessModel) -> str:
    """Versioned plain-text artifact reproducing transform bit-exactly."""
    lines = ["progpipe-preprocess v1", f"k={model.k_neighbors}"]
    num_i = nom_i = 0
    for col in model.columns:
        if col.is_nominal:
            lines.append(
                f"nominal,{col.name},{'|'.join(col.levels)},mode={model.modes[nom_i]}"
            )
            nom_i += 1
        else:
            lines.append(
                f"numeric,{col.name},mean={model.means[num_i]!r},sd={model.sds[num_i]!r}"
            )
            num_i += 1
    lines.append(f"reference rows={model.reference.shape[0]} cols={model.reference.shape[1]}")
    for row in model.reference:
        lines.append(",".join("NA" if math.isnan(v) else repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> PreprocessModel:
    lines = text.strip("\n").split("\n")
    if lines[0] != "progpipe-preprocess v1":
        raise DataError("unrecognized preprocess artifact version")
    k = int(lines[1].split("=", 1)[1])
    columns, means, sds, modes = [], [], [], []
    i = 2
    while not lines[i].startswith("reference "):
        kind, rest = lines[i].split(",", 1)
        if kind == "numeric":
            name, mean_s, sd_s = rest.split(",")
            columns.append(Column(name))
            means.append(float(mean_s.split("=", 1)[1]))
            sds.append(float(sd_s.split("=", 1)[1]))
        else:
            name, levels_s, mode_s = rest.split(",")
            columns.append(Column(name, tuple(levels_s.split("|"))))
            modes.append(int(mode_s.split("=", 1)[1]))
        i += 1
    ref_rows = []
    for line in lines[i + 1 :]:
        ref_rows.append([np.nan if tok == "NA" else float(tok) for tok in line.split(",")])
    n_cols = len(means)
    ref = np.asarray(ref_rows, dtype=float) if ref_rows and n_cols else np.empty((len(ref_rows), n_cols))
    if ref.ndim == 1:
        ref = ref.reshape(len(ref_rows), n_cols)
    return PreprocessModel(
        columns=tuple(columns),
        means=tuple(means),
        sds=tuple(sds),
        reference=ref,
        k_neighbors=k,
        modes=tuple(modes),
    )

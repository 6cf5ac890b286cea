"""Typed in-memory tabular dataset with CSV ingestion against a declared schema.

Cells are ``float`` (numeric), ``int`` (nominal level index) or ``None``
(missing).  Nominal levels come from the schema, never inferred from data,
so train/test transforms always agree; a value outside the declared level
list is a load error.  Subject ids are opaque strings and never enter a
design matrix.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

from .errors import DataError

Cell = "float | int | None"


@dataclass(frozen=True)
class Column:
    """One predictor column: numeric when ``levels`` is None, else nominal.

    Nominal levels are a non-empty, strictly sorted tuple of strings.
    """

    name: str
    levels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.levels is not None:
            if len(self.levels) == 0:
                raise DataError(f"column {self.name!r}: empty level list")
            if any(a >= b for a, b in zip(self.levels, self.levels[1:])):
                raise DataError(
                    f"column {self.name!r}: levels must be strictly sorted"
                )

    @property
    def is_nominal(self) -> bool:
        return self.levels is not None


@dataclass(frozen=True)
class Schema:
    """Ordered predictor columns plus outcome/id/missing-token directives."""

    columns: tuple[Column, ...]
    outcome: str
    positive: str
    id_column: str = "subject_id"
    na_token: str = "NA"

    def __post_init__(self):
        names = [c.name for c in self.columns] + [self.outcome, self.id_column]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise DataError(f"duplicate column names: {sorted(dupes)}")

    def column(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise DataError(f"unknown column {name!r}")

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise DataError(f"unknown column {name!r}")


@dataclass(frozen=True)
class TabularDataset:
    """Immutable row-major dataset bound to a Schema.

    ``outcome`` holds 0/1 labels (1 = positive class, i.e. deterioration);
    ``outcome_labels`` keeps the raw strings so a written file round-trips.
    """

    schema: Schema
    cells: tuple[tuple, ...]
    outcome: tuple[int, ...]
    outcome_labels: tuple[str, ...]
    subject_ids: tuple[str, ...]

    def __post_init__(self):
        n_cols = len(self.schema.columns)
        if len(self.cells) < 1:
            raise DataError("dataset must have at least one row")
        if not (len(self.cells) == len(self.outcome) == len(self.subject_ids)):
            raise DataError("row/outcome/id lengths disagree")
        for r, row in enumerate(self.cells):
            if len(row) != n_cols:
                raise DataError(f"row {r}: expected {n_cols} cells, got {len(row)}")
            for c, col in enumerate(self.schema.columns):
                v = row[c]
                if v is None:
                    continue
                if col.is_nominal and not (0 <= v < len(col.levels)):
                    raise DataError(
                        f"row {r}, column {col.name!r}: level index {v} out of range"
                    )
        if any(y not in (0, 1) for y in self.outcome):
            raise DataError("outcome must be binary with no missing entries")

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    @property
    def n_predictors(self) -> int:
        return len(self.schema.columns)


def _parse_cell(raw: str, col: Column, na_token: str, where: str):
    s = raw.strip()
    if s == na_token or s == "":
        return None
    if col.is_nominal:
        try:
            return col.levels.index(s)
        except ValueError:
            raise DataError(
                f"{where}: value {s!r} not in levels of column {col.name!r}"
            ) from None
    try:
        return float(s)
    except ValueError:
        raise DataError(
            f"{where}: unparsable numeric {s!r} in column {col.name!r}"
        ) from None


def load_csv(path, schema: Schema) -> TabularDataset:
    """Read an RFC-4180 CSV whose header matches the schema names as a set."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        expected = {c.name for c in schema.columns} | {schema.outcome, schema.id_column}
        got = set(header)
        if got != expected:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise DataError(
                f"{path}: header mismatch (missing {missing}, unknown {extra})"
            )
        pos = {name: i for i, name in enumerate(header)}
        cells, outcome, outcome_labels, ids = [], [], [], []
        for r, rec in enumerate(reader):
            if len(rec) != len(header):
                raise DataError(f"{path}: row {r}: field count mismatch")
            where = f"{path}: row {r}"
            row = tuple(
                _parse_cell(rec[pos[col.name]], col, schema.na_token, where)
                for col in schema.columns
            )
            raw_y = rec[pos[schema.outcome]].strip()
            if raw_y == schema.na_token or raw_y == "":
                raise DataError(f"{where}: missing outcome cell")
            cells.append(row)
            outcome.append(1 if raw_y == schema.positive else 0)
            outcome_labels.append(raw_y)
            ids.append(rec[pos[schema.id_column]].strip())
    return TabularDataset(
        schema=schema,
        cells=tuple(cells),
        outcome=tuple(outcome),
        outcome_labels=tuple(outcome_labels),
        subject_ids=tuple(ids),
    )


def _format_cell(v, col: Column, na_token: str) -> str:
    if v is None:
        return na_token
    if col.is_nominal:
        return col.levels[v]
    # repr round-trips float64 exactly; trim the trailing ".0" of integers
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def write_csv(ds: TabularDataset, path) -> None:
    """Write the dataset back out; load_csv of the result is cell-identical."""
    sch = ds.schema
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([sch.id_column] + [c.name for c in sch.columns] + [sch.outcome])
        for row, label, sid in zip(ds.cells, ds.outcome_labels, ds.subject_ids):
            writer.writerow(
                [sid]
                + [_format_cell(v, c, sch.na_token) for v, c in zip(row, sch.columns)]
                + [label]
            )


def split_rows(ds: TabularDataset, indices) -> tuple[TabularDataset, TabularDataset]:
    """Split into (indexed rows, complement), both preserving row order."""
    idx = set(indices)
    if not idx:
        raise DataError("empty index set")
    if any(i < 0 or i >= ds.n_rows for i in idx):
        raise DataError("index out of range")
    if len(idx) == ds.n_rows:
        raise DataError("index set covers all rows (empty complement)")

    def take(rows):
        return replace(
            ds,
            cells=tuple(ds.cells[i] for i in rows),
            outcome=tuple(ds.outcome[i] for i in rows),
            outcome_labels=tuple(ds.outcome_labels[i] for i in rows),
            subject_ids=tuple(ds.subject_ids[i] for i in rows),
        )

    part = [i for i in range(ds.n_rows) if i in idx]
    rest = [i for i in range(ds.n_rows) if i not in idx]
    return take(part), take(rest)


def column_missing_fraction(ds: TabularDataset, name: str) -> float:
    """Missing-cell count over row count for one predictor column."""
    j = ds.schema.column_index(name)
    n_missing = sum(1 for row in ds.cells if row[j] is None)
    return n_missing / ds.n_rows


def load_schema(path) -> Schema:
    """Parse the plain-text schema file.

    One column per line as ``name,kind[,level|level|...]`` with kind
    ``numeric`` or ``nominal``, plus ``outcome=``, ``positive=``, ``id=``
    and ``na=`` directives.  Blank lines and ``#`` comments are skipped.
    """
    columns: list[Column] = []
    directives = {"outcome": None, "positive": None, "id": "subject_id", "na": "NA"}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line and "," not in line.split("=", 1)[0]:
                key, _, value = line.partition("=")
                key, value = key.strip(), value.strip()
                if key not in directives:
                    raise DataError(f"{path}:{lineno}: unknown directive {key!r}")
                directives[key] = value
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) < 2:
                raise DataError(f"{path}:{lineno}: expected name,kind")
            name, kind = parts[0], parts[1]
            if kind == "numeric":
                columns.append(Column(name))
            elif kind == "nominal":
                if len(parts) < 3:
                    raise DataError(f"{path}:{lineno}: nominal column needs levels")
                levels = tuple(sorted(set(parts[2].split("|"))))
                columns.append(Column(name, levels))
            else:
                raise DataError(f"{path}:{lineno}: unknown kind {kind!r}")
    if directives["outcome"] is None or directives["positive"] is None:
        raise DataError(f"{path}: outcome= and positive= directives are required")
    return Schema(
        columns=tuple(columns),
        outcome=directives["outcome"],
        positive=directives["positive"],
        id_column=directives["id"],
        na_token=directives["na"],
    )


def write_schema(schema: Schema, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"outcome={schema.outcome}\n")
        fh.write(f"positive={schema.positive}\n")
        fh.write(f"id={schema.id_column}\n")
        fh.write(f"na={schema.na_token}\n")
        for c in schema.columns:
            if c.is_nominal:
                fh.write(f"{c.name},nominal,{'|'.join(c.levels)}\n")
            else:
                fh.write(f"{c.name},numeric\n")

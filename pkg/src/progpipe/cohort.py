"""Cohort construction: baseline/final diagnoses -> two binary-outcome datasets.

Subjects split by baseline diagnosis into a cognitively-normal group (CN_b)
and a mild-cognitive-impairment group (MCI_b); baseline-AD subjects are
dropped.  The outcome is deterioration: for CN_b any worse final diagnosis
(MCI or AD), for MCI_b a final diagnosis of AD.  Months to the last visit
ride along as an ordinary numeric predictor named ``last_visit``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import DataError
from .tabular import Column, Schema, TabularDataset

DIAGNOSES = ("CN", "MCI", "AD")

CN_POSITIVE = "MCI/AD"
CN_NEGATIVE = "CN"
MCI_POSITIVE = "AD"
MCI_NEGATIVE = "CN/MCI"


@dataclass(frozen=True)
class DiagnosisRecord:
    subject_id: str
    baseline: str
    final: str
    months_to_last_visit: int

    def __post_init__(self):
        if self.baseline not in DIAGNOSES:
            raise DataError(f"unknown baseline diagnosis {self.baseline!r}")
        if self.final not in DIAGNOSES:
            raise DataError(f"unknown final diagnosis {self.final!r}")
        if self.months_to_last_visit < 0:
            raise DataError("months_to_last_visit must be nonnegative")


@dataclass(frozen=True)
class CohortLabel:
    cohort: str  # "CN_b" | "MCI_b"
    positive: bool


def collapse_cn(rec: DiagnosisRecord) -> CohortLabel:
    """CN-at-baseline rule: any worse final diagnosis is the positive class."""
    if rec.baseline != "CN":
        raise DataError(f"{rec.subject_id}: baseline is {rec.baseline}, not CN")
    return CohortLabel("CN_b", positive=rec.final in ("MCI", "AD"))


def collapse_mci(rec: DiagnosisRecord) -> CohortLabel:
    """MCI-at-baseline rule: only a final AD diagnosis is positive; reversion
    to CN counts as non-deterioration."""
    if rec.baseline != "MCI":
        raise DataError(f"{rec.subject_id}: baseline is {rec.baseline}, not MCI")
    return CohortLabel("MCI_b", positive=rec.final == "AD")


def load_records(path) -> list[DiagnosisRecord]:
    """Read diagnosis records from CSV with columns
    subject_id, baseline_dx, final_dx, months_to_last_visit."""
    required = ["subject_id", "baseline_dx", "final_dx", "months_to_last_visit"]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(required) - set(reader.fieldnames):
            raise DataError(f"{path}: expected columns {required}")
        out = []
        for r, row in enumerate(reader):
            try:
                months = int(row["months_to_last_visit"])
            except ValueError:
                raise DataError(f"{path}: row {r}: bad months value") from None
            out.append(
                DiagnosisRecord(
                    subject_id=row["subject_id"].strip(),
                    baseline=row["baseline_dx"].strip(),
                    final=row["final_dx"].strip(),
                    months_to_last_visit=months,
                )
            )
    return out


def _with_outcome(ds: TabularDataset, rows, recs, positive, negative, collapse):
    """Subset ds to ``rows``, append last_visit, and set collapsed outcomes."""
    schema = Schema(
        columns=ds.schema.columns + (Column("last_visit"),),
        outcome="deterioration",
        positive=positive,
        id_column=ds.schema.id_column,
        na_token=ds.schema.na_token,
    )
    cells, outcome, labels, ids = [], [], [], []
    for i in rows:
        rec = recs[ds.subject_ids[i]]
        cells.append(ds.cells[i] + (float(rec.months_to_last_visit),))
        lab = collapse(rec)
        outcome.append(1 if lab.positive else 0)
        labels.append(positive if lab.positive else negative)
        ids.append(ds.subject_ids[i])
    return TabularDataset(
        schema=schema,
        cells=tuple(cells),
        outcome=tuple(outcome),
        outcome_labels=tuple(labels),
        subject_ids=tuple(ids),
    )


def build_cohorts(records, predictors: TabularDataset):
    """Partition predictor rows into (CN_b, MCI_b) datasets by baseline
    diagnosis; baseline-AD rows are excluded entirely."""
    recs = {}
    for rec in records:
        if rec.subject_id in recs:
            raise DataError(f"duplicate subject id {rec.subject_id!r}")
        recs[rec.subject_id] = rec
    seen = set(predictors.subject_ids)
    if len(seen) != predictors.n_rows:
        raise DataError("duplicate subject ids in predictor table")
    for sid in recs:
        if sid not in seen:
            raise DataError(f"record for {sid!r} has no predictor row")

    cn_rows, mci_rows = [], []
    for i, sid in enumerate(predictors.subject_ids):
        if sid not in recs:
            raise DataError(f"predictor row {sid!r} has no diagnosis record")
        base = recs[sid].baseline
        if base == "CN":
            cn_rows.append(i)
        elif base == "MCI":
            mci_rows.append(i)
        # baseline AD: dropped
    if not cn_rows or not mci_rows:
        raise DataError("a cohort came out empty")
    cn = _with_outcome(predictors, cn_rows, recs, CN_POSITIVE, CN_NEGATIVE, collapse_cn)
    mci = _with_outcome(
        predictors, mci_rows, recs, MCI_POSITIVE, MCI_NEGATIVE, collapse_mci
    )
    return cn, mci

"""Deterministic generator of cohort-shaped synthetic datasets.

Known ground truth: informative numeric features are unit-variance normals
whose class means differ by a configurable effect size, so a single such
feature has analytic AUC Phi(effect / sqrt(2)).  The positive count is
exact (round(n * fraction)), missingness is MCAR, and the same spec + seed
always yields a byte-identical dataset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DataError
from .rng import PURPOSE_GENERATE, stream
from .tabular import Column, Schema, TabularDataset

POSITIVE_LABEL = "deteriorated"
NEGATIVE_LABEL = "stable"


@dataclass(frozen=True)
class NominalSpec:
    """One nominal feature: sorted levels plus per-class level probabilities."""

    name: str
    levels: tuple[str, ...]
    probs_negative: tuple[float, ...]
    probs_positive: tuple[float, ...]

    def __post_init__(self):
        for probs in (self.probs_negative, self.probs_positive):
            if len(probs) != len(self.levels):
                raise DataError(f"{self.name}: probability/level length mismatch")
            if abs(sum(probs) - 1.0) > 1e-9:
                raise DataError(f"{self.name}: probabilities must sum to 1")


@dataclass(frozen=True)
class SynthSpec:
    n_rows: int = 285
    positive_fraction: float = 0.10
    n_informative: int = 3
    n_noise: int = 40
    effect: float = 1.5              # class mean shift in SD units
    nominals: tuple[NominalSpec, ...] = ()
    missing_rate: float = 0.0        # MCAR, per predictor column
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.positive_fraction < 1.0:
            raise DataError("positive_fraction must be in (0, 1)")
        if self.effect < 0:
            raise DataError("effect must be >= 0")
        if not 0.0 <= self.missing_rate <= 0.95:
            raise DataError("missing_rate must be in [0, 0.95]")
        if self.n_rows < 2 or self.n_informative < 0 or self.n_noise < 0:
            raise DataError("bad synthetic shape")


def analytic_auc(effect: float) -> float:
    """AUC of one informative feature: Phi(effect / sqrt(2))."""
    return 0.5 * (1.0 + math.erf(effect / 2.0))


def generate(spec: SynthSpec):
    """Return (TabularDataset, truth record)."""
    rng = stream(spec.seed, PURPOSE_GENERATE)
    n = spec.n_rows
    # half-up rounding: n=285 at 10% must give 29 positives, not 28
    n_pos = math.floor(n * spec.positive_fraction + 0.5)
    if n_pos == 0 or n_pos == n:
        raise DataError("positive_fraction yields a single-class dataset")
    labels = [1] * n_pos + [0] * (n - n_pos)
    labels = [labels[i] for i in rng.permutation(n)]

    informative = [f"signal{i + 1:02d}" for i in range(spec.n_informative)]
    noise = [f"noise{i + 1:02d}" for i in range(spec.n_noise)]
    columns = [Column(name) for name in informative + noise]
    columns += [Column(ns.name, tuple(sorted(ns.levels))) for ns in spec.nominals]
    schema = Schema(
        columns=tuple(columns),
        outcome="outcome",
        positive=POSITIVE_LABEL,
    )

    cells = []
    for i in range(n):
        shift = spec.effect if labels[i] == 1 else 0.0
        row = [float(rng.normal(shift, 1.0)) for _ in informative]
        row += [float(rng.normal(0.0, 1.0)) for _ in noise]
        for ns in spec.nominals:
            probs = ns.probs_positive if labels[i] == 1 else ns.probs_negative
            drawn = ns.levels[rng.choice(len(ns.levels), p=probs)]
            row.append(tuple(sorted(ns.levels)).index(drawn))
        cells.append(row)

    if spec.missing_rate > 0:
        for j in range(len(columns)):
            for i in range(n):
                if rng.random() < spec.missing_rate:
                    cells[i][j] = None

    ds = TabularDataset(
        schema=schema,
        cells=tuple(tuple(row) for row in cells),
        outcome=tuple(labels),
        outcome_labels=tuple(
            POSITIVE_LABEL if lab == 1 else NEGATIVE_LABEL for lab in labels
        ),
        subject_ids=tuple(f"S{i + 1:05d}" for i in range(n)),
    )
    truth = {
        "informative": tuple(informative),
        "effect": spec.effect,
        "single_feature_auc": analytic_auc(spec.effect),
        "n_positive": n_pos,
    }
    return ds, truth


def table_shape_spec(cohort: str = "CN_b", seed: int = 0,
                     missing_rate: float = 0.05) -> SynthSpec:
    """Preset mirroring the study dataset shapes: 43 predictors and either
    285 rows at 10% positives (CN_b) or 392 rows (MCI_b)."""
    marital = NominalSpec(
        name="marital",
        levels=("Divorced", "Married", "Widowed"),
        probs_negative=(0.2, 0.6, 0.2),
        probs_positive=(0.2, 0.5, 0.3),
    )
    gender = NominalSpec(
        name="gender",
        levels=("F", "M"),
        probs_negative=(0.5, 0.5),
        probs_positive=(0.45, 0.55),
    )
    # 3 informative + 38 noise numerics + 2 nominals = 43 predictors
    if cohort == "CN_b":
        return SynthSpec(n_rows=285, positive_fraction=0.10, n_informative=3,
                         n_noise=38, effect=1.5, nominals=(gender, marital),
                         missing_rate=missing_rate, seed=seed)
    if cohort == "MCI_b":
        return SynthSpec(n_rows=392, positive_fraction=0.30, n_informative=3,
                         n_noise=38, effect=1.5, nominals=(gender, marital),
                         missing_rate=missing_rate, seed=seed)
    raise DataError(f"unknown cohort {cohort!r}")


def write_truth(truth: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("progpipe-truth v1\n")
        fh.write(f"informative={','.join(truth['informative'])}\n")
        fh.write(f"effect={truth['effect']!r}\n")
        fh.write(f"single_feature_auc={truth['single_feature_auc']!r}\n")
        fh.write(f"n_positive={truth['n_positive']}\n")

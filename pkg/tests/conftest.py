import numpy as np
import pytest

from progpipe.tabular import Column, Schema, TabularDataset


def make_dataset(cells, outcome, columns=None, ids=None):
    """Small dataset helper; columns default to numeric f1..fk."""
    k = len(cells[0])
    if columns is None:
        columns = [Column(f"f{j + 1}") for j in range(k)]
    schema = Schema(columns=tuple(columns), outcome="y", positive="pos")
    n = len(cells)
    return TabularDataset(
        schema=schema,
        cells=tuple(tuple(row) for row in cells),
        outcome=tuple(outcome),
        outcome_labels=tuple("pos" if y == 1 else "neg" for y in outcome),
        subject_ids=tuple(ids or [f"S{i:03d}" for i in range(n)]),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_dataset
from progpipe.cohort import (
    DIAGNOSES,
    DiagnosisRecord,
    build_cohorts,
    collapse_cn,
    collapse_mci,
    load_records,
)
from progpipe.errors import DataError


def rec(sid, base, final, months=24):
    return DiagnosisRecord(sid, base, final, months)


class TestCollapseRules:
    @pytest.mark.parametrize(
        "final,positive",
        [("CN", False), ("MCI", True), ("AD", True)],
    )
    def test_cn_baseline(self, final, positive):
        assert collapse_cn(rec("A", "CN", final)).positive is positive

    @pytest.mark.parametrize(
        "final,positive",
        [("AD", True), ("CN", False), ("MCI", False)],
    )
    def test_mci_baseline(self, final, positive):
        assert collapse_mci(rec("A", "MCI", final)).positive is positive

    def test_wrong_baseline_rejected(self):
        with pytest.raises(DataError):
            collapse_cn(rec("A", "MCI", "AD"))
        with pytest.raises(DataError):
            collapse_mci(rec("A", "CN", "AD"))

    @given(
        base=st.sampled_from(DIAGNOSES),
        final=st.sampled_from(DIAGNOSES),
        months=st.integers(0, 240),
    )
    def test_total_on_preconditioned_domain(self, base, final, months):
        r = DiagnosisRecord("A", base, final, months)
        if base == "CN":
            label = collapse_cn(r)
            assert label.positive is (final != "CN")
        elif base == "MCI":
            label = collapse_mci(r)
            assert label.positive is (final == "AD")

    def test_negative_months_rejected(self):
        with pytest.raises(DataError):
            DiagnosisRecord("A", "CN", "CN", -1)


def cohort_fixture(n_cn=2, n_mci=3, n_ad=1):
    records, ids = [], []
    for i in range(n_cn):
        records.append(rec(f"cn{i}", "CN", "MCI" if i == 0 else "CN"))
        ids.append(f"cn{i}")
    for i in range(n_mci):
        records.append(rec(f"mci{i}", "MCI", "AD" if i == 0 else "MCI"))
        ids.append(f"mci{i}")
    for i in range(n_ad):
        records.append(rec(f"ad{i}", "AD", "AD"))
        ids.append(f"ad{i}")
    ds = make_dataset([[float(i)] for i in range(len(ids))],
                      [0] * len(ids), ids=ids)
    return records, ds


class TestBuildCohorts:
    def test_partition_sizes(self):
        records, ds = cohort_fixture()
        cn, mci = build_cohorts(records, ds)
        assert cn.n_rows == 2 and mci.n_rows == 3
        assert not set(cn.subject_ids) & set(mci.subject_ids)
        assert cn.n_rows + mci.n_rows + 1 == len(records)

    def test_outcomes_follow_rules(self):
        records, ds = cohort_fixture()
        cn, mci = build_cohorts(records, ds)
        assert cn.outcome == (1, 0)  # cn0 declined to MCI
        assert mci.outcome == (1, 0, 0)
        assert cn.outcome_labels[0] == "MCI/AD"
        assert mci.outcome_labels[1] == "CN/MCI"

    def test_cn_to_ad_is_positive(self):
        records = [rec("a", "CN", "AD"), rec("b", "MCI", "MCI")]
        ds = make_dataset([[1.0], [2.0]], [0, 0], ids=["a", "b"])
        cn, _ = build_cohorts(records, ds)
        assert cn.outcome == (1,)

    def test_last_visit_attached_as_numeric(self):
        records = [rec("a", "CN", "CN", months=36), rec("b", "MCI", "AD", months=12)]
        ds = make_dataset([[1.0], [2.0]], [0, 0], ids=["a", "b"])
        cn, mci = build_cohorts(records, ds)
        assert cn.schema.columns[-1].name == "last_visit"
        assert cn.cells[0][-1] == 36.0
        assert mci.cells[0][-1] == 12.0

    def test_duplicate_subject_rejected(self):
        records = [rec("a", "CN", "CN"), rec("a", "CN", "AD"), rec("b", "MCI", "MCI")]
        ds = make_dataset([[1.0], [2.0]], [0, 0], ids=["a", "b"])
        with pytest.raises(DataError, match="duplicate"):
            build_cohorts(records, ds)

    def test_unmatched_record_rejected(self):
        records = [rec("a", "CN", "CN"), rec("zz", "MCI", "MCI")]
        ds = make_dataset([[1.0]], [0], ids=["a"])
        with pytest.raises(DataError, match="no predictor row"):
            build_cohorts(records, ds)

    def test_exact_base_rate_under_deterministic_mixing(self):
        # 90/10 mixing: 27 stable CN + 3 decliners -> base rate exactly 0.1
        records = [rec(f"s{i}", "CN", "MCI" if i < 3 else "CN") for i in range(30)]
        records.append(rec("m0", "MCI", "MCI"))
        ds = make_dataset([[float(i)] for i in range(31)], [0] * 31,
                          ids=[r.subject_id for r in records])
        cn, _ = build_cohorts(records, ds)
        assert sum(cn.outcome) / cn.n_rows == pytest.approx(0.1)

    def test_single_visit_subject_retained(self):
        records = [rec("a", "CN", "CN", months=0), rec("b", "MCI", "AD")]
        ds = make_dataset([[1.0], [2.0]], [0, 0], ids=["a", "b"])
        cn, _ = build_cohorts(records, ds)
        assert cn.n_rows == 1 and cn.outcome == (0,)


def test_load_records(tmp_path):
    path = tmp_path / "records.csv"
    path.write_text(
        "subject_id,baseline_dx,final_dx,months_to_last_visit\n"
        "a,CN,MCI,24\nb,MCI,AD,48\n"
    )
    records = load_records(path)
    assert len(records) == 2
    assert records[0].final == "MCI"
    assert records[1].months_to_last_visit == 48


def test_load_records_bad_columns(tmp_path):
    path = tmp_path / "records.csv"
    path.write_text("subject_id,baseline\n" "a,CN\n")
    with pytest.raises(DataError):
        load_records(path)

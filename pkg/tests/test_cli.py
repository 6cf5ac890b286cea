import os

import pytest

from progpipe import synth, tabular
from progpipe.cli import RunConfig, main, parse_config
from progpipe.errors import ConfigError

REPORT_FILES = (
    "metrics.csv",
    "oof_probabilities.csv",
    "roc_points.csv",
    "roc_curve.png",
    "importance.csv",
    "importance.png",
    "run_manifest",
)


@pytest.fixture(scope="module")
def small_cohort(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    spec = synth.SynthSpec(n_rows=36, positive_fraction=0.4, n_informative=1,
                           n_noise=2, effect=2.0, seed=11)
    ds, _ = synth.generate(spec)
    data = root / "cohort.csv"
    schema = root / "cohort.schema"
    tabular.write_csv(ds, data)
    tabular.write_schema(ds.schema, schema)
    grid = root / "grid.txt"
    grid.write_text("cp_index=1,100\n")
    return {"data": str(data), "schema": str(schema), "grid": str(grid)}


class TestParseConfig:
    def test_file_then_override_precedence(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("seed=3\nalgorithm=CART\n# comment\n\nworkers=2\n")
        cfg = parse_config(str(cfg_file), {"seed": 9, "out": "results"})
        assert cfg.seed == 9          # flag wins
        assert cfg.algorithm == "CART"
        assert cfg.workers == 2
        assert cfg.out == "results"

    def test_none_overrides_ignored(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("seed=5\n")
        cfg = parse_config(str(cfg_file), {"seed": None})
        assert cfg.seed == 5

    def test_unknown_key_in_file(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("sed=5\n")
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(str(cfg_file))

    def test_bad_integer(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("seed=soon\n")
        with pytest.raises(ConfigError, match="integer"):
            parse_config(str(cfg_file))

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="not found"):
            parse_config("/no/such/file.cfg")

    def test_validate_requires_paths(self):
        with pytest.raises(ConfigError):
            RunConfig(algorithm="CART").validate()


class TestExitCodes:
    def test_config_error_is_2(self, tmp_path, capsys):
        code = main(["run", "--data", "/absent.csv", "--schema", "/absent.txt",
                     "--algorithm", "CART", "--out", str(tmp_path)])
        assert code == 2
        assert "config" in capsys.readouterr().err

    def test_data_error_is_3(self, tmp_path, small_cohort, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("subject_id,wrong,outcome\nA,1,stable\n")
        code = main(["run", "--data", str(bad), "--schema", small_cohort["schema"],
                     "--algorithm", "CART", "--grid", small_cohort["grid"],
                     "--out", str(tmp_path)])
        assert code == 3
        assert "data" in capsys.readouterr().err

    def test_unknown_grid_is_2(self, tmp_path, small_cohort, capsys):
        code = main(["run", "--data", small_cohort["data"],
                     "--schema", small_cohort["schema"],
                     "--algorithm", "CART", "--grid", "nonsense_preset",
                     "--out", str(tmp_path)])
        assert code == 2


class TestSynthCommand:
    def test_writes_three_files(self, tmp_path, capsys):
        code = main(["synth", "--out", str(tmp_path), "--rows", "30",
                     "--positive-fraction", "0.3", "--noise", "2", "--seed", "1"])
        assert code == 0
        for name in ("synthetic.csv", "synthetic.schema", "synthetic.truth"):
            assert (tmp_path / name).exists()
        assert "30 rows" in capsys.readouterr().out

    def test_deterministic_output(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            assert main(["synth", "--out", str(out), "--rows", "25",
                         "--positive-fraction", "0.2", "--seed", "3"]) == 0
        assert (out_a / "synthetic.csv").read_bytes() == (out_b / "synthetic.csv").read_bytes()


class TestCohortCommand:
    def test_end_to_end(self, tmp_path, capsys):
        data = tmp_path / "pred.csv"
        data.write_text(
            "subject_id,age,outcome\n"
            + "".join(f"s{i},{60 + i},none\n" for i in range(6))
        )
        schema = tmp_path / "pred.schema"
        schema.write_text("outcome=outcome\npositive=any\nage,numeric\n")
        records = tmp_path / "records.csv"
        records.write_text(
            "subject_id,baseline_dx,final_dx,months_to_last_visit\n"
            "s0,CN,CN,24\ns1,CN,MCI,36\ns2,MCI,MCI,24\n"
            "s3,MCI,AD,48\ns4,AD,AD,12\ns5,MCI,CN,24\n"
        )
        code = main(["cohort", "--data", str(data), "--schema", str(schema),
                     "--records", str(records), "--out", str(tmp_path / "cohorts")])
        assert code == 0
        assert "CN_b: 2 rows, MCI_b: 3 rows" in capsys.readouterr().out
        for name in ("cn_b.csv", "cn_b.schema", "mci_b.csv", "mci_b.schema"):
            assert (tmp_path / "cohorts" / name).exists()


class TestRunCommand:
    def test_full_report_set(self, tmp_path, small_cohort):
        out = tmp_path / "run1"
        code = main(["run", "--data", small_cohort["data"],
                     "--schema", small_cohort["schema"],
                     "--algorithm", "CART", "--grid", small_cohort["grid"],
                     "--seed", "2", "--out", str(out)])
        assert code == 0
        for name in REPORT_FILES:
            assert (out / name).exists(), name
        metrics_text = (out / "metrics.csv").read_text()
        assert metrics_text.splitlines()[0] == (
            "model,auc,sensitivity,specificity,accuracy,kappa,threshold"
        )

    def test_rerun_byte_identical(self, tmp_path, small_cohort):
        outs = [tmp_path / "a", tmp_path / "b"]
        for out in outs:
            assert main(["run", "--data", small_cohort["data"],
                         "--schema", small_cohort["schema"],
                         "--algorithm", "CART", "--grid", small_cohort["grid"],
                         "--seed", "4", "--out", str(out)]) == 0
        for name in ("metrics.csv", "oof_probabilities.csv", "roc_points.csv",
                     "importance.csv"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_config_file_driven(self, tmp_path, small_cohort):
        out = tmp_path / "cfg_run"
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            f"data={small_cohort['data']}\nschema={small_cohort['schema']}\n"
            f"algorithm=CART\ngrid={small_cohort['grid']}\nout={out}\nseed=1\n"
        )
        assert main(["run", "--config", str(cfg)]) == 0
        assert (out / "metrics.csv").exists()

    def test_fixed_preset_grid(self, tmp_path, small_cohort):
        out = tmp_path / "preset_run"
        code = main(["run", "--data", small_cohort["data"],
                     "--schema", small_cohort["schema"],
                     "--grid", "en_cn", "--out", str(out)])
        assert code == 0
        manifest = (out / "run_manifest").read_text()
        assert "algorithm=EN" in manifest


class TestRepeatCommand:
    def test_writes_repeat_summary(self, tmp_path, small_cohort):
        out = tmp_path / "rep"
        code = main(["repeat", "--data", small_cohort["data"],
                     "--schema", small_cohort["schema"],
                     "--algorithm", "CART", "--grid", small_cohort["grid"],
                     "--repeats", "2", "--out", str(out)])
        assert code == 0
        text = (out / "repeat_summary.csv").read_text()
        assert text.splitlines()[0] == "statistic,mean,sd,formatted"
        assert len(text.splitlines()) == 6  # five statistics
        import re

        assert re.search(r"auc,.*,\d\.\d\d\(\d\.\d\d\d\)", text)


class TestReportCommand:
    def test_rerender_from_oof(self, tmp_path, small_cohort):
        run_out = tmp_path / "orig"
        assert main(["run", "--data", small_cohort["data"],
                     "--schema", small_cohort["schema"],
                     "--algorithm", "CART", "--grid", small_cohort["grid"],
                     "--out", str(run_out)]) == 0
        rep_out = tmp_path / "rerender"
        code = main(["report", "--oof", str(run_out / "oof_probabilities.csv"),
                     "--out", str(rep_out), "--model-name", "CART"])
        assert code == 0
        assert (rep_out / "metrics.csv").read_bytes() == (
            run_out / "metrics.csv").read_bytes()
        assert (rep_out / "roc_points.csv").read_bytes() == (
            run_out / "roc_points.csv").read_bytes()

    def test_bad_oof_columns_is_3(self, tmp_path):
        bad = tmp_path / "oof.csv"
        bad.write_text("probability,label\n0.5,1\n")
        code = main(["report", "--oof", str(bad), "--out", str(tmp_path / "o")])
        assert code == 3

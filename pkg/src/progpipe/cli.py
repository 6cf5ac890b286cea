"""Command-line front door.

Subcommands: ``synth`` (generate a synthetic cohort), ``cohort`` (derive
the two study datasets from diagnosis records), ``run`` (nested CV),
``repeat`` (repeated nested CV) and ``report`` (re-render tables and
figures from a stored out-of-fold vector).

Configuration comes from an optional plain-text ``key=value`` file with
flags taking precedence.  Exit codes: 0 success, 2 config error, 3 data
error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import __version__, cohort, importance, metrics, models, nestedcv
from . import preprocess, report, synth, tabular, tuning
from .errors import ConfigError, DataError, NumericalError


@dataclass
class RunConfig:
    data: str = ""
    schema: str = ""
    algorithm: str = ""
    grid: str = "preset"          # "preset", a fixed preset name, or file path
    impute_k: int = 5
    seed: int = 0
    repeats: int = 1
    workers: int = 1
    out: str = "."

    def validate(self):
        if not self.data or not self.schema:
            raise ConfigError("data= and schema= are required")
        for path in (self.data, self.schema):
            if not os.path.exists(path):
                raise ConfigError(f"path does not exist: {path}")
        if self.algorithm not in models.ALGORITHMS and self.grid not in tuning.FIXED_PRESETS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.repeats < 1 or self.workers < 1 or self.impute_k < 1:
            raise ConfigError("repeats, workers and impute_k must be >= 1")


_INT_KEYS = {"impute_k", "seed", "repeats", "workers"}


def parse_config(file_path=None, overrides=None) -> RunConfig:
    """Resolve a RunConfig from an optional file plus flag overrides."""
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    if file_path is not None:
        if not os.path.exists(file_path):
            raise ConfigError(f"config file not found: {file_path}")
        with open(file_path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{file_path}:{lineno}: expected key=value")
                key, _, value = line.partition("=")
                key, value = key.strip(), value.strip()
                if key not in known:
                    raise ConfigError(f"{file_path}:{lineno}: unknown key {key!r}")
                _assign(cfg, key, value)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        _assign(cfg, key, value)
    return cfg


def _assign(cfg: RunConfig, key: str, value):
    if key in _INT_KEYS:
        try:
            value = int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r} expects an integer, got {value!r}") from None
    setattr(cfg, key, str(value) if key not in _INT_KEYS else value)


def _resolve_grid(cfg: RunConfig, p: int) -> tuple[str, tuning.Grid]:
    if cfg.grid in tuning.FIXED_PRESETS:
        grid = tuning.fixed_preset(cfg.grid)
        return grid.algorithm, grid
    if cfg.grid == "preset":
        return cfg.algorithm, tuning.preset_grid(cfg.algorithm, p)
    if os.path.exists(cfg.grid):
        return cfg.algorithm, _load_custom_grid(cfg.grid, cfg.algorithm)
    raise ConfigError(f"grid {cfg.grid!r} is neither a preset nor a file")


def _load_custom_grid(path, algorithm: str) -> tuning.Grid:
    """Custom grid file: one ``param=v1,v2,...`` line per axis."""
    axes = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected param=values")
            name, _, values_s = line.partition("=")
            values = []
            for tok in values_s.split(","):
                tok = tok.strip()
                try:
                    values.append(int(tok))
                except ValueError:
                    try:
                        values.append(float(tok))
                    except ValueError:
                        raise ConfigError(
                            f"{path}:{lineno}: bad value {tok!r}"
                        ) from None
            axes.append((name.strip(), tuple(values)))
    try:
        return tuning.Grid(algorithm, tuple(axes))
    except DataError as exc:
        raise ConfigError(str(exc)) from None


def execute(cfg: RunConfig) -> int:
    """Run nested CV (or repeated nested CV when repeats >= 2) and write
    the full report set into the output directory."""
    cfg.validate()
    os.makedirs(cfg.out, exist_ok=True)
    schema = tabular.load_schema(cfg.schema)
    ds = tabular.load_csv(cfg.data, schema)
    algorithm, grid = _resolve_grid(cfg, ds.n_predictors)

    out = lambda name: os.path.join(cfg.out, name)
    if cfg.repeats >= 2:
        oofs, repeat_summary = nestedcv.run_repeated(
            ds, algorithm, grid, cfg.impute_k, cfg.seed, cfg.repeats,
            workers=cfg.workers,
        )
        report.write_repeat_summary_csv(repeat_summary, out("repeat_summary.csv"))
        oof = oofs[0]
        summary = repeat_summary.repeats[0]
    else:
        oof, summary = nestedcv.run_nested_cv(
            ds, algorithm, grid, cfg.impute_k, cfg.seed, workers=cfg.workers
        )

    scores = np.asarray(oof.probabilities)
    labels = np.asarray(ds.outcome)
    curve = metrics.roc_curve(scores, labels)
    report.write_metrics_csv(summary, out("metrics.csv"), algorithm)
    report.write_oof_csv(oof, ds, out("oof_probabilities.csv"))
    report.write_roc_points_csv(curve, out("roc_points.csv"))
    report.render_roc_figure(curve, summary, out("roc_curve.png"))

    imp = _importance_report(ds, algorithm, oof, cfg)
    report.write_importance_csv(imp, out("importance.csv"))
    report.render_importance_figure(imp, out("importance.png"))

    report.write_manifest(out("run_manifest"), {
        "version": __version__,
        "data": cfg.data,
        "schema": cfg.schema,
        "algorithm": algorithm,
        "grid": cfg.grid,
        "impute_k": cfg.impute_k,
        "seed": cfg.seed,
        "repeats": cfg.repeats,
        "workers": cfg.workers,
    })
    return 0


def _importance_report(ds, algorithm, oof, cfg) -> importance.ImportanceReport:
    """Importance from a model refit on the full dataset at the modal
    winning hyperparameters: impurity for forests, coefficients for the
    elastic net, permutation importance otherwise."""
    counts = {}
    for params in oof.winners:
        counts[params] = counts.get(params, 0) + 1
    best = max(counts.items(), key=lambda kv: kv[1])[0]

    if algorithm in ("RF", "EN"):
        pp = preprocess.fit(ds, cfg.impute_k)
        X, y, _ = preprocess.transform(pp, ds)
        from .rng import PURPOSE_REFIT, stream

        model = models.train(algorithm, X, y, best, stream(cfg.seed, PURPOSE_REFIT))
        if algorithm == "RF":
            return importance.rf_impurity_importance(model, pp.feature_parents)
        return importance.en_coefficient_importance(model, pp.feature_parents)
    return importance.permutation_importance(
        ds, algorithm, best, cfg.impute_k, cfg.seed, repeats=5
    )


def _cmd_synth(args) -> int:
    spec = synth.SynthSpec(
        n_rows=args.rows,
        positive_fraction=args.positive_fraction,
        n_informative=args.informative,
        n_noise=args.noise,
        effect=args.effect,
        missing_rate=args.missing_rate,
        seed=args.seed,
    )
    ds, truth = synth.generate(spec)
    os.makedirs(args.out, exist_ok=True)
    tabular.write_csv(ds, os.path.join(args.out, "synthetic.csv"))
    tabular.write_schema(ds.schema, os.path.join(args.out, "synthetic.schema"))
    synth.write_truth(truth, os.path.join(args.out, "synthetic.truth"))
    print(f"wrote {ds.n_rows} rows x {ds.n_predictors} predictors to {args.out}")
    return 0


def _cmd_cohort(args) -> int:
    schema = tabular.load_schema(args.schema)
    predictors = tabular.load_csv(args.data, schema)
    records = cohort.load_records(args.records)
    cn, mci = cohort.build_cohorts(records, predictors)
    os.makedirs(args.out, exist_ok=True)
    for name, part in (("cn_b", cn), ("mci_b", mci)):
        tabular.write_csv(part, os.path.join(args.out, f"{name}.csv"))
        tabular.write_schema(part.schema, os.path.join(args.out, f"{name}.schema"))
    print(f"CN_b: {cn.n_rows} rows, MCI_b: {mci.n_rows} rows")
    return 0


def _cmd_run(args, repeats_default: int) -> int:
    overrides = {
        "data": args.data,
        "schema": args.schema,
        "algorithm": args.algorithm,
        "grid": args.grid,
        "impute_k": args.impute_k,
        "seed": args.seed,
        "repeats": args.repeats,
        "workers": args.workers,
        "out": args.out,
    }
    cfg = parse_config(args.config, overrides)
    if args.repeats is None and cfg.repeats == 1 and repeats_default != 1:
        cfg.repeats = repeats_default
    return execute(cfg)


def _cmd_report(args) -> int:
    """Re-render tables and figures from a stored out-of-fold vector."""
    scores, labels = [], []
    with open(args.oof, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        needed = {"subject_id", "fold_id", "probability", "label"}
        if reader.fieldnames is None or needed - set(reader.fieldnames):
            raise DataError(f"{args.oof}: expected columns {sorted(needed)}")
        for row in reader:
            scores.append(float(row["probability"]))
            labels.append(int(row["label"]))
    summary = metrics.youden_summary(scores, labels)
    curve = metrics.roc_curve(scores, labels)
    os.makedirs(args.out, exist_ok=True)
    report.write_metrics_csv(summary, os.path.join(args.out, "metrics.csv"),
                             args.model_name)
    report.write_roc_points_csv(curve, os.path.join(args.out, "roc_points.csv"))
    report.render_roc_figure(curve, summary, os.path.join(args.out, "roc_curve.png"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="progpipe",
        description="Prognosis modelling pipeline: nested CV over six classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic cohort")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--rows", type=int, default=285)
    p_synth.add_argument("--positive-fraction", type=float, default=0.10)
    p_synth.add_argument("--informative", type=int, default=3)
    p_synth.add_argument("--noise", type=int, default=40)
    p_synth.add_argument("--effect", type=float, default=1.5)
    p_synth.add_argument("--missing-rate", type=float, default=0.0)
    p_synth.add_argument("--seed", type=int, default=0)

    p_cohort = sub.add_parser("cohort", help="derive CN_b / MCI_b datasets")
    p_cohort.add_argument("--data", required=True)
    p_cohort.add_argument("--schema", required=True)
    p_cohort.add_argument("--records", required=True)
    p_cohort.add_argument("--out", required=True)

    for name, repeats in (("run", 1), ("repeat", 100)):
        p = sub.add_parser(
            name,
            help="nested CV" if name == "run" else "repeated nested CV (default R=100)",
        )
        p.add_argument("--config")
        p.add_argument("--data")
        p.add_argument("--schema")
        p.add_argument("--algorithm", choices=models.ALGORITHMS)
        p.add_argument("--grid")
        p.add_argument("--impute-k", dest="impute_k", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--repeats", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--out")
        p.set_defaults(repeats_default=repeats)

    p_report = sub.add_parser("report", help="re-render reports from stored OOF")
    p_report.add_argument("--oof", required=True)
    p_report.add_argument("--out", required=True)
    p_report.add_argument("--model-name", default="model")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "cohort":
            return _cmd_cohort(args)
        if args.command in ("run", "repeat"):
            return _cmd_run(args, args.repeats_default)
        if args.command == "report":
            return _cmd_report(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

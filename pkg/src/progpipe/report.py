"""Report files: delimited outputs plus rendered figures.

Every writer goes through an atomic temp-file + rename, so a failed run
never leaves a partially written report.  The figure renderers (ROC curve,
importance bar chart) sit alongside the CSVs on the report path.
"""

from __future__ import annotations

import os
import tempfile

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .importance import ImportanceReport
from .metrics import MetricsSummary, RocCurve
from .nestedcv import OofPredictions, RepeatSummary
from .tabular import TabularDataset


def _atomic_write(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-report-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_metrics_csv(summary: MetricsSummary, path, model_name: str) -> None:
    """Single-row table in the standard column order."""
    lines = [
        "model,auc,sensitivity,specificity,accuracy,kappa,threshold",
        ",".join([model_name] + [_fmt(getattr(summary, s)) for s in
                                 MetricsSummary.STATS] + [_fmt(summary.threshold)]),
    ]
    _atomic_write(path, "\n".join(lines) + "\n")


def write_repeat_summary_csv(rs: RepeatSummary, path) -> None:
    """Mean and SD columns plus the conventional mean(SD) presentation."""
    lines = ["statistic,mean,sd,formatted"]
    for s in MetricsSummary.STATS:
        lines.append(
            f"{s},{_fmt(rs.mean[s])},{_fmt(rs.sd[s])},"
            f"{rs.mean[s]:.2f}({rs.sd[s]:.3f})"
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def write_oof_csv(oof: OofPredictions, ds: TabularDataset, path) -> None:
    lines = ["subject_id,fold_id,probability,label"]
    for sid, fold, prob, label in zip(
        ds.subject_ids, oof.fold_of_row, oof.probabilities, ds.outcome
    ):
        lines.append(f"{sid},{fold},{prob!r},{label}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_roc_points_csv(curve: RocCurve, path) -> None:
    lines = ["threshold,sensitivity,specificity"]
    for pt in curve.points:
        lines.append(f"{pt.threshold!r},{_fmt(pt.sensitivity)},{_fmt(pt.specificity)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_importance_csv(report: ImportanceReport, path) -> None:
    lines = ["rank,variable,score,method"]
    for rank, (variable, score) in enumerate(report.entries, 1):
        lines.append(f"{rank},{variable},{_fmt(score)},{report.method}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_manifest(path, entries: dict) -> None:
    """Plain-text run manifest; reproducing a run needs nothing else."""
    lines = ["progpipe-manifest v1"]
    for key in sorted(entries):
        lines.append(f"{key}={entries[key]}")
    _atomic_write(path, "\n".join(lines) + "\n")


def render_roc_figure(curve: RocCurve, summary: MetricsSummary, path) -> None:
    fpr = [1.0 - pt.specificity for pt in curve.points]
    tpr = [pt.sensitivity for pt in curve.points]
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(fpr, tpr, drawstyle="steps-post", color="tab:blue",
            label=f"AUC = {summary.auc:.3f}")
    ax.plot([0, 1], [0, 1], ls="--", lw=0.8, color="gray")
    ax.plot(1.0 - summary.specificity, summary.sensitivity, "o",
            color="tab:red", label="Youden point")
    ax.set_xlabel("1 - specificity")
    ax.set_ylabel("Sensitivity")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_importance_figure(report: ImportanceReport, path, top: int = 20) -> None:
    entries = report.entries[:top]
    if not entries:
        return
    names = [e[0] for e in entries][::-1]
    scores = [e[1] for e in entries][::-1]
    fig, ax = plt.subplots(figsize=(6, 0.3 * len(entries) + 1.2))
    ax.barh(names, scores, color="tab:blue")
    ax.set_xlabel(f"Importance ({report.method}, max = 100)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

"""Figure rendering for report output.

Renders the standard diagnostic plots straight from EvaluationReport data
to PNG files next to the delimited tables. The CSV point tables remain the
canonical machine-readable record; these images are a convenience view of
the same numbers. The Agg backend is forced so rendering works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import reliability_points, roc_points
from .protocol import EvaluationReport, StrategyComparison

_DPI = 150


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def roc_figure(report: EvaluationReport, path) -> Path:
    """Per-fold ROC step curves with the chance diagonal."""
    fig, ax = plt.subplots(figsize=(5.5, 5), constrained_layout=True)
    for fr in report.fold_results:
        points = roc_points(fr.test_labels, fr.test_probabilities)
        fpr = [pt[0] for pt in points]
        tpr = [pt[1] for pt in points]
        auc = fr.test_metrics["auc_roc"]
        ax.step(fpr, tpr, where="post", alpha=0.8,
                label=f"fold {fr.fold_id} (AUC={auc:.2f})")
    ax.plot([0, 1], [0, 1], linestyle="--", color="gray", linewidth=1)
    ax.set_xlabel("False positive rate")
    ax.set_ylabel("True positive rate")
    ax.set_title(f"ROC per fold ({report.strategy})")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="lower right", fontsize=8)
    return _save(fig, Path(path))


def reliability_figure(report: EvaluationReport, path) -> Path:
    """Reliability diagram over pooled test predictions."""
    labels, probs = [], []
    for fr in report.fold_results:
        labels.extend(fr.test_labels)
        probs.extend(fr.test_probabilities)
    points = reliability_points(np.asarray(labels), np.asarray(probs))
    conf = [pt[2] for pt in points]
    rate = [pt[3] for pt in points]
    counts = [pt[4] for pt in points]

    fig, ax = plt.subplots(figsize=(5.5, 5), constrained_layout=True)
    ax.plot([0, 1], [0, 1], linestyle="--", color="gray", linewidth=1,
            label="perfect calibration")
    ax.plot(conf, rate, marker="o", color="tab:blue", label="model")
    for x, y, c in zip(conf, rate, counts):
        ax.annotate(str(c), (x, y), textcoords="offset points",
                    xytext=(4, 4), fontsize=7, color="tab:blue")
    ece = report.metrics["ece"].mean
    ax.set_xlabel("Mean predicted probability")
    ax.set_ylabel("Empirical positive rate")
    ax.set_title(f"Reliability ({report.strategy}); mean fold ECE={ece:.3f}")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.legend(loc="upper left", fontsize=8)
    return _save(fig, Path(path))


def threshold_figure(report: EvaluationReport, path) -> Path:
    """Chosen threshold per fold against the median and IQR band."""
    folds = [fr.fold_id for fr in report.fold_results]
    thresholds = [fr.t_star for fr in report.fold_results]
    summary = report.threshold_summary
    half = summary.iqr / 2.0

    fig, ax = plt.subplots(figsize=(6, 4), constrained_layout=True)
    ax.axhspan(summary.median - half, summary.median + half,
               color="tab:orange", alpha=0.15, label="median ± IQR/2")
    ax.axhline(summary.median, color="tab:orange", linewidth=1.5)
    ax.plot(folds, thresholds, "o", color="tab:blue", label="fold t*")
    ax.set_xlabel("Fold")
    ax.set_ylabel("Selected threshold t*")
    ax.set_title(f"Threshold stability ({report.strategy})")
    ax.set_xticks(folds)
    ax.set_ylim(0, 1)
    ax.legend(loc="best", fontsize=8)
    return _save(fig, Path(path))


def importance_figure(report: EvaluationReport, path, top: int = 15) -> Path | None:
    """Horizontal bars for the top mean importances; None when absent."""
    if report.importances is None:
        return None
    head = list(report.importances[:top])
    names = [name for name, _ in head][::-1]
    values = [value for _, value in head][::-1]

    fig, ax = plt.subplots(
        figsize=(6.5, 0.3 * len(head) + 1.2), constrained_layout=True
    )
    ax.barh(range(len(head)), values, color="tab:blue")
    ax.set_yticks(range(len(head)))
    ax.set_yticklabels(names, fontsize=8)
    ax.set_xlabel("Mean importance (renormalized)")
    ax.set_title(f"Top feature importances ({report.strategy})")
    return _save(fig, Path(path))


def strategy_figure(comparison: StrategyComparison, path) -> Path:
    """Grouped mean-BA bars per strategy and model, with SD whiskers."""
    strategies = list(comparison.strategies)
    labels = list(comparison.model_labels)
    width = 0.8 / len(labels)
    x = np.arange(len(strategies))

    fig, ax = plt.subplots(figsize=(1.6 * len(strategies) + 2, 4.5),
                           constrained_layout=True)
    for m, label in enumerate(labels):
        means = [comparison.ba_matrix[s][label][0] for s in strategies]
        sds = [comparison.ba_matrix[s][label][1] or 0.0 for s in strategies]
        offset = (m - (len(labels) - 1) / 2) * width
        ax.bar(x + offset, means, width * 0.9, yerr=sds, capsize=3, label=label)
    ax.axhline(0.5, linestyle="--", color="gray", linewidth=1)
    ax.set_xticks(x)
    ax.set_xticklabels(strategies, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("Balanced accuracy (mean ± SD)")
    ax.set_title("Evaluation strategy comparison")
    ax.legend(fontsize=8)
    return _save(fig, Path(path))


def render_figures(
    primary: EvaluationReport,
    comparison: StrategyComparison | None,
    out_dir,
) -> list[Path]:
    """Render the standard figure set for a run into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        roc_figure(primary, out / "roc_curves.png"),
        reliability_figure(primary, out / "reliability_diagram.png"),
        threshold_figure(primary, out / "threshold_stability.png"),
    ]
    imp = importance_figure(primary, out / "importances.png")
    if imp is not None:
        written.append(imp)
    if comparison is not None:
        written.append(strategy_figure(comparison, out / "strategy_comparison.png"))
    return written

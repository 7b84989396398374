"""Report emission: full-precision JSON plus display-rounded CSV tables.

Every run writes one machine-readable JSON document per evaluation (every
numeric field at full precision, so a parse of the emitted file reproduces
the report exactly) and a set of delimited tables shaped like the ones the
framework is meant to produce: per-model summary (BA to three decimals,
thresholds to two), strategy-comparison matrix with the gap against the
nested estimate, ranked feature importances (three decimals), and the
per-fold threshold/BA block with its median +/- IQR row. Rounding happens
only in the CSV layer.

ROC and reliability curves are additionally written as point tables so the
figures are reproducible from the delimited output alone.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .metrics import reliability_points, roc_points
from .protocol import METRIC_NAMES, EvaluationReport, StrategyComparison


def _write_json(path: Path, payload: dict):
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


def _write_csv(path: Path, header: list, rows: list):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _mean_sd(mean: float, sd: float | None, decimals: int = 3) -> str:
    if sd is None:
        return f"{mean:.{decimals}f}"
    return f"{mean:.{decimals}f} ± {sd:.{decimals}f}"


def write_fold_table(report: EvaluationReport, path: Path):
    """Per-fold (threshold, BA) block with a final median +/- IQR row."""
    rows = [
        [fr.fold_id, f"{fr.t_star:.2f}", f"{fr.test_metrics['ba']:.3f}"]
        for fr in report.fold_results
    ]
    thr = report.threshold_summary
    ba = report.metrics["ba"]
    rows.append(
        [
            "median ± IQR",
            f"{thr.median:.2f} ± {thr.iqr:.2f}",
            f"{ba.median:.3f} ± {ba.iqr:.3f}",
        ]
    )
    _write_csv(path, ["fold", "threshold", "ba"], rows)


def write_metric_table(report: EvaluationReport, path: Path):
    """Aggregate row per metric: mean, SD, median, IQR (three decimals)."""
    rows = []
    for name in METRIC_NAMES:
        summary = report.metrics[name]
        rows.append(
            [
                name,
                f"{summary.mean:.3f}",
                "" if summary.sd is None else f"{summary.sd:.3f}",
                f"{summary.median:.3f}",
                f"{summary.iqr:.3f}",
            ]
        )
    _write_csv(path, ["metric", "mean", "sd", "median", "iqr"], rows)


def write_importance_table(report: EvaluationReport, path: Path) -> bool:
    """Ranked mean importances to three decimals; skipped when absent."""
    if report.importances is None:
        return False
    rows = [
        [rank, name, f"{value:.3f}"]
        for rank, (name, value) in enumerate(report.importances, start=1)
    ]
    _write_csv(path, ["rank", "feature", "mean_importance"], rows)
    return True


def _pooled_predictions(report: EvaluationReport):
    labels, probs = [], []
    for fr in report.fold_results:
        labels.extend(fr.test_labels)
        probs.extend(fr.test_probabilities)
    return np.asarray(labels), np.asarray(probs)


def write_roc_points(report: EvaluationReport, path: Path):
    """Fig-1-style ROC curves as one point table, fold by fold."""
    rows = []
    for fr in report.fold_results:
        for fpr, tpr, threshold in roc_points(fr.test_labels, fr.test_probabilities):
            rows.append([fr.fold_id, repr(fpr), repr(tpr), repr(threshold)])
    _write_csv(path, ["fold", "fpr", "tpr", "threshold"], rows)


def write_reliability_points(report: EvaluationReport, path: Path):
    """Reliability-diagram bins over the pooled out-of-fold test predictions."""
    labels, probs = _pooled_predictions(report)
    rows = [
        [repr(low), repr(high), repr(conf), repr(rate), count]
        for low, high, conf, rate, count in reliability_points(labels, probs)
    ]
    _write_csv(
        path,
        ["bin_low", "bin_high", "mean_confidence", "positive_rate", "count"],
        rows,
    )


def emit_report(report: EvaluationReport, out_dir) -> list[Path]:
    """Write one evaluation's JSON document and CSV tables into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "report.json"
    _write_json(path, report.to_dict())
    written.append(path)

    path = out / "table_folds.csv"
    write_fold_table(report, path)
    written.append(path)

    path = out / "table_metrics.csv"
    write_metric_table(report, path)
    written.append(path)

    path = out / "table_importances.csv"
    if write_importance_table(report, path):
        written.append(path)

    path = out / "roc_points.csv"
    write_roc_points(report, path)
    written.append(path)

    path = out / "reliability_points.csv"
    write_reliability_points(report, path)
    written.append(path)
    return written


def write_model_table(reports_by_label: dict, path: Path):
    """Tables-1/2 shape: one row per model under the headline strategy."""
    rows = []
    for label, report in reports_by_label.items():
        cells = [label]
        for name in METRIC_NAMES:
            summary = report.metrics[name]
            cells.append(_mean_sd(summary.mean, summary.sd))
        cells.append(f"{report.threshold_summary.median:.2f}")
        rows.append(cells)
    _write_csv(
        path,
        ["model", *METRIC_NAMES, "median_threshold"],
        rows,
    )


def write_strategy_table(comparison: StrategyComparison, path: Path):
    """Table-3 shape: strategies x models BA matrix plus gap-vs-nested rows."""
    header = ["strategy", *comparison.model_labels]
    rows = []
    for strategy in comparison.strategies:
        cells = [strategy]
        for label in comparison.model_labels:
            mean, sd = comparison.ba_matrix[strategy][label]
            cells.append(_mean_sd(mean, sd))
        rows.append(cells)
    if comparison.gaps:
        for strategy in comparison.strategies:
            if strategy == "nested_calibrated":
                continue
            cells = [f"gap_vs_nested:{strategy}"]
            for label in comparison.model_labels:
                cells.append(f"{comparison.gaps[label][strategy]:+.3f}")
            rows.append(cells)
    _write_csv(path, header, rows)


def comparison_summary(comparison: StrategyComparison) -> dict:
    """The comparison matrix without the embedded per-report payloads."""
    return {
        "strategies": list(comparison.strategies),
        "model_labels": list(comparison.model_labels),
        "ba_matrix": {
            strategy: {
                label: {"mean": mean, "sd": sd}
                for label, (mean, sd) in row.items()
            }
            for strategy, row in comparison.ba_matrix.items()
        },
        "gaps": comparison.gaps,
    }


def write_run_report(
    path: Path,
    config_echo: dict,
    ingestion: dict,
    feature_notes: dict | None,
    reports: dict,
    comparison: StrategyComparison | None,
):
    """The run-level JSON document: config echo, provenance, every report."""
    payload = {
        "config": config_echo,
        "ingestion": ingestion,
        "feature_engineering": feature_notes,
        "reports": {
            strategy: {label: report.to_dict() for label, report in row.items()}
            for strategy, row in reports.items()
        },
        "comparison": None if comparison is None else comparison_summary(comparison),
    }
    _write_json(path, payload)

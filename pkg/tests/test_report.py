"""Tests for JSON/CSV report emission."""

import csv
import json
import math

import pytest

from nestedeval.data import make_synthetic
from nestedeval.models import HyperParamGrid, ModelSpec
from nestedeval.protocol import (
    METRIC_NAMES,
    ProtocolConfig,
    compare_strategies,
    run_holdout,
    run_nested_cv,
)
from nestedeval.report import (
    comparison_summary,
    emit_report,
    write_fold_table,
    write_importance_table,
    write_metric_table,
    write_model_table,
    write_run_report,
    write_strategy_table,
)


@pytest.fixture(scope="module")
def data():
    return make_synthetic(
        n=90, p=5, n_informative=2, effect_size=1.5, positive_fraction=0.5, seed=13
    )


@pytest.fixture(scope="module")
def logistic_report(data):
    config = ProtocolConfig(
        strategy="nested_calibrated",
        model=ModelSpec(kind="logistic_regression"),
        outer_k=3,
        inner_k=2,
        grid=HyperParamGrid.from_dict({"C": [1.0]}),
        seed=5,
    )
    return run_nested_cv(data, config)


@pytest.fixture(scope="module")
def tree_report(data):
    config = ProtocolConfig(
        strategy="nested_calibrated",
        model=ModelSpec(kind="decision_tree", hyperparams={"max_depth": 3}),
        outer_k=3,
        inner_k=2,
        grid=HyperParamGrid.from_dict({}),
        seed=5,
    )
    return run_nested_cv(data, config)


def read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


class TestEmitReport:
    def test_file_set_without_importances(self, logistic_report, tmp_path):
        written = emit_report(logistic_report, tmp_path)
        assert [p.name for p in written] == [
            "report.json",
            "table_folds.csv",
            "table_metrics.csv",
            "roc_points.csv",
            "reliability_points.csv",
        ]
        for path in written:
            assert path.exists() and path.stat().st_size > 0

    def test_file_set_with_importances(self, tree_report, tmp_path):
        written = emit_report(tree_report, tmp_path)
        assert "table_importances.csv" in [p.name for p in written]

    def test_creates_nested_directories(self, logistic_report, tmp_path):
        target = tmp_path / "a" / "b"
        emit_report(logistic_report, target)
        assert (target / "report.json").exists()


class TestJsonDocument:
    def test_full_precision_round_trip(self, logistic_report, tmp_path):
        emit_report(logistic_report, tmp_path)
        text = (tmp_path / "report.json").read_text()
        # parse and re-serialize reproduces the file byte for byte
        assert text == json.dumps(
            json.loads(text), indent=2, sort_keys=True, allow_nan=False
        ) + "\n"
        assert text.endswith("\n")

    def test_payload_matches_report(self, logistic_report, tmp_path):
        emit_report(logistic_report, tmp_path)
        loaded = json.loads((tmp_path / "report.json").read_text())
        expected = json.loads(json.dumps(logistic_report.to_dict()))
        assert loaded == expected
        assert loaded["strategy"] == "nested_calibrated"
        assert loaded["ledger"]["clean"] is True


class TestFoldTable:
    def test_rows_and_summary_line(self, logistic_report, tmp_path):
        path = tmp_path / "folds.csv"
        write_fold_table(logistic_report, path)
        rows = read_csv(path)
        assert rows[0] == ["fold", "threshold", "ba"]
        for f, fr in enumerate(logistic_report.fold_results):
            assert rows[1 + f] == [
                str(f),
                f"{fr.t_star:.2f}",
                f"{fr.test_metrics['ba']:.3f}",
            ]
        last = rows[-1]
        thr = logistic_report.threshold_summary
        ba = logistic_report.metrics["ba"]
        assert last == [
            "median ± IQR",
            f"{thr.median:.2f} ± {thr.iqr:.2f}",
            f"{ba.median:.3f} ± {ba.iqr:.3f}",
        ]


class TestMetricTable:
    def test_one_row_per_metric(self, logistic_report, tmp_path):
        path = tmp_path / "metrics.csv"
        write_metric_table(logistic_report, path)
        rows = read_csv(path)
        assert rows[0] == ["metric", "mean", "sd", "median", "iqr"]
        assert [r[0] for r in rows[1:]] == list(METRIC_NAMES)
        ba = logistic_report.metrics["ba"]
        assert rows[1] == [
            "ba", f"{ba.mean:.3f}", f"{ba.sd:.3f}",
            f"{ba.median:.3f}", f"{ba.iqr:.3f}",
        ]

    def test_sd_cell_blank_for_single_repeat(self, data, tmp_path):
        config = ProtocolConfig(
            strategy="holdout",
            model=ModelSpec(kind="logistic_regression"),
            repeats=1,
            seed=5,
        )
        report = run_holdout(data, config)
        path = tmp_path / "metrics.csv"
        write_metric_table(report, path)
        rows = read_csv(path)
        assert rows[1][2] == ""


class TestImportanceTable:
    def test_skipped_when_absent(self, logistic_report, tmp_path):
        path = tmp_path / "imp.csv"
        assert write_importance_table(logistic_report, path) is False
        assert not path.exists()

    def test_ranked_descending(self, tree_report, tmp_path):
        path = tmp_path / "imp.csv"
        assert write_importance_table(tree_report, path) is True
        rows = read_csv(path)
        assert rows[0] == ["rank", "feature", "mean_importance"]
        assert [r[0] for r in rows[1:]] == [str(i) for i in range(1, len(rows))]
        values = [float(r[2]) for r in rows[1:]]
        assert values == sorted(values, reverse=True)
        assert rows[1][2] == f"{tree_report.importances[0][1]:.3f}"


class TestPointTables:
    def test_roc_points_full_precision(self, logistic_report, tmp_path):
        emit_report(logistic_report, tmp_path)
        rows = read_csv(tmp_path / "roc_points.csv")
        assert rows[0] == ["fold", "fpr", "tpr", "threshold"]
        by_fold = {}
        for fold, fpr, tpr, threshold in rows[1:]:
            by_fold.setdefault(int(fold), []).append(
                (float(fpr), float(tpr), float(threshold))
            )
        assert set(by_fold) == {0, 1, 2}
        for fold, points in by_fold.items():
            assert points[0] == (0.0, 0.0, math.inf)
            assert points[-1][:2] == (1.0, 1.0)
            # repr cells parse back to the exact binary values
            fr = logistic_report.fold_results[fold]
            assert points[-1][2] == min(fr.test_probabilities)

    def test_reliability_counts_cover_all_predictions(
        self, logistic_report, tmp_path
    ):
        emit_report(logistic_report, tmp_path)
        rows = read_csv(tmp_path / "reliability_points.csv")
        assert rows[0] == [
            "bin_low", "bin_high", "mean_confidence", "positive_rate", "count"
        ]
        total = sum(int(r[4]) for r in rows[1:])
        assert total == sum(fr.n_test for fr in logistic_report.fold_results)
        for r in rows[1:]:
            assert 0.0 <= float(r[0]) < float(r[1]) <= 1.0


class TestModelTable:
    def test_one_row_per_model(self, logistic_report, tree_report, tmp_path):
        path = tmp_path / "models.csv"
        write_model_table(
            {"logistic_regression": logistic_report, "decision_tree": tree_report},
            path,
        )
        rows = read_csv(path)
        assert rows[0] == ["model", *METRIC_NAMES, "median_threshold"]
        assert rows[1][0] == "logistic_regression"
        ba = logistic_report.metrics["ba"]
        assert rows[1][1] == f"{ba.mean:.3f} ± {ba.sd:.3f}"
        assert rows[1][-1] == f"{logistic_report.threshold_summary.median:.2f}"


@pytest.fixture(scope="module")
def written(data, tmp_path_factory):
    comparison = compare_strategies(
        data,
        ProtocolConfig(
            strategy="nested_calibrated",
            model=ModelSpec(kind="logistic_regression"),
            outer_k=3,
            inner_k=2,
            grid=HyperParamGrid.from_dict({"C": [1.0]}),
            seed=5,
        ),
        strategies=["nested_calibrated", "naive_cv"],
    )
    path = tmp_path_factory.mktemp("strategy") / "table.csv"
    write_strategy_table(comparison, path)
    return comparison, read_csv(path)


class TestStrategyTable:
    def test_matrix_rows(self, written):
        comparison, rows = written
        assert rows[0] == ["strategy", "logistic_regression"]
        assert rows[1][0] == "nested_calibrated"
        assert rows[2][0] == "naive_cv"
        mean, sd = comparison.ba_matrix["naive_cv"]["logistic_regression"]
        assert rows[2][1] == f"{mean:.3f} ± {sd:.3f}"

    def test_gap_row_is_signed(self, written):
        comparison, rows = written
        assert rows[3][0] == "gap_vs_nested:naive_cv"
        gap = comparison.gaps["logistic_regression"]["naive_cv"]
        assert rows[3][1] == f"{gap:+.3f}"
        assert rows[3][1][0] in "+-"

    def test_summary_drops_report_payloads(self, written):
        comparison, _ = written
        summary = comparison_summary(comparison)
        assert "reports" not in summary
        assert summary["gaps"] == comparison.gaps
        assert summary["ba_matrix"]["nested_calibrated"]["logistic_regression"][
            "mean"
        ] == comparison.ba_matrix["nested_calibrated"]["logistic_regression"][0]


class TestRunReport:
    def test_document_structure(self, logistic_report, tmp_path):
        path = tmp_path / "run.json"
        write_run_report(
            path,
            config_echo={"seed": 5},
            ingestion={"n_loaded": 90, "n_rejected": 0},
            feature_notes=None,
            reports={"nested_calibrated": {"logistic_regression": logistic_report}},
            comparison=None,
        )
        loaded = json.loads(path.read_text())
        assert set(loaded) == {
            "config", "ingestion", "feature_engineering", "reports", "comparison",
        }
        assert loaded["config"] == {"seed": 5}
        assert loaded["comparison"] is None
        assert loaded["feature_engineering"] is None
        node = loaded["reports"]["nested_calibrated"]["logistic_regression"]
        assert node["strategy"] == "nested_calibrated"

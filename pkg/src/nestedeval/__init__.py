"""Leakage-controlled evaluation of binary classifiers on tabular morphometry.

The package provides a nested cross-validation protocol (inner-loop
hyperparameter search by average precision, Platt probability calibration,
balanced-accuracy threshold selection) next to deliberately biased baseline
protocols, all executed under a row-access ledger that certifies or refutes
leakage freedom. Models, metrics, and calibration are implemented from
first principles on numpy.
"""

from .calibration import SigmoidCalibrator, apply_calibrator, fit_platt, holdout_scores
from .config import RunConfig, build_config, parse_config
from .data import (
    Dataset,
    DatasetView,
    FoldPlan,
    LoadReport,
    load_csv,
    make_synthetic,
    stratified_kfold,
    stratified_split,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateStratificationWarning,
    ProtocolError,
    SingleClassWarning,
)
from .features import (
    FeatureRecipe,
    RegionalVolumeTable,
    asymmetry_indices,
    build_feature_matrix,
    deep_gray_composite,
    gray_white_ratio,
    interaction_terms,
    lobar_aggregates,
    make_synthetic_volumes,
    tiv_fractions,
    ventricle_brain_ratio,
)
from .ledger import AccessLedger, FoldScope, LedgerEntry, LedgerVerdict, ledger_assert_clean
from .metrics import (
    FoldSummary,
    ThresholdedOutcome,
    average_precision,
    balanced_accuracy,
    brier_score,
    expected_calibration_error,
    reliability_points,
    roc_auc,
    roc_points,
    single_value_summary,
    summarize_folds,
    sweep_threshold,
    threshold_outcome,
)
from .models import (
    HyperParamGrid,
    ModelSpec,
    TrainedModel,
    default_grid,
    fit_forest,
    fit_gaussian_nb,
    fit_knn,
    fit_lda,
    fit_logistic_regression,
    fit_model,
    fit_tree,
    predict_scores,
)
from .protocol import (
    EvaluationReport,
    FoldResult,
    GridSearchResult,
    ProtocolConfig,
    StrategyComparison,
    aggregate_importances,
    compare_strategies,
    inner_grid_search,
    run_holdout,
    run_naive_cv,
    run_nested_cv,
    run_strategy,
)
from .registry import RegionInfo, RegionRegistry, default_registry, load_registry
from .report import emit_report
from .runner import RunResult, run_experiment
from .seeding import child_seed

__version__ = "0.1.0"

__all__ = [
    "AccessLedger",
    "ConfigError",
    "DataError",
    "Dataset",
    "DatasetView",
    "DegenerateStratificationWarning",
    "EvaluationReport",
    "FeatureRecipe",
    "FoldPlan",
    "FoldResult",
    "FoldScope",
    "FoldSummary",
    "GridSearchResult",
    "HyperParamGrid",
    "LedgerEntry",
    "LedgerVerdict",
    "LoadReport",
    "ModelSpec",
    "ProtocolConfig",
    "ProtocolError",
    "RegionInfo",
    "RegionRegistry",
    "RegionalVolumeTable",
    "RunConfig",
    "RunResult",
    "SigmoidCalibrator",
    "SingleClassWarning",
    "StrategyComparison",
    "ThresholdedOutcome",
    "TrainedModel",
    "aggregate_importances",
    "apply_calibrator",
    "asymmetry_indices",
    "average_precision",
    "balanced_accuracy",
    "brier_score",
    "build_config",
    "build_feature_matrix",
    "child_seed",
    "compare_strategies",
    "deep_gray_composite",
    "default_grid",
    "default_registry",
    "emit_report",
    "expected_calibration_error",
    "fit_forest",
    "fit_gaussian_nb",
    "fit_knn",
    "fit_lda",
    "fit_logistic_regression",
    "fit_model",
    "fit_platt",
    "fit_tree",
    "gray_white_ratio",
    "holdout_scores",
    "inner_grid_search",
    "interaction_terms",
    "ledger_assert_clean",
    "load_csv",
    "load_registry",
    "lobar_aggregates",
    "make_synthetic",
    "make_synthetic_volumes",
    "parse_config",
    "predict_scores",
    "reliability_points",
    "roc_auc",
    "roc_points",
    "run_experiment",
    "run_holdout",
    "run_naive_cv",
    "run_nested_cv",
    "run_strategy",
    "single_value_summary",
    "stratified_kfold",
    "stratified_split",
    "summarize_folds",
    "sweep_threshold",
    "threshold_outcome",
    "tiv_fractions",
    "ventricle_brain_ratio",
]

"""Evaluation strategies executed under the row-access ledger.

Five strategies share one reporting shape: repeated stratified hold-out
(with or without grid search), plain k-fold CV, k-fold CV that reuses its
own out-of-fold predictions for hyperparameter and threshold selection (a
deliberately biased baseline, kept for comparison), and the leakage-
controlled nested procedure with probability calibration and train-side
threshold optimization.

Every row access during a run is logged against the fold that made it, so
``ledger_assert_clean`` can certify the nested strategy and document the
violations of the naive ones. All randomness descends from the run seed via
named child streams; reports are bitwise reproducible at any worker count.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .calibration import SigmoidCalibrator, apply_calibrator, fit_platt, holdout_scores
from .data import Dataset, DatasetView, FoldPlan, stratified_kfold, stratified_split
from .errors import ConfigError, ProtocolError
from .ledger import AccessLedger, FoldScope, LedgerVerdict, ledger_assert_clean
from .metrics import (
    DEFAULT_THRESHOLD_GRID,
    FoldSummary,
    average_precision,
    brier_score,
    expected_calibration_error,
    roc_auc,
    single_value_summary,
    summarize_folds,
    sweep_threshold,
    threshold_outcome,
)
from .models import (
    HyperParamGrid,
    ModelSpec,
    default_grid,
    fit_model,
    predict_scores,
)
from .seeding import child_seed

STRATEGIES = (
    "holdout",
    "holdout_grid",
    "naive_cv",
    "naive_cv_grid",
    "nested_calibrated",
)
GRID_STRATEGIES = ("holdout_grid", "naive_cv_grid", "nested_calibrated")
METRIC_NAMES = ("ba", "auc_roc", "auprc", "brier", "ece")

HOLDOUT_TEST_FRACTION = 0.2
DEFAULT_REPEATS = 20


def _is_count(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


@dataclass(frozen=True)
class ProtocolConfig:
    """Everything one evaluation run needs besides the data."""

    strategy: str
    model: ModelSpec
    outer_k: int = 5
    inner_k: int = 3
    repeats: int = DEFAULT_REPEATS
    grid: HyperParamGrid | None = None
    threshold_grid: tuple[float, ...] | None = None
    calibrate: bool = True
    seed: int = 42

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(
                f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )
        if not isinstance(self.model, ModelSpec):
            raise ConfigError("model must be a ModelSpec")
        if not _is_count(self.outer_k) or self.outer_k < 2:
            raise ConfigError("outer_k must be an integer >= 2")
        if not _is_count(self.inner_k) or self.inner_k < 2:
            raise ConfigError("inner_k must be an integer >= 2")
        if not _is_count(self.repeats) or self.repeats < 1:
            raise ConfigError("repeats must be an integer >= 1")
        if self.grid is not None and not isinstance(self.grid, HyperParamGrid):
            raise ConfigError("grid must be a HyperParamGrid")
        if not _is_count(self.seed) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if not isinstance(self.calibrate, bool):
            raise ConfigError("calibrate must be a boolean")
        if self.threshold_grid is not None:
            values = tuple(float(t) for t in self.threshold_grid)
            if not values:
                raise ConfigError("threshold_grid must be nonempty")
            if any(not 0.0 < t < 1.0 for t in values):
                raise ConfigError("threshold values must lie strictly in (0, 1)")
            object.__setattr__(self, "threshold_grid", values)

    def resolved_grid(self) -> HyperParamGrid:
        return self.grid if self.grid is not None else default_grid(self.model.kind)

    def resolved_threshold_grid(self) -> tuple[float, ...]:
        return (
            DEFAULT_THRESHOLD_GRID
            if self.threshold_grid is None
            else self.threshold_grid
        )

    def to_dict(self) -> dict:
        uses_grid = self.strategy in GRID_STRATEGIES
        return {
            "strategy": self.strategy,
            "model": {
                "kind": self.model.kind,
                "hyperparams": dict(self.model.hyperparams),
                "class_weighting": self.model.class_weighting,
            },
            "outer_k": self.outer_k,
            "inner_k": self.inner_k,
            "repeats": self.repeats,
            "grid": self.resolved_grid().to_dict() if uses_grid else None,
            "threshold_grid": list(self.resolved_threshold_grid()),
            "calibrate": self.calibrate,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class GridSearchResult:
    """Winner of an inner search plus the per-candidate score table."""

    chosen: dict
    inner_ap: float
    candidates: tuple[tuple[dict, float | None], ...]

    def to_dict(self) -> dict:
        return {
            "chosen": dict(self.chosen),
            "inner_ap": self.inner_ap,
            "candidates": [
                {"hyperparams": dict(hp), "mean_ap": ap} for hp, ap in self.candidates
            ],
        }


@dataclass(frozen=True)
class FoldResult:
    """Everything one outer fold (or hold-out repeat) contributes."""

    fold_id: int
    chosen_hyperparams: dict
    inner_ap: float | None
    calibrator: SigmoidCalibrator | None
    t_star: float
    test_metrics: dict
    importances: tuple[tuple[str, float], ...] | None
    n_train: int
    n_test: int
    test_indices: tuple[int, ...]
    test_labels: tuple[int, ...]
    test_probabilities: tuple[float, ...]
    tuning: dict | None = None

    def to_dict(self) -> dict:
        return {
            "fold_id": self.fold_id,
            "chosen_hyperparams": dict(self.chosen_hyperparams),
            "inner_ap": self.inner_ap,
            "calibrator": None if self.calibrator is None else self.calibrator.to_dict(),
            "t_star": self.t_star,
            "test_metrics": dict(self.test_metrics),
            "importances": None
            if self.importances is None
            else [[name, value] for name, value in self.importances],
            "n_train": self.n_train,
            "n_test": self.n_test,
            "test_indices": list(self.test_indices),
            "test_labels": list(self.test_labels),
            "test_probabilities": list(self.test_probabilities),
            "tuning": self.tuning,
        }


@dataclass(frozen=True)
class EvaluationReport:
    """Per-fold results plus the aggregates the tables are built from."""

    strategy: str
    config: dict
    fold_results: tuple[FoldResult, ...]
    metrics: dict
    threshold_summary: FoldSummary
    importances: tuple[tuple[str, float], ...] | None
    ledger_verdict: LedgerVerdict
    n_subjects: int
    n_features: int
    selection: dict | None = None

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "config": self.config,
            "n_subjects": self.n_subjects,
            "n_features": self.n_features,
            "folds": [fr.to_dict() for fr in self.fold_results],
            "metrics": {name: fs.to_dict() for name, fs in self.metrics.items()},
            "threshold_summary": self.threshold_summary.to_dict(),
            "importances": None
            if self.importances is None
            else [[name, value] for name, value in self.importances],
            "ledger": self.ledger_verdict.to_dict(),
            "selection": self.selection,
        }


def parallel_map(fn, items, workers: int = 1) -> list:
    """Apply ``fn`` over ``items`` preserving input order.

    Work units are independent by construction, so any worker count yields
    the same list.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _score_metrics(labels, probabilities, t_star: float) -> dict:
    outcome = threshold_outcome(labels, probabilities, t_star)
    return {
        "ba": outcome.balanced_accuracy,
        "auc_roc": roc_auc(labels, probabilities),
        "auprc": average_precision(labels, probabilities),
        "brier": brier_score(labels, probabilities),
        "ece": expected_calibration_error(labels, probabilities),
    }


def _subview(base: DatasetView, relative, scope: FoldScope | None, stage: str):
    absolute = base.absolute(relative)
    if scope is not None:
        return scope.view(absolute, stage)
    return base.dataset.view(absolute)


def inner_grid_search(
    outer_train: DatasetView,
    spec: ModelSpec,
    grid: HyperParamGrid,
    inner_k: int,
    seed: int,
    scope: FoldScope | None = None,
) -> GridSearchResult:
    """Pick the grid candidate with the best mean out-of-fold average precision.

    Candidates are scored over the same ``inner_k`` stratified folds of the
    outer-train rows; ties keep the earliest candidate in grid enumeration
    order. A candidate that fails to fit on any inner fold is dropped; if
    every candidate drops, the search fails.
    """
    if grid.cardinality == 0:
        raise ConfigError("hyperparameter grid is empty")
    plan = stratified_kfold(outer_train.y, inner_k, child_seed(seed, "inner_folds"))
    fold_views = [
        (
            _subview(outer_train, train_rel, scope, "tuning"),
            _subview(outer_train, val_rel, scope, "tuning"),
        )
        for train_rel, val_rel in plan.folds
    ]

    best_index = -1
    best_ap = -np.inf
    table: list[tuple[dict, float | None]] = []
    for c, candidate in enumerate(grid.candidates()):
        aps = []
        failed = False
        for j, (fit_view, val_view) in enumerate(fold_views):
            fit_spec = spec.with_hyperparams(candidate).with_seed(
                child_seed(seed, "candidate", c, "fold", j)
            )
            try:
                model = fit_model(fit_view, fit_spec)
            except ValueError:
                failed = True
                break
            scores = predict_scores(model, val_view)
            aps.append(average_precision(val_view.y, scores))
        if failed:
            table.append((candidate, None))
            continue
        mean_ap = float(np.mean(aps))
        table.append((candidate, mean_ap))
        if mean_ap > best_ap:
            best_ap = mean_ap
            best_index = c
    if best_index < 0:
        raise ProtocolError("every grid candidate failed to fit")
    return GridSearchResult(
        chosen=table[best_index][0],
        inner_ap=best_ap,
        candidates=tuple(table),
    )


def _aggregate_report(
    config: ProtocolConfig,
    data: Dataset,
    fold_results: list[FoldResult],
    verdict: LedgerVerdict,
    selection: dict | None = None,
) -> EvaluationReport:
    summarize = summarize_folds if len(fold_results) > 1 else (
        lambda values: single_value_summary(values[0])
    )
    metric_summaries = {
        name: summarize([fr.test_metrics[name] for fr in fold_results])
        for name in METRIC_NAMES
    }
    threshold_summary = summarize([fr.t_star for fr in fold_results])
    return EvaluationReport(
        strategy=config.strategy,
        config=config.to_dict(),
        fold_results=tuple(fold_results),
        metrics=metric_summaries,
        threshold_summary=threshold_summary,
        importances=aggregate_importances(fold_results),
        ledger_verdict=verdict,
        n_subjects=data.n_samples,
        n_features=data.n_features,
        selection=selection,
    )


def _importance_pairs(model) -> tuple[tuple[str, float], ...] | None:
    table = model.importance_table()
    return None if table is None else tuple(table)


def run_nested_cv(
    data: Dataset, config: ProtocolConfig, workers: int = 1
) -> EvaluationReport:
    """Leakage-controlled nested CV with calibration and threshold selection.

    Per outer fold: inner grid search on the train split, Platt calibration
    fitted on cross-validated train scores, a final refit, a threshold chosen
    on calibrated train predictions, and a single pass over the untouched
    test split. The ledger verdict certifies the sequencing.
    """
    if config.strategy != "nested_calibrated":
        raise ConfigError(
            f"run_nested_cv requires strategy 'nested_calibrated', "
            f"got {config.strategy!r}"
        )
    plan = stratified_kfold(
        data.labels, config.outer_k, child_seed(config.seed, "outer_folds")
    )
    grid = config.resolved_grid()
    threshold_grid = config.resolved_threshold_grid()
    ledger = AccessLedger()

    def run_fold(f: int) -> FoldResult:
        train_idx, test_idx = plan.folds[f]
        scope = FoldScope(ledger, data, f)
        try:
            outer_train = scope.view(train_idx, "tuning")
            search = inner_grid_search(
                outer_train,
                config.model,
                grid,
                config.inner_k,
                child_seed(config.seed, "tuning", f),
            )
            chosen_spec = config.model.with_hyperparams(search.chosen)

            calibrator = None
            if config.calibrate:
                oof_scores, oof_labels = holdout_scores(
                    outer_train,
                    chosen_spec,
                    config.inner_k,
                    child_seed(config.seed, "calibration", f),
                    scope=scope,
                )
                calibrator = fit_platt(oof_scores, oof_labels)

            final_view = scope.view(train_idx, "final_fit")
            model = fit_model(
                final_view, chosen_spec.with_seed(child_seed(config.seed, "final_fit", f))
            )

            threshold_view = scope.view(train_idx, "threshold_search")
            train_scores = predict_scores(model, threshold_view)
            train_probs = (
                apply_calibrator(calibrator, train_scores)
                if calibrator is not None
                else train_scores
            )
            t_star, _ = sweep_threshold(threshold_view.y, train_probs, threshold_grid)

            test_view = scope.view(test_idx, "outer_test_score")
            raw_test = predict_scores(model, test_view)
            test_probs = (
                apply_calibrator(calibrator, raw_test)
                if calibrator is not None
                else raw_test
            )
            test_metrics = _score_metrics(test_view.y, test_probs, t_star)
        except (ValueError, ProtocolError) as exc:
            raise ProtocolError(f"outer fold {f}: {exc}") from exc
        return FoldResult(
            fold_id=f,
            chosen_hyperparams=search.chosen,
            inner_ap=search.inner_ap,
            calibrator=calibrator,
            t_star=t_star,
            test_metrics=test_metrics,
            importances=_importance_pairs(model),
            n_train=int(train_idx.size),
            n_test=int(test_idx.size),
            test_indices=tuple(int(i) for i in test_idx),
            test_labels=tuple(int(v) for v in test_view.y),
            test_probabilities=tuple(float(p) for p in test_probs),
            tuning=search.to_dict(),
        )

    fold_results = parallel_map(run_fold, range(config.outer_k), workers)
    verdict = ledger_assert_clean(ledger, plan)
    return _aggregate_report(config, data, fold_results, verdict)


def run_naive_cv(
    data: Dataset, config: ProtocolConfig, workers: int = 1
) -> EvaluationReport:
    """Single k-fold loop whose out-of-fold predictions do double duty.

    The threshold (and, for naive_cv_grid, the hyperparameters) are selected
    on the same pooled out-of-fold predictions that are then reported as
    performance. This is the biased reuse the nested protocol exists to
    avoid; the ledger verdict documents the violations rather than raising.
    """
    if config.strategy not in ("naive_cv", "naive_cv_grid"):
        raise ConfigError(
            f"run_naive_cv requires strategy 'naive_cv' or 'naive_cv_grid', "
            f"got {config.strategy!r}"
        )
    plan = stratified_kfold(
        data.labels, config.outer_k, child_seed(config.seed, "outer_folds")
    )
    threshold_grid = config.resolved_threshold_grid()
    ledger = AccessLedger()
    scopes = [FoldScope(ledger, data, f) for f in range(config.outer_k)]
    all_indices = np.arange(data.n_samples)
    labels = data.labels

    if config.strategy == "naive_cv":
        resolved = config.model.resolved_hyperparams()
        oof = np.empty(data.n_samples)
        per_fold = [None] * config.outer_k

        def fit_fold(f: int):
            train_idx, test_idx = plan.folds[f]
            scope = scopes[f]
            try:
                fit_view = scope.view(train_idx, "final_fit")
                model = fit_model(
                    fit_view,
                    config.model.with_seed(child_seed(config.seed, "final_fit", f)),
                )
                test_view = scope.view(test_idx, "outer_test_score")
                probs = predict_scores(model, test_view)
            except ValueError as exc:
                raise ProtocolError(f"fold {f}: {exc}") from exc
            oof[test_idx] = probs
            per_fold[f] = (probs, test_view.y, _importance_pairs(model))

        parallel_map(fit_fold, range(config.outer_k), workers)
        # pooled selection reads every row, inside each fold's scope
        for scope in scopes:
            scope.log(all_indices, "threshold_search")
        t_star, _ = sweep_threshold(labels, oof, threshold_grid)
        selection = None
        chosen_by_fold = [resolved] * config.outer_k
        probs_by_fold = [per_fold[f][0] for f in range(config.outer_k)]
        importances_by_fold = [per_fold[f][2] for f in range(config.outer_k)]
        inner_ap_by_fold = [None] * config.outer_k
        tuning_by_fold = [None] * config.outer_k
    else:
        candidates = config.resolved_grid().candidates()
        if not candidates:
            raise ConfigError("hyperparameter grid is empty")
        oof_by_candidate = np.empty((len(candidates), data.n_samples))
        failed = np.zeros(len(candidates), dtype=bool)
        importance_store: list[list] = [
            [None] * config.outer_k for _ in candidates
        ]

        def fit_fold(f: int):
            train_idx, test_idx = plan.folds[f]
            scope = scopes[f]
            # candidate evaluation touches this fold's held-out rows: the leak
            fit_view = scope.view(train_idx, "tuning")
            predict_view = scope.view(test_idx, "tuning")
            for c, candidate in enumerate(candidates):
                spec = config.model.with_hyperparams(candidate).with_seed(
                    child_seed(config.seed, "naive_tuning", f, c)
                )
                try:
                    model = fit_model(fit_view, spec)
                except ValueError:
                    failed[c] = True
                    continue
                oof_by_candidate[c, test_idx] = predict_scores(model, predict_view)
                importance_store[c][f] = _importance_pairs(model)

        parallel_map(fit_fold, range(config.outer_k), workers)
        if failed.all():
            raise ProtocolError("every grid candidate failed to fit")

        for scope in scopes:
            scope.log(all_indices, "tuning")
            scope.log(all_indices, "threshold_search")
        best_c = -1
        best_ba = -np.inf
        selection_table = []
        for c, candidate in enumerate(candidates):
            if failed[c]:
                selection_table.append(
                    {"hyperparams": dict(candidate), "pooled_ba": None,
                     "pooled_threshold": None}
                )
                continue
            t_c, outcome = sweep_threshold(labels, oof_by_candidate[c], threshold_grid)
            selection_table.append(
                {"hyperparams": dict(candidate),
                 "pooled_ba": outcome.balanced_accuracy,
                 "pooled_threshold": t_c}
            )
            if outcome.balanced_accuracy > best_ba:
                best_ba = outcome.balanced_accuracy
                best_c = c
        t_star = selection_table[best_c]["pooled_threshold"]
        selection = {
            "criterion": "pooled_oof_ba",
            "chosen": dict(candidates[best_c]),
            "pooled_ba": best_ba,
            "candidates": selection_table,
        }
        chosen_by_fold = [candidates[best_c]] * config.outer_k
        probs_by_fold = [
            oof_by_candidate[best_c, plan.folds[f][1]] for f in range(config.outer_k)
        ]
        importances_by_fold = importance_store[best_c]
        inner_ap_by_fold = [None] * config.outer_k
        tuning_by_fold = [None] * config.outer_k

    fold_results = []
    for f in range(config.outer_k):
        train_idx, test_idx = plan.folds[f]
        if config.strategy == "naive_cv_grid":
            scopes[f].log(test_idx, "outer_test_score")
        y_f = labels[test_idx]
        p_f = probs_by_fold[f]
        fold_results.append(
            FoldResult(
                fold_id=f,
                chosen_hyperparams=chosen_by_fold[f],
                inner_ap=inner_ap_by_fold[f],
                calibrator=None,
                t_star=t_star,
                test_metrics=_score_metrics(y_f, p_f, t_star),
                importances=importances_by_fold[f],
                n_train=int(train_idx.size),
                n_test=int(test_idx.size),
                test_indices=tuple(int(i) for i in test_idx),
                test_labels=tuple(int(v) for v in y_f),
                test_probabilities=tuple(float(p) for p in p_f),
                tuning=tuning_by_fold[f],
            )
        )
    verdict = ledger_assert_clean(ledger, plan)
    return _aggregate_report(config, data, fold_results, verdict, selection)


def run_holdout(
    data: Dataset, config: ProtocolConfig, workers: int = 1
) -> EvaluationReport:
    """Repeated stratified 80/20 splits, optionally with train-side grid search.

    Model, hyperparameters, and threshold all come from the training side, so
    each repeat is leakage-free; the weakness of this strategy is variance,
    not contamination. With a single repeat the spread statistics are absent.
    """
    if config.strategy not in ("holdout", "holdout_grid"):
        raise ConfigError(
            f"run_holdout requires strategy 'holdout' or 'holdout_grid', "
            f"got {config.strategy!r}"
        )
    threshold_grid = config.resolved_threshold_grid()
    use_grid = config.strategy == "holdout_grid"
    grid = config.resolved_grid() if use_grid else None
    ledger = AccessLedger()
    splits = [
        stratified_split(
            data.labels, HOLDOUT_TEST_FRACTION, child_seed(config.seed, "holdout", r)
        )
        for r in range(config.repeats)
    ]

    def run_repeat(r: int) -> FoldResult:
        train_idx, test_idx = splits[r]
        scope = FoldScope(ledger, data, r)
        try:
            if use_grid:
                train_view = scope.view(train_idx, "tuning")
                search = inner_grid_search(
                    train_view,
                    config.model,
                    grid,
                    config.inner_k,
                    child_seed(config.seed, "tuning", r),
                )
                chosen = search.chosen
                inner_ap = search.inner_ap
                tuning = search.to_dict()
            else:
                chosen = config.model.resolved_hyperparams()
                inner_ap = None
                tuning = None
            fit_view = scope.view(train_idx, "final_fit")
            model = fit_model(
                fit_view,
                config.model.with_hyperparams(
                    chosen if use_grid else {}
                ).with_seed(child_seed(config.seed, "holdout_fit", r)),
            )
            threshold_view = scope.view(train_idx, "threshold_search")
            train_probs = predict_scores(model, threshold_view)
            t_star, _ = sweep_threshold(threshold_view.y, train_probs, threshold_grid)
            test_view = scope.view(test_idx, "outer_test_score")
            test_probs = predict_scores(model, test_view)
            test_metrics = _score_metrics(test_view.y, test_probs, t_star)
        except (ValueError, ProtocolError) as exc:
            raise ProtocolError(f"repeat {r}: {exc}") from exc
        return FoldResult(
            fold_id=r,
            chosen_hyperparams=chosen,
            inner_ap=inner_ap,
            calibrator=None,
            t_star=t_star,
            test_metrics=test_metrics,
            importances=_importance_pairs(model),
            n_train=int(train_idx.size),
            n_test=int(test_idx.size),
            test_indices=tuple(int(i) for i in test_idx),
            test_labels=tuple(int(v) for v in test_view.y),
            test_probabilities=tuple(float(p) for p in test_probs),
            tuning=tuning,
        )

    fold_results = parallel_map(run_repeat, range(config.repeats), workers)
    audit_plan = FoldPlan(
        folds=tuple(splits), k=config.repeats, seed=config.seed, stratified=True
    )
    verdict = ledger_assert_clean(ledger, audit_plan)
    return _aggregate_report(config, data, fold_results, verdict)


_RUNNERS = {
    "holdout": run_holdout,
    "holdout_grid": run_holdout,
    "naive_cv": run_naive_cv,
    "naive_cv_grid": run_naive_cv,
    "nested_calibrated": run_nested_cv,
}


def run_strategy(data: Dataset, config: ProtocolConfig, workers: int = 1):
    """Dispatch to the runner for ``config.strategy``."""
    return _RUNNERS[config.strategy](data, config, workers)


def aggregate_importances(fold_results) -> tuple[tuple[str, float], ...] | None:
    """Mean per-feature importance across folds, renormalized and ranked.

    Requires every fold to carry importances over the same feature names;
    returns None when no fold has any (models without importances).
    """
    tables = [fr.importances for fr in fold_results]
    if all(t is None for t in tables):
        return None
    if any(t is None for t in tables):
        raise ProtocolError("importances present in some folds but not others")
    reference = tuple(name for name, _ in tables[0])
    totals = dict.fromkeys(reference, 0.0)
    for table in tables:
        names = tuple(name for name, _ in table)
        if set(names) != set(reference):
            raise ProtocolError(
                "fold importances cover different feature names: "
                f"{sorted(set(names) ^ set(reference))}"
            )
        for name, value in table:
            totals[name] += value
    k = len(tables)
    means = {name: total / k for name, total in totals.items()}
    grand = sum(means.values())
    if grand > 0:
        means = {name: v / grand for name, v in means.items()}
    ranked = sorted(means.items(), key=lambda item: (-item[1], item[0]))
    return tuple(ranked)


@dataclass(frozen=True)
class StrategyComparison:
    """Reports for several strategies (x models) on identical data and seed."""

    strategies: tuple[str, ...]
    model_labels: tuple[str, ...]
    reports: dict
    ba_matrix: dict
    gaps: dict

    def to_dict(self) -> dict:
        return {
            "strategies": list(self.strategies),
            "model_labels": list(self.model_labels),
            "ba_matrix": {
                strategy: {
                    label: {"mean": mean, "sd": sd}
                    for label, (mean, sd) in row.items()
                }
                for strategy, row in self.ba_matrix.items()
            },
            "gaps": self.gaps,
            "reports": {
                strategy: {
                    label: report.to_dict() for label, report in row.items()
                }
                for strategy, row in self.reports.items()
            },
        }


def model_labels(models) -> list[str]:
    """Display label per ModelSpec: the kind, suffixed on repeats ("knn#2")."""
    labels = []
    counts: dict[str, int] = {}
    for spec in models:
        counts[spec.kind] = counts.get(spec.kind, 0) + 1
        labels.append(
            spec.kind if counts[spec.kind] == 1 else f"{spec.kind}#{counts[spec.kind]}"
        )
    return labels


def compare_strategies(
    data: Dataset,
    base_config: ProtocolConfig,
    strategies,
    models=None,
    workers: int = 1,
) -> StrategyComparison:
    """Run each strategy (per model) on the same data and root seed.

    Fold-based strategies inherit identical outer partitions because every
    runner derives its plan from the same seed, so differences between rows
    are attributable to protocol. Emits the strategy-by-model balanced
    accuracy matrix and each model's per-strategy gap against the nested
    estimate.
    """
    strategies = list(strategies)
    if len(strategies) < 2:
        raise ConfigError("compare_strategies needs at least two strategies")
    if len(set(strategies)) != len(strategies):
        raise ConfigError("strategies must not repeat")
    if models is None:
        entries = [(base_config.model, base_config.grid)]
    else:
        # each entry is a ModelSpec or a (ModelSpec, grid-or-None) pair
        entries = [m if isinstance(m, tuple) else (m, None) for m in models]
    if not entries:
        raise ConfigError("at least one model is required")
    labels = model_labels([spec for spec, _ in entries])

    reports: dict[str, dict] = {s: {} for s in strategies}
    for label, (spec, grid) in zip(labels, entries):
        for strategy in strategies:
            config = dataclasses.replace(
                base_config, strategy=strategy, model=spec, grid=grid
            )
            reports[strategy][label] = run_strategy(data, config, workers)

    ba_matrix = {
        strategy: {
            label: (row[label].metrics["ba"].mean, row[label].metrics["ba"].sd)
            for label in labels
        }
        for strategy, row in reports.items()
    }
    gaps: dict[str, dict] = {}
    if "nested_calibrated" in reports:
        for label in labels:
            nested_mean = ba_matrix["nested_calibrated"][label][0]
            gaps[label] = {
                strategy: ba_matrix[strategy][label][0] - nested_mean
                for strategy in strategies
                if strategy != "nested_calibrated"
            }
    return StrategyComparison(
        strategies=tuple(strategies),
        model_labels=tuple(labels),
        reports=reports,
        ba_matrix=ba_matrix,
        gaps=gaps,
    )

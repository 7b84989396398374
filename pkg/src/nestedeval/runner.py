"""End-to-end experiment execution: ingest, engineer, evaluate, emit.

Failures are tagged with the pipeline stage that raised them, and any files
already written by the failing run are removed so a crashed run never leaves
a partial output directory behind.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig
from .data import Dataset, load_csv, make_synthetic
from .features import FeatureRecipe, RegionalVolumeTable, build_feature_matrix, make_synthetic_volumes
from .protocol import (
    EvaluationReport,
    ProtocolConfig,
    StrategyComparison,
    compare_strategies,
    model_labels,
    run_strategy,
)
from .registry import load_registry
from .report import (
    emit_report,
    write_model_table,
    write_run_report,
    write_strategy_table,
)
from .seeding import child_seed

STAGES = ("ingestion", "feature-engineering", "protocol", "report")


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it for the CLI message."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


def _staged(stage: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc


@dataclass(frozen=True)
class RunResult:
    """What a finished run produced, and where."""

    out_dir: Path
    reports: dict
    comparison: StrategyComparison | None
    ingestion: dict
    feature_notes: dict | None
    paths: tuple[Path, ...]
    exit_code: int


def _ingest(config: RunConfig):
    source = config.data
    options = source.options
    if source.kind == "csv":
        dataset, load_report = load_csv(
            options["path"],
            label_column=options["label_column"],
            id_column=options["id_column"],
            cutoff=options["cutoff"],
        )
        info = {"source": source.to_dict(), **load_report.to_dict()}
        return dataset, None, info
    if source.kind == "synthetic":
        dataset = make_synthetic(
            n=options["n"],
            p=options["p"],
            n_informative=options["n_informative"],
            effect_size=options["effect_size"],
            positive_fraction=options["positive_fraction"],
            seed=child_seed(config.seed, "data"),
        )
        info = {"source": source.to_dict(), "n_loaded": dataset.n_samples}
        return dataset, None, info
    table = make_synthetic_volumes(
        n=options["n"],
        seed=child_seed(config.seed, "data"),
        positive_fraction=options["positive_fraction"],
        atrophy_effect=options["atrophy_effect"],
    )
    info = {"source": source.to_dict(), "n_loaded": table.n_subjects}
    return None, table, info


def _engineer(config: RunConfig, dataset: Dataset | None, table):
    settings = config.features
    if table is None and settings is None:
        return dataset, None
    registry = (
        load_registry(settings.registry_path)
        if settings is not None and settings.registry_path is not None
        else None
    )
    if table is None:
        # csv rows become a volume table using the configured special columns
        table, construction_rejects = RegionalVolumeTable.from_dataset(
            dataset,
            tiv_column=settings.tiv_column,
            age_column=settings.age_column,
            registry=registry,
        )
    else:
        construction_rejects = []
    recipe = (
        FeatureRecipe()
        if settings is None
        else FeatureRecipe(
            steps=settings.steps,
            include_raw=settings.include_raw,
            registry=registry,
        )
    )
    engineered, rejections = build_feature_matrix(table, recipe)
    notes = {
        "steps": list(recipe.steps),
        "include_raw": recipe.include_raw,
        "n_subjects": engineered.n_samples,
        "n_features": engineered.n_features,
        "unpaired_regions": list(table.unpaired_regions),
        "rejections": [list(r) for r in (*construction_rejects, *rejections)],
    }
    return engineered, notes


def _run_protocols(config: RunConfig, dataset: Dataset, workers: int):
    settings = config.protocol
    labels = model_labels([entry.spec for entry in config.models])
    base = ProtocolConfig(
        strategy=settings.strategies[0],
        model=config.models[0].spec,
        outer_k=settings.outer_k,
        inner_k=settings.inner_k,
        repeats=settings.repeats,
        grid=config.models[0].grid,
        threshold_grid=settings.threshold_grid,
        calibrate=settings.calibrate,
        seed=config.seed,
    )
    if len(settings.strategies) == 1:
        strategy = settings.strategies[0]
        reports = {strategy: {}}
        for label, entry in zip(labels, config.models):
            cfg = ProtocolConfig(
                strategy=strategy,
                model=entry.spec,
                outer_k=settings.outer_k,
                inner_k=settings.inner_k,
                repeats=settings.repeats,
                grid=entry.grid,
                threshold_grid=settings.threshold_grid,
                calibrate=settings.calibrate,
                seed=config.seed,
            )
            reports[strategy][label] = run_strategy(dataset, cfg, workers)
        return reports, None
    comparison = compare_strategies(
        dataset,
        base,
        settings.strategies,
        models=[(entry.spec, entry.grid) for entry in config.models],
        workers=workers,
    )
    return comparison.reports, comparison


def primary_strategy(reports: dict) -> str:
    return (
        "nested_calibrated"
        if "nested_calibrated" in reports
        else next(iter(reports))
    )


def primary_report(reports: dict) -> EvaluationReport:
    row = reports[primary_strategy(reports)]
    return next(iter(row.values()))


def _emit_all(
    config: RunConfig,
    out_dir: Path,
    ingestion: dict,
    feature_notes: dict | None,
    reports: dict,
    comparison: StrategyComparison | None,
) -> list[Path]:
    written: list[Path] = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "run_report.json"
        write_run_report(
            path, config.raw, ingestion, feature_notes, reports, comparison
        )
        written.append(path)

        path = out_dir / "table_models.csv"
        write_model_table(reports[primary_strategy(reports)], path)
        written.append(path)

        if comparison is not None:
            path = out_dir / "table_strategies.csv"
            write_strategy_table(comparison, path)
            written.append(path)

        for strategy, row in reports.items():
            for label, report in row.items():
                written.extend(emit_report(report, out_dir / strategy / label))

        if config.figures:
            from .figures import render_figures

            written.extend(
                render_figures(
                    primary_report(reports), comparison, out_dir / "figures"
                )
            )
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return written


def run_experiment(
    config: RunConfig, out_dir=None, workers: int = 1
) -> RunResult:
    """Execute a validated configuration and write its report files.

    ``out_dir`` overrides the configured output directory. The exit code is
    0 for a successful run whose nested ledger verdicts are all clean, 2 when
    any nested verdict records a violation.
    """
    destination = Path(out_dir if out_dir is not None else config.out_dir or "results")

    dataset, table, ingestion = _staged("ingestion", _ingest, config)
    dataset, feature_notes = _staged(
        "feature-engineering", _engineer, config, dataset, table
    )
    reports, comparison = _staged(
        "protocol", _run_protocols, config, dataset, workers
    )
    paths = _staged(
        "report",
        _emit_all,
        config,
        destination,
        ingestion,
        feature_notes,
        reports,
        comparison,
    )

    exit_code = 0
    nested = reports.get("nested_calibrated", {})
    if any(not report.ledger_verdict.clean for report in nested.values()):
        exit_code = 2
    return RunResult(
        out_dir=destination,
        reports=reports,
        comparison=comparison,
        ingestion=ingestion,
        feature_notes=feature_notes,
        paths=tuple(paths),
        exit_code=exit_code,
    )

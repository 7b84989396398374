"""Command-line entry point.

    nestedeval run <config.json> [--out DIR] [--workers N] [--verify-ledger]

Exit codes: 0 = success with clean nested ledger verdicts, 2 = a ledger
violation gates the run (always for nested strategies; for every strategy
under --verify-ledger), 1 = any error. The worker count parallelizes
independent folds/repeats and never changes results; it can also be set
through the NESTEDEVAL_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import parse_config
from .errors import ConfigError, DataError
from .runner import StageError, run_experiment

ENV_WORKERS = "NESTEDEVAL_WORKERS"


def _default_workers() -> int:
    raw = os.environ.get(ENV_WORKERS)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{ENV_WORKERS} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{ENV_WORKERS} must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nestedeval",
        description="Leakage-controlled model evaluation for tabular morphometry.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a configuration file")
    run.add_argument("config", help="path to the JSON run configuration")
    run.add_argument("--out", default=None, help="output directory (overrides config)")
    run.add_argument(
        "--workers",
        type=int,
        default=None,
        help="parallel workers for independent folds (default 1 or "
        f"${ENV_WORKERS}); results do not depend on this",
    )
    run.add_argument(
        "--verify-ledger",
        action="store_true",
        help="print each strategy's access-ledger audit and fail the run "
        "if any strategy (not only nested) recorded a violation",
    )
    return parser


def _summary_lines(result) -> list[str]:
    lines = []
    for strategy, row in result.reports.items():
        for label, report in row.items():
            ba = report.metrics["ba"]
            sd = "" if ba.sd is None else f" ± {ba.sd:.3f}"
            verdict = "clean" if report.ledger_verdict.clean else "VIOLATIONS"
            lines.append(
                f"{strategy:>18} | {label:<20} | BA {ba.mean:.3f}{sd} "
                f"| ledger {verdict}"
            )
    return lines


def _audit_lines(result) -> list[str]:
    lines = ["ledger audit:"]
    for strategy, row in result.reports.items():
        for label, report in row.items():
            verdict = report.ledger_verdict
            status = "clean" if verdict.clean else (
                f"{len(verdict.violations)} row violation(s), "
                f"{len(verdict.ordering_violations)} ordering violation(s)"
            )
            lines.append(
                f"  {strategy}/{label}: {verdict.n_entries} entries over "
                f"{verdict.n_folds} fold(s) -> {status}"
            )
    return lines


def _run(args) -> int:
    workers = args.workers if args.workers is not None else _default_workers()
    if workers < 1:
        raise ConfigError(f"--workers must be >= 1, got {workers}")
    config = parse_config(args.config)
    result = run_experiment(config, out_dir=args.out, workers=workers)

    for line in _summary_lines(result):
        print(line)
    if args.verify_ledger:
        for line in _audit_lines(result):
            print(line)
    print(f"wrote {len(result.paths)} file(s) to {result.out_dir}")

    exit_code = result.exit_code
    if args.verify_ledger and exit_code == 0:
        dirty = any(
            not report.ledger_verdict.clean
            for row in result.reports.values()
            for report in row.values()
        )
        if dirty:
            exit_code = 2
    return exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1
    except (ConfigError, DataError) as exc:
        print(f"error [config] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

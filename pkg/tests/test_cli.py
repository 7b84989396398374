"""Tests for the command-line interface: exit codes, output, env handling."""

import json

import pytest

from nestedeval.cli import ENV_WORKERS, build_parser, main
from nestedeval.ledger import LedgerVerdict


def write_config(tmp_path, **overrides):
    obj = {
        "seed": 5,
        "figures": False,
        "data": {
            "kind": "synthetic",
            "n": 90,
            "p": 5,
            "n_informative": 2,
            "effect_size": 1.5,
        },
        "models": [{"kind": "logistic_regression", "grid": {"C": [1.0]}}],
        "protocol": {
            "strategies": ["nested_calibrated"],
            "outer_k": 3,
            "inner_k": 2,
        },
    }
    obj.update(overrides)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(obj))
    return path


class TestParser:
    def test_requires_a_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_run_arguments(self):
        args = build_parser().parse_args(
            ["run", "cfg.json", "--out", "o", "--workers", "3", "--verify-ledger"]
        )
        assert args.config == "cfg.json"
        assert args.out == "o"
        assert args.workers == 3
        assert args.verify_ledger is True


class TestExitCodes:
    def test_clean_nested_run_exits_zero(self, tmp_path, capsys):
        config = write_config(tmp_path)
        code = main(["run", str(config), "--out", str(tmp_path / "out")])
        out = capsys.readouterr().out
        assert code == 0
        assert "ledger clean" in out
        assert f"file(s) to {tmp_path / 'out'}" in out
        assert (tmp_path / "out" / "run_report.json").exists()

    def test_naive_violations_do_not_gate_by_default(self, tmp_path, capsys):
        config = write_config(
            tmp_path,
            protocol={"strategies": ["naive_cv"], "outer_k": 3, "inner_k": 2},
        )
        code = main(["run", str(config), "--out", str(tmp_path / "out")])
        out = capsys.readouterr().out
        assert code == 0
        assert "ledger VIOLATIONS" in out

    def test_verify_ledger_gates_on_any_violation(self, tmp_path, capsys):
        config = write_config(
            tmp_path,
            protocol={"strategies": ["naive_cv"], "outer_k": 3, "inner_k": 2},
        )
        code = main(
            ["run", str(config), "--out", str(tmp_path / "out"), "--verify-ledger"]
        )
        out = capsys.readouterr().out
        assert code == 2
        assert "ledger audit:" in out
        assert "row violation(s)" in out

    def test_verify_ledger_passes_clean_strategies(self, tmp_path, capsys):
        config = write_config(
            tmp_path,
            protocol={"strategies": ["holdout"], "outer_k": 3, "inner_k": 2,
                      "repeats": 2},
        )
        code = main(
            ["run", str(config), "--out", str(tmp_path / "out"), "--verify-ledger"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "-> clean" in out

    def test_dirty_nested_verdict_exits_two(self, tmp_path, monkeypatch):
        def dirty_verdict(ledger, plan):
            return LedgerVerdict(
                violations=(("tuning", 0, 1),),
                ordering_violations=(),
                n_entries=len(ledger),
                n_folds=plan.k,
            )

        monkeypatch.setattr(
            "nestedeval.protocol.ledger_assert_clean", dirty_verdict
        )
        config = write_config(tmp_path)
        code = main(["run", str(config), "--out", str(tmp_path / "out")])
        assert code == 2


class TestErrorPaths:
    def test_missing_config_file(self, tmp_path, capsys):
        code = main(["run", str(tmp_path / "absent.json")])
        err = capsys.readouterr().err
        assert code == 1
        assert err.startswith("error [config]")
        assert "cannot read configuration file" in err

    def test_invalid_config_content(self, tmp_path, capsys):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"data": {"kind": "nope"}}))
        code = main(["run", str(path)])
        err = capsys.readouterr().err
        assert code == 1
        assert err.startswith("error [config]")

    def test_stage_errors_name_the_stage(self, tmp_path, capsys):
        config = write_config(
            tmp_path,
            data={"kind": "csv", "path": str(tmp_path / "absent.csv"),
                  "label_column": "cdr"},
        )
        code = main(["run", str(config), "--out", str(tmp_path / "out")])
        err = capsys.readouterr().err
        assert code == 1
        assert err.startswith("error [ingestion]")

    def test_workers_must_be_positive(self, tmp_path, capsys):
        config = write_config(tmp_path)
        code = main(["run", str(config), "--workers", "0"])
        err = capsys.readouterr().err
        assert code == 1
        assert "--workers must be >= 1" in err


class TestWorkersEnv:
    def test_env_value_used(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv(ENV_WORKERS, "2")
        config = write_config(tmp_path)
        code = main(["run", str(config), "--out", str(tmp_path / "out")])
        assert code == 0

    def test_env_must_be_integer(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv(ENV_WORKERS, "many")
        config = write_config(tmp_path)
        code = main(["run", str(config), "--out", str(tmp_path / "out")])
        err = capsys.readouterr().err
        assert code == 1
        assert f"{ENV_WORKERS} must be an integer" in err

    def test_env_must_be_positive(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv(ENV_WORKERS, "0")
        config = write_config(tmp_path)
        code = main(["run", str(config), "--out", str(tmp_path / "out")])
        err = capsys.readouterr().err
        assert code == 1
        assert f"{ENV_WORKERS} must be >= 1" in err

    def test_flag_overrides_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv(ENV_WORKERS, "many")
        config = write_config(tmp_path)
        # an explicit --workers wins, so the bad env value is never read
        code = main(
            ["run", str(config), "--out", str(tmp_path / "out"), "--workers", "1"]
        )
        assert code == 0


class TestSummaryOutput:
    def test_reports_file_count(self, tmp_path, capsys):
        config = write_config(tmp_path)
        out_dir = tmp_path / "out"
        code = main(["run", str(config), "--out", str(out_dir)])
        out = capsys.readouterr().out
        assert code == 0
        written = [p for p in out_dir.rglob("*") if p.is_file()]
        assert f"wrote {len(written)} file(s) to {out_dir}" in out

    def test_one_summary_line_per_report(self, tmp_path, capsys):
        config = write_config(
            tmp_path,
            models=[{"kind": "logistic_regression", "grid": {"C": [1.0]}},
                    {"kind": "gaussian_nb"}],
            protocol={"strategies": ["nested_calibrated", "holdout"],
                      "outer_k": 3, "inner_k": 2, "repeats": 2},
        )
        code = main(["run", str(config), "--out", str(tmp_path / "out")])
        out = capsys.readouterr().out
        assert code == 0
        ba_lines = [line for line in out.splitlines() if "| BA " in line]
        assert len(ba_lines) == 4
        assert any("gaussian_nb" in line for line in ba_lines)

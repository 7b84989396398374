"""Strict JSON run configuration.

A run is fully determined by one JSON file: data source, feature recipe,
model list, protocol settings, output directory, root seed. Validation is
strict — unknown keys are rejected with the offending path and a spelling
suggestion — and the parsed object is echoed verbatim into every report so
runs can be reproduced exactly.
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass

from .errors import ConfigError
from .features import STEP_NAMES
from .models import MODEL_KINDS, WEIGHTING_SCHEMES, HyperParamGrid, ModelSpec
from .protocol import STRATEGIES

DEFAULT_SEED = 42
DATA_KINDS = ("csv", "synthetic", "synthetic_volumes")


def _suggest(key: str, valid) -> str:
    close = difflib.get_close_matches(key, list(valid), n=1)
    return f" (did you mean {close[0]!r}?)" if close else ""


def _reject_unknown(obj: dict, valid, where: str):
    for key in obj:
        if key not in valid:
            raise ConfigError(
                f"{where}: unknown key {key!r}{_suggest(key, valid)}; "
                f"valid keys: {sorted(valid)}"
            )


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return obj[key]


def _as_mapping(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected an object, got {type(value).__name__}")
    return value


def _as_bool(value, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{where}: expected a boolean, got {value!r}")
    return value


def _as_count(value, where: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{where}: must be >= {minimum}, got {value}")
    return value


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _as_string(value, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{where}: expected a nonempty string, got {value!r}")
    return value


@dataclass(frozen=True)
class DataSource:
    """Where the subjects come from: a CSV file or a synthetic generator."""

    kind: str
    options: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.options}


@dataclass(frozen=True)
class FeatureSettings:
    """Feature-engineering block: recipe steps plus table-construction columns."""

    steps: tuple[str, ...]
    include_raw: bool
    tiv_column: str | None
    age_column: str | None
    registry_path: str | None


@dataclass(frozen=True)
class ModelEntry:
    """One model to evaluate, with an optional explicit hyperparameter grid."""

    spec: ModelSpec
    grid: HyperParamGrid | None


@dataclass(frozen=True)
class ProtocolSettings:
    """Strategy list and the knobs shared by every strategy run."""

    strategies: tuple[str, ...]
    outer_k: int
    inner_k: int
    repeats: int
    threshold_grid: tuple[float, ...] | None
    calibrate: bool


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``raw`` is the parsed JSON, echoed verbatim."""

    raw: dict
    seed: int
    out_dir: str | None
    figures: bool
    data: DataSource
    features: FeatureSettings | None
    models: tuple[ModelEntry, ...]
    protocol: ProtocolSettings


_DATA_KEYS = {
    "csv": {"kind", "path", "label_column", "id_column", "cutoff"},
    "synthetic": {
        "kind", "n", "p", "n_informative", "effect_size", "positive_fraction",
    },
    "synthetic_volumes": {"kind", "n", "positive_fraction", "atrophy_effect"},
}


def _parse_data(obj, where: str) -> DataSource:
    obj = _as_mapping(obj, where)
    kind = _as_string(_require(obj, "kind", where), f"{where}.kind")
    if kind not in DATA_KINDS:
        raise ConfigError(
            f"{where}.kind: unknown data kind {kind!r}{_suggest(kind, DATA_KINDS)}; "
            f"valid kinds: {list(DATA_KINDS)}"
        )
    _reject_unknown(obj, _DATA_KEYS[kind], where)
    options: dict = {}
    if kind == "csv":
        options["path"] = _as_string(_require(obj, "path", where), f"{where}.path")
        options["label_column"] = _as_string(
            _require(obj, "label_column", where), f"{where}.label_column"
        )
        if obj.get("id_column") is not None:
            options["id_column"] = _as_string(obj["id_column"], f"{where}.id_column")
        else:
            options["id_column"] = None
        options["cutoff"] = _as_number(obj.get("cutoff", 3.0), f"{where}.cutoff")
    elif kind == "synthetic":
        options["n"] = _as_count(_require(obj, "n", where), f"{where}.n", 2)
        options["p"] = _as_count(obj.get("p", 50), f"{where}.p", 1)
        options["n_informative"] = _as_count(
            obj.get("n_informative", 5), f"{where}.n_informative", 0
        )
        options["effect_size"] = _as_number(
            obj.get("effect_size", 1.0), f"{where}.effect_size"
        )
        options["positive_fraction"] = _as_number(
            obj.get("positive_fraction", 0.5), f"{where}.positive_fraction"
        )
        if options["n_informative"] > options["p"]:
            raise ConfigError(
                f"{where}.n_informative: exceeds p ({options['n_informative']} > "
                f"{options['p']})"
            )
    else:
        options["n"] = _as_count(_require(obj, "n", where), f"{where}.n", 2)
        options["positive_fraction"] = _as_number(
            obj.get("positive_fraction", 0.5), f"{where}.positive_fraction"
        )
        options["atrophy_effect"] = _as_number(
            obj.get("atrophy_effect", 1.0), f"{where}.atrophy_effect"
        )
    if "positive_fraction" in options and not 0.0 < options["positive_fraction"] < 1.0:
        raise ConfigError(
            f"{where}.positive_fraction: must lie in (0, 1), got "
            f"{options['positive_fraction']}"
        )
    return DataSource(kind=kind, options=options)


_FEATURE_KEYS = {"steps", "include_raw", "tiv_column", "age_column", "registry"}


def _parse_features(obj, where: str, data_kind: str) -> FeatureSettings:
    obj = _as_mapping(obj, where)
    if data_kind == "synthetic":
        raise ConfigError(
            f"{where}: feature engineering needs a regional-volume table; "
            "data kind 'synthetic' produces a plain feature matrix"
        )
    _reject_unknown(obj, _FEATURE_KEYS, where)
    raw_steps = obj.get("steps", list(STEP_NAMES))
    if not isinstance(raw_steps, list) or not raw_steps:
        raise ConfigError(f"{where}.steps: expected a nonempty list of step names")
    steps = []
    for i, step in enumerate(raw_steps):
        step = _as_string(step, f"{where}.steps[{i}]")
        if step not in STEP_NAMES:
            raise ConfigError(
                f"{where}.steps[{i}]: unknown step {step!r}"
                f"{_suggest(step, STEP_NAMES)}; valid steps: {list(STEP_NAMES)}"
            )
        steps.append(step)
    if len(set(steps)) != len(steps):
        raise ConfigError(f"{where}.steps: steps must not repeat")
    include_raw = _as_bool(obj.get("include_raw", True), f"{where}.include_raw")
    tiv_column = None
    age_column = None
    if data_kind == "csv":
        tiv_column = _as_string(
            _require(obj, "tiv_column", where), f"{where}.tiv_column"
        )
        if obj.get("age_column") is not None:
            age_column = _as_string(obj["age_column"], f"{where}.age_column")
    elif "tiv_column" in obj or "age_column" in obj:
        raise ConfigError(
            f"{where}: tiv_column/age_column apply only to csv data; "
            "synthetic volume tables carry both already"
        )
    registry_path = None
    if obj.get("registry") is not None:
        registry_path = _as_string(obj["registry"], f"{where}.registry")
    return FeatureSettings(
        steps=tuple(steps),
        include_raw=include_raw,
        tiv_column=tiv_column,
        age_column=age_column,
        registry_path=registry_path,
    )


_MODEL_KEYS = {"kind", "hyperparams", "class_weighting", "grid"}


def _parse_model(obj, where: str) -> ModelEntry:
    obj = _as_mapping(obj, where)
    _reject_unknown(obj, _MODEL_KEYS, where)
    kind = _as_string(_require(obj, "kind", where), f"{where}.kind")
    if kind not in MODEL_KINDS:
        raise ConfigError(
            f"{where}.kind: unknown model kind {kind!r}{_suggest(kind, MODEL_KINDS)}; "
            f"valid kinds: {list(MODEL_KINDS)}"
        )
    hyperparams = _as_mapping(obj.get("hyperparams", {}), f"{where}.hyperparams")
    weighting = obj.get("class_weighting", "none")
    if weighting not in WEIGHTING_SCHEMES:
        raise ConfigError(
            f"{where}.class_weighting: unknown scheme {weighting!r}"
            f"{_suggest(str(weighting), WEIGHTING_SCHEMES)}; "
            f"valid schemes: {list(WEIGHTING_SCHEMES)}"
        )
    try:
        spec = ModelSpec(kind=kind, hyperparams=hyperparams, class_weighting=weighting)
    except ValueError as exc:
        raise ConfigError(f"{where}.hyperparams: {exc}") from exc
    grid = None
    if obj.get("grid") is not None:
        grid_obj = _as_mapping(obj["grid"], f"{where}.grid")
        try:
            grid = HyperParamGrid.from_dict(grid_obj)
            for candidate in grid.candidates():
                spec.with_hyperparams(candidate)
        except ValueError as exc:
            raise ConfigError(f"{where}.grid: {exc}") from exc
    return ModelEntry(spec=spec, grid=grid)


_PROTOCOL_KEYS = {
    "strategies", "outer_k", "inner_k", "repeats", "threshold_grid", "calibrate",
}


def _parse_protocol(obj, where: str) -> ProtocolSettings:
    obj = _as_mapping(obj, where)
    _reject_unknown(obj, _PROTOCOL_KEYS, where)
    raw_list = _require(obj, "strategies", where)
    if not isinstance(raw_list, list) or not raw_list:
        raise ConfigError(f"{where}.strategies: expected a nonempty list")
    strategies = []
    for i, strategy in enumerate(raw_list):
        strategy = _as_string(strategy, f"{where}.strategies[{i}]")
        if strategy not in STRATEGIES:
            raise ConfigError(
                f"{where}.strategies[{i}]: unknown strategy {strategy!r}"
                f"{_suggest(strategy, STRATEGIES)}; valid: {list(STRATEGIES)}"
            )
        strategies.append(strategy)
    if len(set(strategies)) != len(strategies):
        raise ConfigError(f"{where}.strategies: strategies must not repeat")
    threshold_grid = None
    if obj.get("threshold_grid") is not None:
        raw_grid = obj["threshold_grid"]
        if not isinstance(raw_grid, list) or not raw_grid:
            raise ConfigError(
                f"{where}.threshold_grid: expected a nonempty list of numbers"
            )
        values = tuple(
            _as_number(t, f"{where}.threshold_grid[{i}]")
            for i, t in enumerate(raw_grid)
        )
        if any(not 0.0 < t < 1.0 for t in values):
            raise ConfigError(
                f"{where}.threshold_grid: thresholds must lie strictly in (0, 1)"
            )
        threshold_grid = values
    return ProtocolSettings(
        strategies=tuple(strategies),
        outer_k=_as_count(obj.get("outer_k", 5), f"{where}.outer_k", 2),
        inner_k=_as_count(obj.get("inner_k", 3), f"{where}.inner_k", 2),
        repeats=_as_count(obj.get("repeats", 20), f"{where}.repeats", 1),
        threshold_grid=threshold_grid,
        calibrate=_as_bool(obj.get("calibrate", True), f"{where}.calibrate"),
    )


_TOP_KEYS = {"seed", "out_dir", "figures", "data", "features", "models", "protocol"}


def build_config(obj: dict, source: str = "config") -> RunConfig:
    """Validate a parsed JSON object into a RunConfig."""
    obj = _as_mapping(obj, source)
    _reject_unknown(obj, _TOP_KEYS, source)
    seed = _as_count(obj.get("seed", DEFAULT_SEED), f"{source}.seed", 0)
    out_dir = None
    if obj.get("out_dir") is not None:
        out_dir = _as_string(obj["out_dir"], f"{source}.out_dir")
    figures = _as_bool(obj.get("figures", True), f"{source}.figures")
    data = _parse_data(_require(obj, "data", source), f"{source}.data")
    features = None
    if obj.get("features") is not None:
        features = _parse_features(obj["features"], f"{source}.features", data.kind)
    raw_models = _require(obj, "models", source)
    if not isinstance(raw_models, list) or not raw_models:
        raise ConfigError(f"{source}.models: expected a nonempty list of models")
    models = tuple(
        _parse_model(m, f"{source}.models[{i}]") for i, m in enumerate(raw_models)
    )
    protocol = _parse_protocol(_require(obj, "protocol", source), f"{source}.protocol")
    return RunConfig(
        raw=obj,
        seed=seed,
        out_dir=out_dir,
        figures=figures,
        data=data,
        features=features,
        models=models,
        protocol=protocol,
    )


def _no_duplicate_keys(pairs):
    seen = set()
    for key, _ in pairs:
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} in configuration JSON")
        seen.add(key)
    return dict(pairs)


def parse_config(path) -> RunConfig:
    """Load, parse, and validate a JSON configuration file."""
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration file {path}: {exc}") from exc
    try:
        obj = json.loads(text, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return build_config(obj, source=str(path))

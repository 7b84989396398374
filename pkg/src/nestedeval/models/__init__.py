"""From-scratch classifier panel with a uniform fit/score contract.

Seven model kinds share one interface: a ModelSpec (kind, hyperparams, class
weighting, seed) is fitted on a dataset view into a TrainedModel whose
``predict_scores`` returns per-row positive-class scores in [0, 1].

Class weighting "inverse_frequency" assigns each sample n / (2 * n_class),
applied as sample weights in impurity counts and likelihood terms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._bayes import fit_gnb_arrays, predict_gnb
from ._linear import fit_lda_arrays, fit_logistic_arrays, predict_linear
from ._neighbors import fit_knn_arrays, predict_knn
from ._splits import Split, best_split, gini_impurity
from ._trees import fit_forest_arrays, fit_tree_arrays, predict_trees

MODEL_KINDS = (
    "decision_tree",
    "random_forest",
    "extra_trees",
    "logistic_regression",
    "gaussian_nb",
    "knn",
    "lda",
)
WEIGHTING_SCHEMES = ("none", "inverse_frequency")

__all__ = [
    "MODEL_KINDS",
    "WEIGHTING_SCHEMES",
    "ModelSpec",
    "TrainedModel",
    "HyperParamGrid",
    "Split",
    "best_split",
    "gini_impurity",
    "compute_sample_weights",
    "validate_hyperparams",
    "default_grid",
    "fit_model",
    "fit_tree",
    "fit_forest",
    "fit_logistic_regression",
    "fit_gaussian_nb",
    "fit_knn",
    "fit_lda",
    "predict_scores",
]


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v) -> bool:
    return (_is_int(v) or isinstance(v, float)) and math.isfinite(v)


def _check_max_depth(v) -> bool:
    return v is None or (_is_int(v) and v >= 0)


def _check_min_leaf(v) -> bool:
    return _is_int(v) and v >= 1


def _check_max_features(v) -> bool:
    if v is None or v in ("sqrt", "log2"):
        return True
    if _is_int(v):
        return v >= 1
    return isinstance(v, float) and 0.0 < v <= 1.0


def _check_pos_int(v) -> bool:
    return _is_int(v) and v >= 1


def _check_bool(v) -> bool:
    return isinstance(v, bool)


def _check_positive_real(v) -> bool:
    return _is_real(v) and v > 0


_TREE_PARAMS = {
    "max_depth": _check_max_depth,
    "min_samples_leaf": _check_min_leaf,
    "max_features": _check_max_features,
}
_FOREST_PARAMS = dict(
    _TREE_PARAMS, n_estimators=_check_pos_int, bootstrap=_check_bool
)

_SCHEMAS: dict[str, dict] = {
    "decision_tree": _TREE_PARAMS,
    "random_forest": _FOREST_PARAMS,
    "extra_trees": _FOREST_PARAMS,
    "logistic_regression": {"C": _check_positive_real},
    "gaussian_nb": {},
    "knn": {"n_neighbors": _check_pos_int},
    "lda": {},
}

_DEFAULTS: dict[str, dict] = {
    "decision_tree": {"max_depth": None, "min_samples_leaf": 1, "max_features": None},
    "random_forest": {
        "n_estimators": 100,
        "max_depth": None,
        "min_samples_leaf": 1,
        "max_features": "sqrt",
        "bootstrap": True,
    },
    "extra_trees": {
        "n_estimators": 100,
        "max_depth": None,
        "min_samples_leaf": 1,
        "max_features": "sqrt",
        "bootstrap": False,
    },
    "logistic_regression": {"C": 1.0},
    "gaussian_nb": {},
    "knn": {"n_neighbors": 5},
    "lda": {},
}

_DEFAULT_GRIDS: dict[str, dict] = {
    "decision_tree": {
        "max_depth": [None, 5, 10, 20],
        "min_samples_leaf": [1, 2, 4, 10],
    },
    "random_forest": {
        "n_estimators": [100, 200, 500],
        "max_depth": [None, 5, 10, 20],
        "min_samples_leaf": [1, 2, 4, 10],
        "max_features": ["sqrt", "log2", 0.5],
    },
    "extra_trees": {
        "n_estimators": [100, 200, 500],
        "max_depth": [None, 5, 10, 20],
        "min_samples_leaf": [1, 2, 4, 10],
        "max_features": ["sqrt", "log2", 0.5],
    },
    "logistic_regression": {"C": [0.01, 0.1, 1.0, 10.0]},
    "gaussian_nb": {},
    "knn": {"n_neighbors": [3, 5, 7, 11]},
    "lda": {},
}


def validate_hyperparams(kind: str, hyperparams: dict) -> None:
    """Reject unknown names or out-of-range values for the given model kind."""
    if kind not in _SCHEMAS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    schema = _SCHEMAS[kind]
    for name, value in hyperparams.items():
        if name not in schema:
            raise ValueError(
                f"unknown hyperparameter {name!r} for {kind} "
                f"(known: {sorted(schema) or 'none'})"
            )
        if not schema[name](value):
            raise ValueError(f"invalid value {value!r} for {kind} hyperparameter {name!r}")


@dataclass(frozen=True)
class ModelSpec:
    """What to fit: model kind, hyperparameter overrides, weighting, seed."""

    kind: str
    hyperparams: dict = field(default_factory=dict)
    class_weighting: str = "none"
    seed: int = 0

    def __post_init__(self):
        validate_hyperparams(self.kind, self.hyperparams)
        if self.class_weighting not in WEIGHTING_SCHEMES:
            raise ValueError(
                f"unknown class_weighting {self.class_weighting!r}; "
                f"expected one of {WEIGHTING_SCHEMES}"
            )
        if not _is_int(self.seed) or self.seed < 0:
            raise ValueError("model seed must be a nonnegative integer")
        object.__setattr__(self, "hyperparams", dict(self.hyperparams))

    def resolved_hyperparams(self) -> dict:
        return {**_DEFAULTS[self.kind], **self.hyperparams}

    def with_hyperparams(self, updates: dict) -> "ModelSpec":
        return ModelSpec(
            kind=self.kind,
            hyperparams={**self.hyperparams, **updates},
            class_weighting=self.class_weighting,
            seed=self.seed,
        )

    def with_seed(self, seed: int) -> "ModelSpec":
        return ModelSpec(
            kind=self.kind,
            hyperparams=dict(self.hyperparams),
            class_weighting=self.class_weighting,
            seed=seed,
        )


@dataclass
class TrainedModel:
    """Fitted state plus everything needed to score new rows identically."""

    spec: ModelSpec
    feature_names: tuple[str, ...]
    parameters: dict
    importances: np.ndarray | None
    metadata: dict

    def importance_table(self) -> list[tuple[str, float]] | None:
        if self.importances is None:
            return None
        return list(zip(self.feature_names, (float(v) for v in self.importances)))


@dataclass(frozen=True)
class HyperParamGrid:
    """Per-name candidate lists with a fixed, deterministic enumeration order.

    Candidates enumerate lexicographically by parameter name, then by list
    position. A grid with no names yields exactly one empty candidate.
    """

    values: tuple[tuple[str, tuple], ...]

    @classmethod
    def from_dict(cls, mapping: dict) -> "HyperParamGrid":
        items = []
        for name in sorted(mapping):
            options = tuple(mapping[name])
            if not options:
                raise ValueError(f"grid entry {name!r} has no candidate values")
            items.append((name, options))
        return cls(values=tuple(items))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.values)

    @property
    def cardinality(self) -> int:
        out = 1
        for _, options in self.values:
            out *= len(options)
        return out

    def candidates(self) -> list[dict]:
        names = self.names
        pools = [options for _, options in self.values]
        return [dict(zip(names, combo)) for combo in itertools.product(*pools)]

    def override(self, mapping: dict) -> "HyperParamGrid":
        merged = {name: list(options) for name, options in self.values}
        merged.update({name: list(options) for name, options in mapping.items()})
        return HyperParamGrid.from_dict(merged)

    def to_dict(self) -> dict:
        return {name: list(options) for name, options in self.values}


def default_grid(kind: str) -> HyperParamGrid:
    """Documented default search grid for a model kind (config-overridable)."""
    if kind not in _DEFAULT_GRIDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    grid = HyperParamGrid.from_dict(_DEFAULT_GRIDS[kind])
    for candidate in grid.candidates():
        validate_hyperparams(kind, candidate)
    return grid


def compute_sample_weights(labels, scheme: str) -> np.ndarray:
    y = np.asarray(labels)
    if scheme == "none":
        return np.ones(y.size)
    if scheme == "inverse_frequency":
        n = y.size
        weights = np.empty(n)
        for cls in (0, 1):
            mask = y == cls
            count = int(mask.sum())
            if count:
                weights[mask] = n / (2.0 * count)
        return weights
    raise ValueError(f"unknown class_weighting {scheme!r}")


_FITTERS = {
    "decision_tree": lambda X, y, w, hp, seed: fit_tree_arrays(X, y, w, hp, seed),
    "random_forest": lambda X, y, w, hp, seed: fit_forest_arrays(
        X, y, w, hp, seed, "random_forest"
    ),
    "extra_trees": lambda X, y, w, hp, seed: fit_forest_arrays(
        X, y, w, hp, seed, "extra_trees"
    ),
    "logistic_regression": fit_logistic_arrays,
    "gaussian_nb": fit_gnb_arrays,
    "knn": fit_knn_arrays,
    "lda": fit_lda_arrays,
}

_PREDICTORS = {
    "decision_tree": predict_trees,
    "random_forest": predict_trees,
    "extra_trees": predict_trees,
    "logistic_regression": predict_linear,
    "gaussian_nb": predict_gnb,
    "knn": predict_knn,
    "lda": predict_linear,
}


def fit_model(data, spec: ModelSpec) -> TrainedModel:
    """Fit any panel model on a dataset view (needs .X, .y, .feature_names)."""
    X = np.asarray(data.X, dtype=np.float64)
    y = np.asarray(data.y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("cannot fit on an empty view")
    if np.unique(y).size < 2:
        raise ValueError(f"single-class training data for {spec.kind}")
    w = compute_sample_weights(y, spec.class_weighting)
    hp = spec.resolved_hyperparams()
    parameters, importances, metadata = _FITTERS[spec.kind](X, y, w, hp, spec.seed)
    return TrainedModel(
        spec=spec,
        feature_names=tuple(data.feature_names),
        parameters=parameters,
        importances=importances,
        metadata=metadata,
    )


def _kind_checked(data, spec: ModelSpec, allowed: tuple[str, ...]) -> TrainedModel:
    if spec.kind not in allowed:
        raise ValueError(f"expected a spec of kind {allowed}, got {spec.kind!r}")
    return fit_model(data, spec)


def fit_tree(data, spec: ModelSpec) -> TrainedModel:
    return _kind_checked(data, spec, ("decision_tree",))


def fit_forest(data, spec: ModelSpec) -> TrainedModel:
    return _kind_checked(data, spec, ("random_forest", "extra_trees"))


def fit_logistic_regression(data, spec: ModelSpec) -> TrainedModel:
    return _kind_checked(data, spec, ("logistic_regression",))


def fit_gaussian_nb(data, spec: ModelSpec) -> TrainedModel:
    return _kind_checked(data, spec, ("gaussian_nb",))


def fit_knn(data, spec: ModelSpec) -> TrainedModel:
    return _kind_checked(data, spec, ("knn",))


def fit_lda(data, spec: ModelSpec) -> TrainedModel:
    return _kind_checked(data, spec, ("lda",))


def predict_scores(model: TrainedModel, rows) -> np.ndarray:
    """Score rows with a trained model; names (when present) must match training."""
    names = getattr(rows, "feature_names", None)
    X = np.asarray(rows.X if hasattr(rows, "X") else rows, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if names is not None and tuple(names) != model.feature_names:
        raise ValueError("feature names/order do not match the training columns")
    if X.shape[1] != len(model.feature_names):
        raise ValueError(
            f"expected {len(model.feature_names)} feature columns, got {X.shape[1]}"
        )
    scores = np.asarray(_PREDICTORS[model.spec.kind](model.parameters, X), dtype=np.float64)
    return scores

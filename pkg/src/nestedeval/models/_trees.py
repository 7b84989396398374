"""Decision tree and forest ensembles built on the shared split search.

Trees are grown iteratively in preorder so node numbering, and therefore
every per-node random draw, is reproducible from the model seed alone.
"""

from __future__ import annotations

import math

import numpy as np

from ..seeding import child_seed
from ._splits import best_split


class _Tree:
    """Array-of-struct binary tree; feature < 0 marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "value", "importance_raw")

    def __init__(self, feature, threshold, left, right, value, importance_raw):
        self.feature = np.asarray(feature, dtype=np.intp)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.intp)
        self.right = np.asarray(right, dtype=np.intp)
        self.value = np.asarray(value, dtype=np.float64)
        self.importance_raw = importance_raw

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def normalized_importances(self) -> np.ndarray | None:
        total = self.importance_raw.sum()
        if total <= 0:
            return None
        return self.importance_raw / total

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.intp)
        while True:
            feat = self.feature[node]
            active = np.flatnonzero(feat >= 0)
            if active.size == 0:
                break
            cur = node[active]
            go_left = X[active, feat[active]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
        return self.value[node]


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    *,
    mode: str,
    max_depth: int | None,
    min_samples_leaf: int,
    max_features_k: int,
    seed: int,
) -> _Tree:
    n, p = X.shape
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    importance = np.zeros(p)
    w_root = w.sum()
    depth_limit = math.inf if max_depth is None else max_depth

    stack = [(np.arange(n, dtype=np.intp), 0, -1, 0)]
    while stack:
        rows, depth, parent, side = stack.pop()
        node_id = len(feature)
        if parent >= 0:
            if side == 0:
                left[parent] = node_id
            else:
                right[parent] = node_id

        y_node = y[rows]
        w_node_vec = w[rows]
        w_node = w_node_vec.sum()
        node_value = float(w_node_vec[y_node == 1].sum() / w_node)

        splittable = (
            depth < depth_limit
            and rows.size >= 2
            and rows.size >= 2 * min_samples_leaf
            and y_node.min() != y_node.max()
        )
        split = None
        if splittable:
            if max_features_k >= p:
                subset = np.arange(p, dtype=np.intp)
            else:
                sub_rng = np.random.default_rng(child_seed(seed, "features", node_id))
                subset = sub_rng.choice(p, size=max_features_k, replace=False)
            split = best_split(
                X[rows],
                y_node,
                w_node_vec,
                subset,
                mode,
                child_seed(seed, "threshold", node_id),
                min_samples_leaf,
            )

        if split is None:
            feature.append(-1)
            threshold.append(math.nan)
            left.append(-1)
            right.append(-1)
            value.append(node_value)
            continue

        feature.append(split.feature)
        threshold.append(split.threshold)
        left.append(-1)
        right.append(-1)
        value.append(node_value)
        importance[split.feature] += (w_node / w_root) * split.gain
        go_left = X[rows, split.feature] <= split.threshold
        # push right first so the left child pops next (preorder node ids)
        stack.append((rows[~go_left], depth + 1, node_id, 1))
        stack.append((rows[go_left], depth + 1, node_id, 0))

    return _Tree(feature, threshold, left, right, value, importance)


def fit_tree_arrays(X, y, w, params: dict, seed: int):
    tree = grow_tree(
        X,
        y,
        w,
        mode="exhaustive",
        max_depth=params["max_depth"],
        min_samples_leaf=params["min_samples_leaf"],
        max_features_k=_resolve_max_features(params["max_features"], X.shape[1]),
        seed=child_seed(seed, "tree", 0),
    )
    importances = tree.normalized_importances()
    return {"trees": [tree]}, importances, {"n_nodes": tree.n_nodes}


def fit_forest_arrays(X, y, w, params: dict, seed: int, kind: str):
    n, p = X.shape
    n_estimators = params["n_estimators"]
    if n_estimators < 1:
        raise ValueError("n_estimators must be at least 1")
    mode = "randomized" if kind == "extra_trees" else "exhaustive"
    k = _resolve_max_features(params["max_features"], p)

    trees = []
    for t in range(n_estimators):
        if params["bootstrap"]:
            rng = np.random.default_rng(child_seed(seed, "bootstrap", t))
            idx = rng.integers(0, n, size=n)
            X_t, y_t, w_t = X[idx], y[idx], w[idx]
        else:
            X_t, y_t, w_t = X, y, w
        trees.append(
            grow_tree(
                X_t,
                y_t,
                w_t,
                mode=mode,
                max_depth=params["max_depth"],
                min_samples_leaf=params["min_samples_leaf"],
                max_features_k=k,
                seed=child_seed(seed, "tree", t),
            )
        )

    per_tree = [t.normalized_importances() for t in trees]
    available = [v for v in per_tree if v is not None]
    # mean of per-tree normalized importances; sums to 1 up to float noise
    importances = np.mean(np.vstack(available), axis=0) if available else None
    metadata = {"n_trees": len(trees), "mode": mode}
    return {"trees": trees}, importances, metadata


def predict_trees(parameters: dict, X: np.ndarray) -> np.ndarray:
    # per-row reduction keeps batch and row-by-row scoring bit-identical
    scores = np.stack([tree.predict(X) for tree in parameters["trees"]], axis=1)
    return scores.mean(axis=1)


def _resolve_max_features(max_features, p: int) -> int:
    if max_features is None:
        return p
    if max_features == "sqrt":
        return max(1, int(math.sqrt(p)))
    if max_features == "log2":
        return max(1, int(math.log2(p)))
    if isinstance(max_features, bool):
        raise ValueError("max_features must not be a bool")
    if isinstance(max_features, int):
        if not 1 <= max_features <= p:
            raise ValueError(f"max_features={max_features} outside [1, {p}]")
        return max_features
    if isinstance(max_features, float):
        if not 0.0 < max_features <= 1.0:
            raise ValueError(f"fractional max_features must lie in (0, 1], got {max_features}")
        return max(1, int(max_features * p))
    raise ValueError(f"unsupported max_features value {max_features!r}")

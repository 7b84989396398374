"""Impurity computation and single-node split search for the tree family."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# gains below this are treated as "no impurity reduction" (float-sum noise)
_MIN_GAIN = 1e-12


def gini_impurity(class_counts) -> float:
    """Binary Gini impurity 1 - sum((count_c / total)^2), in [0, 0.5].

    Counts may be class-weighted (real-valued) when weighting is enabled.
    """
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.size == 0 or (counts < 0).any():
        raise ValueError("class counts must be nonnegative and nonempty")
    total = counts.sum()
    if total <= 0:
        raise ValueError("empty node: total count must be positive")
    fractions = counts / total
    return float(1.0 - np.sum(fractions**2))


def _weighted_gini(w_pos: np.ndarray, w_all: np.ndarray) -> np.ndarray:
    """Vectorized binary Gini from weighted positive mass / total mass."""
    p = w_pos / w_all
    return 2.0 * p * (1.0 - p)


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    gain: float


def best_split(
    X,
    y,
    sample_weight,
    feature_subset,
    mode: str,
    seed: int,
    min_samples_leaf: int = 1,
) -> Split | None:
    """Best (feature, threshold) by weighted impurity decrease, or None.

    exhaustive mode evaluates midpoints between consecutive distinct sorted
    values of each candidate feature; randomized mode draws one uniform
    threshold per candidate feature in (min, max). Rows with value <=
    threshold go left. Ties break on the first-encountered maximum in
    ascending (feature index, threshold) order. Returns None when no split
    reduces impurity or no candidate satisfies min_samples_leaf.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    w = np.asarray(sample_weight, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValueError("best_split needs at least 2 samples")
    features = np.sort(np.asarray(feature_subset, dtype=np.intp))
    if features.size == 0:
        raise ValueError("best_split needs at least one candidate feature")
    if mode not in ("exhaustive", "randomized"):
        raise ValueError(f"unknown split mode {mode!r}")

    w_total = w.sum()
    wpos_total = float(w[y == 1].sum())
    parent = _weighted_gini(np.array([wpos_total]), np.array([w_total]))[0]

    best: Split | None = None
    if mode == "randomized":
        rng = np.random.default_rng(seed)

    for j in features:
        x = X[:, j]
        if mode == "exhaustive":
            cand = _exhaustive_candidates(x, y, w, w_total, wpos_total, parent, min_samples_leaf)
        else:
            lo, hi = x.min(), x.max()
            if lo == hi:
                continue
            t = float(rng.uniform(lo, hi))
            cand = _gain_at(x, y, w, w_total, wpos_total, parent, t, min_samples_leaf)
        if cand is None:
            continue
        threshold, gain = cand
        if gain > _MIN_GAIN and (best is None or gain > best.gain):
            best = Split(feature=int(j), threshold=threshold, gain=gain)
    return best


def _exhaustive_candidates(x, y, w, w_total, wpos_total, parent, min_leaf):
    """Best midpoint threshold of one feature, first maximum in ascending order."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ws = w[order]
    wp = np.where(y[order] == 1, ws, 0.0)
    cum_w = np.cumsum(ws)
    cum_wp = np.cumsum(wp)

    n = xs.size
    boundary = xs[:-1] < xs[1:]  # split between position i and i+1
    left_count = np.arange(1, n)
    valid = boundary & (left_count >= min_leaf) & (n - left_count >= min_leaf)
    idx = np.flatnonzero(valid)
    if idx.size == 0:
        return None

    w_left = cum_w[idx]
    wp_left = cum_wp[idx]
    w_right = w_total - w_left
    wp_right = wpos_total - wp_left
    gain = (
        parent
        - (w_left / w_total) * _weighted_gini(wp_left, w_left)
        - (w_right / w_total) * _weighted_gini(wp_right, w_right)
    )
    best_pos = int(np.argmax(gain))  # first maximum, thresholds ascend with idx
    i = idx[best_pos]
    return (float((xs[i] + xs[i + 1]) / 2.0), float(gain[best_pos]))


def _gain_at(x, y, w, w_total, wpos_total, parent, threshold, min_leaf):
    """Impurity decrease for a fixed threshold, or None when infeasible."""
    left = x <= threshold
    n_left = int(left.sum())
    if n_left < min_leaf or (x.size - n_left) < min_leaf:
        return None
    w_left = float(w[left].sum())
    wp_left = float(w[left & (y == 1)].sum())
    w_right = w_total - w_left
    wp_right = wpos_total - wp_left
    if w_left <= 0 or w_right <= 0:
        return None
    gain = (
        parent
        - (w_left / w_total) * _weighted_gini(np.array([wp_left]), np.array([w_left]))[0]
        - (w_right / w_total) * _weighted_gini(np.array([wp_right]), np.array([w_right]))[0]
    )
    return (float(threshold), float(gain))

"""Confusion, ranking, and calibration metrics plus fold-level aggregation.

All functions are pure and stateless. Ranking metrics use the conventions:
ROC-AUC is the Mann-Whitney probability with ties counted 1/2; average
precision is the step-wise sum of precision-at-rank over positives, descending
score order, ties broken by lower row index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_THRESHOLD_GRID = tuple(i / 100 for i in range(1, 100))


def _as_binary(labels) -> np.ndarray:
    y = np.asarray(labels)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must contain only 0 and 1")
    return y.astype(np.int64)


def _require_both_classes(y: np.ndarray, what: str):
    if y.size == 0 or y.min() == y.max():
        raise ValueError(f"{what} requires both classes in labels")


@dataclass(frozen=True)
class ThresholdedOutcome:
    """Confusion counts and rates of thresholded probabilities."""

    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    tpr: float
    tnr: float
    balanced_accuracy: float

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "tpr": self.tpr,
            "tnr": self.tnr,
            "balanced_accuracy": self.balanced_accuracy,
        }


@dataclass(frozen=True)
class FoldSummary:
    """Per-fold values with the reported aggregate statistics.

    ``sd`` is the sample standard deviation (n-1 denominator); quantiles use
    linear interpolation. ``sd`` is None when only one value exists.
    """

    values: tuple[float, ...]
    mean: float
    sd: float | None
    median: float
    iqr: float

    def to_dict(self) -> dict:
        return {
            "values": list(self.values),
            "mean": self.mean,
            "sd": self.sd,
            "median": self.median,
            "iqr": self.iqr,
        }


def balanced_accuracy(labels, predictions) -> float:
    """(TPR + TNR) / 2 for binary predictions."""
    y = _as_binary(labels)
    _require_both_classes(y, "balanced_accuracy")
    pred = _as_binary(predictions)
    if pred.shape != y.shape:
        raise ValueError("labels and predictions must have matching shapes")
    tp = int(np.sum((y == 1) & (pred == 1)))
    tn = int(np.sum((y == 0) & (pred == 0)))
    tpr = tp / int(np.sum(y == 1))
    tnr = tn / int(np.sum(y == 0))
    return (tpr + tnr) / 2


def threshold_outcome(labels, probabilities, threshold: float) -> ThresholdedOutcome:
    """Confusion summary when predicting positive at probability >= threshold."""
    y = _as_binary(labels)
    _require_both_classes(y, "threshold_outcome")
    p = np.asarray(probabilities, dtype=np.float64)
    pred = p >= threshold
    pos = y == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    fn = int(np.sum(~pred & pos))
    tn = int(np.sum(~pred & ~pos))
    tpr = tp / (tp + fn)
    tnr = tn / (tn + fp)
    return ThresholdedOutcome(
        threshold=float(threshold),
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        tpr=tpr,
        tnr=tnr,
        balanced_accuracy=(tpr + tnr) / 2,
    )


def sweep_threshold(labels, probabilities, grid=None):
    """Evaluate BA at every grid threshold; return (t*, outcome at t*).

    Ties are broken toward the threshold nearest 0.5, then the smaller one.
    The default grid is 0.01 steps over [0.01, 0.99].
    """
    y = _as_binary(labels)
    _require_both_classes(y, "sweep_threshold")
    p = np.asarray(probabilities, dtype=np.float64)
    if p.min() < 0.0 or p.max() > 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    grid_arr = np.asarray(
        DEFAULT_THRESHOLD_GRID if grid is None else tuple(grid), dtype=np.float64
    )
    if grid_arr.size == 0:
        raise ValueError("threshold grid must be nonempty")

    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = y.size - n_pos
    pred = p[:, None] >= grid_arr[None, :]
    tp = pred[pos].sum(axis=0)
    tn = (~pred[~pos]).sum(axis=0)
    ba = (tp / n_pos + tn / n_neg) / 2

    best = ba.max()
    candidates = np.flatnonzero(ba == best)
    # round the centering distance so float noise cannot break a true tie
    distance = np.round(np.abs(grid_arr[candidates] - 0.5), 12)
    nearest = candidates[distance == distance.min()]
    winner = int(nearest[np.argmin(grid_arr[nearest])])
    t_star = float(grid_arr[winner])
    return t_star, threshold_outcome(y, p, t_star)


def roc_auc(labels, scores) -> float:
    """Probability a random positive outranks a random negative, ties at 1/2.

    Computed from average ranks (Mann-Whitney U), which equals explicit pair
    counting exactly.
    """
    y = _as_binary(labels)
    _require_both_classes(y, "roc_auc")
    s = np.asarray(scores, dtype=np.float64)
    n = s.size
    order = np.argsort(s, kind="stable")
    s_sorted = s[order]
    group_start = np.r_[True, s_sorted[1:] != s_sorted[:-1]]
    group_id = np.cumsum(group_start) - 1
    starts = np.flatnonzero(group_start)
    counts = np.diff(np.r_[starts, n])
    group_rank = starts + (counts - 1) / 2 + 1  # 1-based average rank
    ranks = np.empty(n)
    ranks[order] = group_rank[group_id]
    n_pos = int((y == 1).sum())
    n_neg = n - n_pos
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


def average_precision(labels, scores) -> float:
    """Step-wise average precision over positives in descending score order."""
    y = _as_binary(labels)
    if int((y == 1).sum()) == 0:
        raise ValueError("average_precision requires at least one positive")
    s = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-s, kind="stable")  # ties keep lower index first
    y_sorted = y[order]
    cum_pos = np.cumsum(y_sorted)
    ranks = np.flatnonzero(y_sorted == 1) + 1
    precisions = cum_pos[ranks - 1] / ranks
    return math.fsum(precisions.tolist()) / ranks.size


def brier_score(labels, probabilities) -> float:
    """Mean squared error between probabilities and binary labels."""
    y = _as_binary(labels)
    p = np.asarray(probabilities, dtype=np.float64)
    if p.min() < 0.0 or p.max() > 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    return float(np.mean((p - y) ** 2))


def expected_calibration_error(labels, probabilities, n_bins: int = 10) -> float:
    """Bin-weighted gap between mean confidence and empirical positive rate.

    Bins are equal-width and right-closed over (0, 1]; probability 0 falls in
    the first bin; empty bins are skipped. Bin edges snap with a 1e-9
    tolerance so values sitting exactly on a boundary land in the lower bin.
    """
    y = _as_binary(labels)
    p = np.asarray(probabilities, dtype=np.float64)
    if p.min() < 0.0 or p.max() > 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    if n_bins < 1:
        raise ValueError("n_bins must be at least 1")
    bin_idx = np.ceil(p * n_bins - 1e-9).astype(np.int64)
    bin_idx = np.clip(bin_idx, 1, n_bins) - 1
    n = p.size
    counts = np.bincount(bin_idx, minlength=n_bins)
    conf_sums = np.bincount(bin_idx, weights=p, minlength=n_bins)
    pos_sums = np.bincount(bin_idx, weights=y.astype(np.float64), minlength=n_bins)
    nonempty = counts > 0
    gaps = np.abs(
        conf_sums[nonempty] / counts[nonempty] - pos_sums[nonempty] / counts[nonempty]
    )
    return float(np.sum(counts[nonempty] / n * gaps))


def summarize_folds(values) -> FoldSummary:
    """Mean, sample SD, median, and IQR (linear-interpolation quantiles)."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.size < 2:
        raise ValueError("summarize_folds needs at least 2 values")
    return FoldSummary(
        values=tuple(float(v) for v in vals),
        mean=float(np.mean(vals)),
        sd=float(np.std(vals, ddof=1)),
        median=float(np.median(vals)),
        iqr=float(np.percentile(vals, 75) - np.percentile(vals, 25)),
    )


def single_value_summary(value: float) -> FoldSummary:
    """Degenerate summary for a single repeat: SD is absent, spread is zero."""
    v = float(value)
    return FoldSummary(values=(v,), mean=v, sd=None, median=v, iqr=0.0)


def roc_points(labels, scores) -> list[tuple[float, float, float]]:
    """(fpr, tpr, threshold) step-curve points, one per distinct score.

    The curve starts at (0, 0) with threshold +inf and ends at (1, 1) at the
    lowest score.
    """
    y = _as_binary(labels)
    _require_both_classes(y, "roc_points")
    s = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    points = [(0.0, 0.0, math.inf)]
    tp = fp = 0
    i = 0
    while i < y.size:
        j = i
        while j + 1 < y.size and s_sorted[j + 1] == s_sorted[i]:
            j += 1
        block = y_sorted[i : j + 1]
        tp += int(block.sum())
        fp += int(block.size - block.sum())
        points.append((fp / n_neg, tp / n_pos, float(s_sorted[i])))
        i = j + 1
    return points


def reliability_points(
    labels, probabilities, n_bins: int = 10
) -> list[tuple[float, float, float, float, int]]:
    """(bin_low, bin_high, mean_confidence, positive_rate, count) per nonempty bin."""
    y = _as_binary(labels)
    p = np.asarray(probabilities, dtype=np.float64)
    bin_idx = np.ceil(p * n_bins - 1e-9).astype(np.int64)
    bin_idx = np.clip(bin_idx, 1, n_bins) - 1
    points = []
    for b in range(n_bins):
        mask = bin_idx == b
        count = int(mask.sum())
        if count == 0:
            continue
        points.append(
            (
                b / n_bins,
                (b + 1) / n_bins,
                float(p[mask].mean()),
                float(y[mask].mean()),
                count,
            )
        )
    return points

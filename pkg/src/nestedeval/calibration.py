"""Platt sigmoid calibration fitted on held-out training scores.

The calibrator maps a raw score s to p(s) = 1 / (1 + exp(a*s + b)); for any
discriminative score/label association the fitted slope a comes out negative
(probability increases with score). Targets are the standard smoothed values
t+ = (N+ + 1)/(N+ + 2) and t- = 1/(N- + 2), minimized by damped Newton.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DatasetView, stratified_kfold
from .models import ModelSpec, fit_model, predict_scores
from .seeding import child_seed

_GRAD_TOL = 1e-8
_MAX_ITER = 200
_MIN_STEP = 2.0**-40


@dataclass(frozen=True)
class SigmoidCalibrator:
    a: float
    b: float
    final_nll: float
    n_iter: int
    converged: bool

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "final_nll": self.final_nll,
            "n_iter": self.n_iter,
            "converged": self.converged,
        }


def _nll_and_grad(theta: np.ndarray, s: np.ndarray, t: np.ndarray):
    z = theta[0] * s + theta[1]
    nll = float(np.sum(np.logaddexp(0.0, z) - (1.0 - t) * z))
    p = _sigmoid_neg(z)
    residual = t - p
    return nll, np.array([residual @ s, residual.sum()])


def _sigmoid_neg(z: np.ndarray) -> np.ndarray:
    """1 / (1 + exp(z)), computed stably."""
    out = np.empty_like(z)
    neg = z <= 0
    out[neg] = 1.0 / (1.0 + np.exp(z[neg]))
    ez = np.exp(-z[~neg])
    out[~neg] = ez / (1.0 + ez)
    return out


def fit_platt(scores, labels) -> SigmoidCalibrator:
    """Fit the sigmoid by Newton iteration with step-halving damping.

    Initialization is a = 0, b = log((N- + 1)/(N+ + 1)). Iterates until the
    gradient infinity-norm drops below 1e-8 or 200 iterations; on
    non-convergence the best (lowest-NLL) iterate is returned, flagged.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if not np.isfinite(s).all():
        raise ValueError("scores must be finite")
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("fit_platt requires both classes")

    t = np.where(y == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))
    theta = np.array([0.0, np.log((n_neg + 1.0) / (n_pos + 1.0))])
    nll, grad = _nll_and_grad(theta, s, t)

    converged = False
    n_iter = 0
    for n_iter in range(1, _MAX_ITER + 1):
        if np.abs(grad).max() <= _GRAD_TOL:
            converged = True
            n_iter -= 1
            break
        z = theta[0] * s + theta[1]
        p = _sigmoid_neg(z)
        d = p * (1.0 - p)
        hess = np.array([[d @ (s * s), d @ s], [d @ s, d.sum()]])
        try:
            direction = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            direction = -grad
        step = 1.0
        improved = False
        while step >= _MIN_STEP:
            candidate = theta + step * direction
            cand_nll, cand_grad = _nll_and_grad(candidate, s, t)
            if cand_nll < nll:
                theta, nll, grad = candidate, cand_nll, cand_grad
                improved = True
                break
            step /= 2.0
        if not improved:
            converged = bool(np.abs(grad).max() <= _GRAD_TOL)
            break
    else:
        n_iter = _MAX_ITER

    return SigmoidCalibrator(
        a=float(theta[0]),
        b=float(theta[1]),
        final_nll=nll,
        n_iter=n_iter,
        converged=converged,
    )


def apply_calibrator(cal: SigmoidCalibrator, scores) -> np.ndarray:
    """Elementwise sigmoid map; strictly monotone, so score order is preserved."""
    s = np.asarray(scores, dtype=np.float64)
    return _sigmoid_neg(cal.a * s + cal.b)


def holdout_scores(data: DatasetView, spec: ModelSpec, inner_k: int, seed: int, scope=None):
    """Cross-validated out-of-fold scores over an outer-train view.

    For each of ``inner_k`` stratified calibration folds, fit ``spec`` on the
    remainder and score the held-out part; scores are returned aligned to the
    view's row order, together with the view's labels. When a FoldScope is
    given, every row access is logged under the "calibration" stage.
    """
    plan = stratified_kfold(data.y, inner_k, child_seed(seed, "calibration_folds"))
    scores = np.empty(data.n)
    for j, (train_rel, held_rel) in enumerate(plan.folds):
        if scope is not None:
            fit_view = scope.view(data.absolute(train_rel), "calibration")
            held_view = scope.view(data.absolute(held_rel), "calibration")
        else:
            fit_view = data.dataset.view(data.absolute(train_rel))
            held_view = data.dataset.view(data.absolute(held_rel))
        model = fit_model(fit_view, spec.with_seed(child_seed(seed, "calibration_fit", j)))
        scores[held_rel] = predict_scores(model, held_view)
    return scores, np.array(data.y)

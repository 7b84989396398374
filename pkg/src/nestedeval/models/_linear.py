"""Logistic regression (L2, damped Newton) and LDA with ridge-stabilized pooling.

Both models standardize features internally on training statistics only and
fold the scaling back into the returned raw-space coefficients, so no global
input scaling is ever applied to the data itself.
"""

from __future__ import annotations

import numpy as np

_GRAD_TOL = 1e-6
_MAX_ITER = 1000
_MIN_STEP = 2.0**-30


def _sigmoid(m: np.ndarray) -> np.ndarray:
    out = np.empty_like(m)
    pos = m >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-m[pos]))
    em = np.exp(m[~pos])
    out[~pos] = em / (1.0 + em)
    return out


def _standardize_fit(X: np.ndarray):
    mu = X.mean(axis=0)
    sigma = X.std(axis=0)
    sigma = np.where(sigma == 0.0, 1.0, sigma)
    return (X - mu) / sigma, mu, sigma


def _fold_back(w: np.ndarray, b: float, mu: np.ndarray, sigma: np.ndarray):
    coef = w / sigma
    intercept = float(b - mu @ coef)
    return coef, intercept


def logistic_objective_grad(theta, Z, y, sample_weight, inv_c):
    """Penalized negative log-likelihood and its gradient.

    theta stacks [w, b]; the intercept is unpenalized. Exposed at module level
    so the gradient can be checked against finite differences.
    """
    w, b = theta[:-1], theta[-1]
    m = Z @ w + b
    # -[y log p + (1-y) log(1-p)] = softplus(-m) + (1-y) m
    nll = np.sum(sample_weight * (np.logaddexp(0.0, -m) + (1.0 - y) * m))
    obj = nll + 0.5 * inv_c * (w @ w)
    residual = sample_weight * (_sigmoid(m) - y)
    grad = np.concatenate([Z.T @ residual + inv_c * w, [residual.sum()]])
    return obj, grad


def fit_logistic_arrays(X, y, w, params: dict, seed: int):
    Z, mu, sigma = _standardize_fit(X)
    n, p = Z.shape
    y_f = y.astype(np.float64)
    inv_c = 1.0 / params["C"]

    theta = np.zeros(p + 1)
    obj, grad = logistic_objective_grad(theta, Z, y_f, w, inv_c)
    converged = False
    n_iter = 0
    for n_iter in range(1, _MAX_ITER + 1):
        if np.abs(grad).max() <= _GRAD_TOL:
            converged = True
            n_iter -= 1
            break
        m = Z @ theta[:-1] + theta[-1]
        prob = _sigmoid(m)
        d = w * prob * (1.0 - prob)
        zd = Z * d[:, None]
        hess = np.empty((p + 1, p + 1))
        hess[:p, :p] = Z.T @ zd + inv_c * np.eye(p)
        hess[:p, p] = zd.sum(axis=0)
        hess[p, :p] = hess[:p, p]
        hess[p, p] = d.sum()
        try:
            direction = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError:
            direction = -grad
        step = 1.0
        improved = False
        while step >= _MIN_STEP:
            candidate = theta + step * direction
            cand_obj, cand_grad = logistic_objective_grad(candidate, Z, y_f, w, inv_c)
            if cand_obj < obj:
                theta, obj, grad = candidate, cand_obj, cand_grad
                improved = True
                break
            step /= 2.0
        if not improved:
            # numerical floor: no descent direction makes progress
            converged = bool(np.abs(grad).max() <= _GRAD_TOL)
            break
    else:
        n_iter = _MAX_ITER

    coef, intercept = _fold_back(theta[:-1], float(theta[-1]), mu, sigma)
    parameters = {"coef": coef, "intercept": intercept}
    metadata = {"converged": converged, "n_iter": n_iter, "final_objective": float(obj)}
    return parameters, None, metadata


def fit_lda_arrays(X, y, w, params: dict, seed: int):
    Z, mu, sigma = _standardize_fit(X)
    p = Z.shape[1]
    w_total = w.sum()

    means = {}
    for cls in (0, 1):
        mask = y == cls
        means[cls] = (w[mask, None] * Z[mask]).sum(axis=0) / w[mask].sum()

    scatter = np.zeros((p, p))
    for cls in (0, 1):
        mask = y == cls
        centered = Z[mask] - means[cls]
        scatter += (centered * w[mask, None]).T @ centered
    pooled = scatter / w_total

    ridge = 1e-6 * np.trace(pooled) / p
    try:
        a = np.linalg.solve(pooled + ridge * np.eye(p), means[1] - means[0])
    except np.linalg.LinAlgError:
        raise ValueError(
            f"LDA pooled-covariance solve failed even with ridge {ridge:.3e} "
            f"(trace scale {np.trace(pooled):.3e})"
        ) from None

    prior_pos = w[y == 1].sum() / w_total
    prior_neg = w[y == 0].sum() / w_total
    b = float(-0.5 * a @ (means[0] + means[1]) + np.log(prior_pos / prior_neg))

    coef, intercept = _fold_back(a, b, mu, sigma)
    parameters = {"coef": coef, "intercept": intercept}
    metadata = {"ridge": float(ridge)}
    return parameters, None, metadata


def predict_linear(parameters: dict, X: np.ndarray) -> np.ndarray:
    # per-row reduction keeps batch and row-by-row scoring bit-identical
    margins = (X * parameters["coef"]).sum(axis=1) + parameters["intercept"]
    return _sigmoid(margins)

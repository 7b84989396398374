"""K-nearest-neighbor scoring on internally standardized features."""

from __future__ import annotations

import numpy as np

_QUERY_BLOCK = 256


def fit_knn_arrays(X, y, w, params: dict, seed: int):
    k = params["n_neighbors"]
    if k < 1:
        raise ValueError("n_neighbors must be at least 1")
    if k > X.shape[0]:
        raise ValueError(f"n_neighbors={k} exceeds the {X.shape[0]} training rows")
    mu = X.mean(axis=0)
    sigma = X.std(axis=0)
    sigma = np.where(sigma == 0.0, 1.0, sigma)
    parameters = {
        "train": (X - mu) / sigma,
        "labels": y.astype(np.float64),
        "weights": w,
        "mu": mu,
        "sigma": sigma,
        "k": k,
    }
    return parameters, None, {}


def predict_knn(parameters: dict, X: np.ndarray) -> np.ndarray:
    train = parameters["train"]
    labels = parameters["labels"]
    weights = parameters["weights"]
    k = parameters["k"]
    Z = (X - parameters["mu"]) / parameters["sigma"]

    scores = np.empty(Z.shape[0])
    for start in range(0, Z.shape[0], _QUERY_BLOCK):
        block = Z[start : start + _QUERY_BLOCK]
        # squared distances computed directly so exact ties stay exact
        d2 = ((block[:, None, :] - train[None, :, :]) ** 2).sum(axis=2)
        # stable sort breaks distance ties by lower training-row index
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        w_nb = weights[order]
        y_nb = labels[order]
        scores[start : start + _QUERY_BLOCK] = (w_nb * y_nb).sum(axis=1) / w_nb.sum(axis=1)
    return scores

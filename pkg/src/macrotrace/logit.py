"""Deterministic L2-regularized logistic regression and split helpers.

Training is iterative maximum likelihood: damped Newton steps on the mean
negative log-likelihood plus an L2 penalty on the weights (never the bias),
stopping when the loss improves by less than ``tol`` or after ``max_iter``
iterations.  With a fixed seed the whole train/evaluate path is bit-stable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

__all__ = ["LogisticModel", "fit_logistic", "stratified_split", "standardize"]


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        z = ((X - self.mean) / self.scale) @ self.weights + self.bias
        return (z >= 0.0).astype(int)

    def accuracy(self, X: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean(self.predict(X) == np.asarray(y)))


def standardize(X_train: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and scales from the training split only; constant columns
    get scale 1 so they pass through harmlessly."""
    mean = X_train.mean(axis=0)
    scale = X_train.std(axis=0)
    scale[scale == 0.0] = 1.0
    return mean, scale


def _loss(Xs, y, w, b, l2):
    z = Xs @ w + b
    # log(1 + exp(-m)) with the stable log1p/exp split
    margins = np.where(y == 1, z, -z)
    nll = np.mean(np.log1p(np.exp(-np.abs(margins))) + np.maximum(-margins, 0.0))
    return nll + 0.5 * l2 * float(w @ w) / len(y)


def fit_logistic(
    X: np.ndarray,
    y: np.ndarray,
    l2: float = 1.0,
    max_iter: int = 1000,
    tol: float = 1e-8,
) -> LogisticModel:
    """Fit on raw features; standardization stats are computed here from X
    (the caller passes the training split only) and stored on the model."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2:
        raise ValueError("X must be 2-dimensional")
    if set(np.unique(y)) - {0, 1}:
        raise ValueError("labels must be 0/1")
    n, d = X.shape
    mean, scale = standardize(X)
    Xs = (X - mean) / scale

    w = np.zeros(d)
    b = 0.0
    prev = _loss(Xs, y, w, b, l2)
    for _ in range(max_iter):
        z = Xs @ w + b
        p = 1.0 / (1.0 + np.exp(-z))
        grad_w = Xs.T @ (p - y) / n + l2 * w / n
        grad_b = float(np.mean(p - y))
        r = np.maximum(p * (1.0 - p), 1e-10)
        # Newton system on (w, b) jointly; ridge term keeps it positive definite.
        Xb = np.hstack([Xs, np.ones((n, 1))])
        H = (Xb * r[:, None]).T @ Xb / n
        H[:d, :d] += (l2 / n) * np.eye(d)
        g = np.append(grad_w, grad_b)
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = g
        # Backtracking keeps the loss monotone even on separable data.
        scale_step = 1.0
        for _ in range(30):
            w_new = w - scale_step * step[:d]
            b_new = b - scale_step * step[d]
            cur = _loss(Xs, y, w_new, b_new, l2)
            if cur <= prev:
                break
            scale_step *= 0.5
        w, b = w_new, b_new
        if prev - cur < tol:
            prev = cur
            break
        prev = cur
    return LogisticModel(weights=w, bias=float(b), mean=mean, scale=scale)


def stratified_split(
    y, test_fraction: float = 0.2, seed: int = 0
) -> tuple[list[int], list[int]]:
    """Deterministic per-class shuffle and split; every class contributes at
    least one test item.  Returns (train_indices, test_indices), each sorted."""
    rng = random.Random(seed)
    by_class: dict[int, list[int]] = {}
    for i, label in enumerate(y):
        by_class.setdefault(int(label), []).append(i)
    train: list[int] = []
    test: list[int] = []
    for label in sorted(by_class):
        idx = by_class[label][:]
        rng.shuffle(idx)
        n_test = max(1, round(test_fraction * len(idx)))
        test.extend(idx[:n_test])
        train.extend(idx[n_test:])
    return sorted(train), sorted(test)

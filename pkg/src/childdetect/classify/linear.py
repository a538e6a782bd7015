"""Logistic regression and perceptron on standardized features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingleClass, ValidationError
from ..table import as_table


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True, eq=False)
class LinearModel:
    kind: str
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray
    feature_names: tuple[str, ...] = ()
    params: dict | None = None

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def decision(self, X: np.ndarray) -> np.ndarray:
        Xs = (np.asarray(X, dtype=np.float64) - self.mean) / self.scale
        return Xs @ self.weights + self.bias

    def scores(self, X: np.ndarray) -> np.ndarray:
        z = self.decision(X)
        if self.kind == "logistic":
            return sigmoid(z)
        return (z > 0).astype(np.float64)


def standardize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Training mean and population std; constant columns keep scale 1."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    frozen = std == 0
    scale = np.where(frozen, 1.0, std)
    return mean, scale, frozen


def logistic_loss(w: np.ndarray, b: float, Xs: np.ndarray, y: np.ndarray) -> float:
    z = Xs @ w + b
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def logistic_grad(w: np.ndarray, b: float, Xs: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    r = sigmoid(Xs @ w + b) - y
    return Xs.T @ r / len(y), float(r.mean())


def fit_logistic(Xs, y, learning_rate=0.1, epochs=200, frozen=None):
    """Full-batch gradient descent on mean cross-entropy.

    Returns weights, bias and the loss before each epoch plus the final one.
    """
    y = np.asarray(y, dtype=np.float64)
    w = np.zeros(Xs.shape[1])
    b = 0.0
    losses = [logistic_loss(w, b, Xs, y)]
    for _ in range(epochs):
        gw, gb = logistic_grad(w, b, Xs, y)
        if frozen is not None:
            gw = np.where(frozen, 0.0, gw)
        w = w - learning_rate * gw
        b = b - learning_rate * gb
        losses.append(logistic_loss(w, b, Xs, y))
    return w, b, losses


def fit_perceptron(Xs, y, learning_rate=1.0, epochs=100, seed=0, frozen=None):
    """Mistake-driven updates over a seeded shuffle each epoch."""
    rng = np.random.default_rng(seed)
    w = np.zeros(Xs.shape[1])
    b = 0.0
    sign = np.where(np.asarray(y) == 1, 1.0, -1.0)
    step = learning_rate * (np.where(frozen, 0.0, 1.0) if frozen is not None else 1.0)
    rows = [np.asarray(r) for r in Xs]
    for _ in range(epochs):
        mistakes = 0
        for i in rng.permutation(len(rows)):
            predicted = 1.0 if rows[i] @ w + b > 0 else -1.0
            if predicted != sign[i]:
                w = w + step * sign[i] * rows[i]
                b += learning_rate * sign[i]
                mistakes += 1
        if not mistakes:
            break
    return w, b


def train_linear(data, kind: str = "logistic", learning_rate: float | None = None, epochs: int | None = None,
                 seed: int = 0) -> LinearModel:
    table = as_table(data)
    if len(set(table.y.tolist())) < 2:
        raise SingleClass("linear model needs both labels")
    if kind not in ("logistic", "perceptron"):
        raise ValidationError(f"unknown linear model {kind!r}")
    mean, scale, frozen = standardize(table.X)
    Xs = (table.X - mean) / scale
    if kind == "logistic":
        lr = 0.1 if learning_rate is None else learning_rate
        ep = 200 if epochs is None else epochs
        w, b, _ = fit_logistic(Xs, table.y, lr, ep, frozen)
    else:
        lr = 1.0 if learning_rate is None else learning_rate
        ep = 100 if epochs is None else epochs
        w, b = fit_perceptron(Xs, table.y, lr, ep, seed, frozen)
    params = {"learning_rate": lr, "epochs": ep, "seed": seed}
    return LinearModel(kind, w, float(b), mean, scale, table.names, params)

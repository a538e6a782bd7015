"""Trainable classifiers emitting a child-probability score.

Every model exposes ``scores(X) -> ndarray`` of p_child values and
``n_features``; anything with that shape can be plugged into evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, ValidationError
from ..touch_features import FeatureVector
from . import _backend
from .forest import Forest, feature_importance, train_forest
from .linear import LinearModel, train_linear
from .persist import FORMAT_VERSION, load_model, model_from_dict, model_to_dict, save_model
from .tree import DecisionTree, train_tree


@dataclass(frozen=True)
class Score:
    p_child: float

    def __post_init__(self):
        if not 0.0 <= self.p_child <= 1.0:
            raise ValueError(f"p_child {self.p_child} outside [0, 1]")


def predict_score(model, v) -> Score:
    """Score one FeatureVector (or 1-D array) with any trained model."""
    if isinstance(v, FeatureVector):
        names = getattr(model, "feature_names", ())
        if names and tuple(names) != v.names:
            raise DimensionMismatch("feature names differ from the model's training features")
        x = np.asarray(v.values, dtype=np.float64)
    else:
        x = np.asarray(v, dtype=np.float64)
    if x.ndim != 1 or len(x) != model.n_features:
        raise DimensionMismatch(f"model expects {model.n_features} features, got {x.shape}")
    return Score(float(model.scores(x[None, :])[0]))


def predict_scores(model, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(f"model expects {model.n_features} features, got {X.shape[1]}")
    return model.scores(X)


def _logistic(data, **params):
    return train_linear(data, kind="logistic", **params)


def _perceptron(data, **params):
    return train_linear(data, kind="perceptron", **params)


TRAINERS = {
    "forest": train_forest,
    "tree": train_tree,
    "logistic": _logistic,
    "perceptron": _perceptron,
}


def train_model(kind, data, **params):
    """Train by registry name, or call ``kind`` directly if it is callable."""
    if callable(kind):
        return kind(data, **params)
    if kind not in TRAINERS:
        raise ValidationError(f"unknown classifier {kind!r}; choose from {sorted(TRAINERS)}")
    if kind != "forest":
        params.pop("threads", None)
    try:
        return TRAINERS[kind](data, **params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for {kind}: {exc}") from None


def backend() -> str:
    return _backend.current()


__all__ = [
    "DecisionTree", "Forest", "LinearModel", "Score", "TRAINERS", "FORMAT_VERSION",
    "backend", "feature_importance", "load_model", "model_from_dict", "model_to_dict",
    "predict_score", "predict_scores", "save_model", "train_forest", "train_linear",
    "train_model", "train_tree",
]

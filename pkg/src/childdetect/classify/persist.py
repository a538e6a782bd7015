"""Versioned JSON model files."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import CorruptModel, VersionMismatch
from .forest import Forest
from .linear import LinearModel
from .tree import DecisionTree

FORMAT_VERSION = 1
_TREE_FIELDS = ("feature", "threshold", "left", "right", "value", "improvement")


def _tree_doc(t: DecisionTree) -> dict:
    return {name: getattr(t, name).tolist() for name in _TREE_FIELDS}


def _tree_from(doc: dict, n_features: int, names: tuple, criterion: str) -> DecisionTree:
    arrays = {
        "feature": np.asarray(doc["feature"], dtype=np.intp),
        "threshold": np.asarray(doc["threshold"], dtype=np.float64),
        "left": np.asarray(doc["left"], dtype=np.intp),
        "right": np.asarray(doc["right"], dtype=np.intp),
        "value": np.asarray(doc["value"], dtype=np.float64).reshape(-1, 2),
        "improvement": np.asarray(doc["improvement"], dtype=np.float64),
    }
    n = len(arrays["feature"])
    if n == 0 or any(len(a) != n for a in arrays.values()):
        raise CorruptModel("tree arrays are empty or of unequal length")
    inner = arrays["feature"] >= 0
    if np.any(arrays["feature"] >= n_features):
        raise CorruptModel("tree references a feature beyond the model's dimension")
    for side in ("left", "right"):
        kids = arrays[side][inner]
        if np.any(kids <= np.flatnonzero(inner)) or np.any(kids >= n):
            raise CorruptModel("tree child links are malformed")
    return DecisionTree(**arrays, n_features=n_features, feature_names=names, criterion=criterion)


def model_to_dict(model) -> dict:
    if isinstance(model, Forest):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "forest",
            "feature_names": list(model.feature_names),
            "n_features": model.n_features,
            "params": model.params,
            "trees": [_tree_doc(t) for t in model.trees],
        }
    if isinstance(model, DecisionTree):
        return {
            "format_version": FORMAT_VERSION,
            "kind": "tree",
            "feature_names": list(model.feature_names),
            "n_features": model.n_features,
            "params": {"criterion": model.criterion},
            "tree": _tree_doc(model),
        }
    if isinstance(model, LinearModel):
        return {
            "format_version": FORMAT_VERSION,
            "kind": model.kind,
            "feature_names": list(model.feature_names),
            "n_features": model.n_features,
            "params": model.params or {},
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "mean": model.mean.tolist(),
            "scale": model.scale.tolist(),
        }
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(doc: dict):
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise CorruptModel("not a model document")
    if doc["format_version"] != FORMAT_VERSION:
        raise VersionMismatch(f"model format {doc['format_version']!r}, expected {FORMAT_VERSION}")
    try:
        kind = doc["kind"]
        names = tuple(doc["feature_names"])
        d = int(doc["n_features"])
        params = doc.get("params") or {}
        if kind == "forest":
            crit = params.get("criterion", "entropy")
            trees = tuple(_tree_from(t, d, names, crit) for t in doc["trees"])
            if not trees:
                raise CorruptModel("forest has no trees")
            return Forest(trees, d, names, params)
        if kind == "tree":
            return _tree_from(doc["tree"], d, names, params.get("criterion", "entropy"))
        if kind in ("logistic", "perceptron"):
            arrays = [np.asarray(doc[k], dtype=np.float64) for k in ("weights", "mean", "scale")]
            if any(a.shape != (d,) for a in arrays):
                raise CorruptModel("linear model arrays do not match n_features")
            return LinearModel(kind, arrays[0], float(doc["bias"]), arrays[1], arrays[2], names, params)
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"malformed model document ({exc})") from None
    raise CorruptModel(f"unknown model kind {kind!r}")


def dumps(model) -> str:
    return json.dumps(model_to_dict(model), separators=(",", ":")) + "\n"


def save_model(model, path: str | Path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8")


def load_model(path: str | Path):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptModel(f"{path}: unreadable model file ({exc})") from None
    return model_from_dict(doc)

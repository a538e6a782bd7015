"""Axis-aligned binary decision trees."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyData, ValidationError
from ..table import as_table
from . import _backend

CRITERIA = {"entropy": 0, "gini": 1}


def n_candidate_features(rule, d: int) -> int:
    """Features examined per node: ``log2`` means ceil(log2 d)."""
    if rule == "log2":
        k = math.ceil(math.log2(d)) if d > 1 else 1
    elif rule == "sqrt":
        k = math.ceil(math.sqrt(d))
    elif rule in ("all", None):
        k = d
    elif isinstance(rule, int) and not isinstance(rule, bool) and rule > 0:
        k = rule
    else:
        raise ValidationError(f"unknown max_features rule {rule!r}")
    return max(1, min(d, k))


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """Flat node arrays; ``feature == -1`` marks a leaf.

    ``value[i]`` holds the (adult, child) training counts reaching node i
    and ``improvement[i]`` the count-weighted impurity decrease of its split.
    A row goes left when ``x[feature] <= threshold``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    improvement: np.ndarray
    n_features: int
    feature_names: tuple[str, ...] = ()
    criterion: str = "entropy"

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _backend.kernel().apply_tree(X, self.feature, self.threshold, self.left, self.right)

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Child fraction of the leaf each row lands in."""
        leaf = self.apply(X)
        counts = self.value[leaf]
        return counts[:, 1] / (counts[:, 0] + counts[:, 1])

    def importances(self) -> np.ndarray:
        inner = self.feature >= 0
        raw = np.bincount(self.feature[inner], weights=self.improvement[inner], minlength=self.n_features)
        total = raw.sum()
        return raw / total if total > 0 else raw


def grow(X, y, w, *, criterion="entropy", max_depth=None, min_leaf=1, max_features="all", seed=0,
         feature_names=()) -> DecisionTree:
    """Induce one tree from count-weighted rows (weights 0 exclude a row)."""
    if criterion not in CRITERIA:
        raise ValidationError(f"criterion must be one of {sorted(CRITERIA)}")
    if min_leaf < 1:
        raise ValidationError("min_leaf must be >= 1")
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int8)
    w = np.ascontiguousarray(w, dtype=np.float64)
    d = X.shape[1]
    mtry = n_candidate_features(max_features, d)
    depth = -1 if max_depth is None else int(max_depth)
    arrays = _backend.kernel().build_tree(X, y, w, mtry, CRITERIA[criterion], depth, float(min_leaf),
                                          int(seed) & ((1 << 64) - 1))
    return DecisionTree(*arrays, n_features=d, feature_names=tuple(feature_names), criterion=criterion)


def train_tree(data, criterion: str = "entropy", max_depth: int | None = None, min_leaf: int = 1,
               max_features="all", seed: int = 0) -> DecisionTree:
    """Greedy top-down tree on a FeatureTable or FeatureVector list.

    Thresholds are midpoints between consecutive distinct values; ties in
    gain go to the lowest feature index, then the lowest threshold. With a
    single label present the result is one pure leaf.
    """
    table = as_table(data)
    if len(table) == 0:
        raise EmptyData("cannot train on zero rows")
    w = np.ones(len(table))
    return grow(table.X, table.y, w, criterion=criterion, max_depth=max_depth, min_leaf=min_leaf,
                max_features=max_features, seed=seed, feature_names=table.names)

"""Bagged random forests built on :mod:`.tree`."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyData
from ..table import as_table
from .tree import DecisionTree, grow


def tree_streams(seed: int, index: int) -> tuple[np.random.Generator, int]:
    """Bootstrap generator and split-sampling seed for tree ``index``.

    Keyed on (seed, index) alone, so results do not depend on which thread
    trains which tree or in what order.
    """
    boot, split = np.random.SeedSequence(seed, spawn_key=(index,)).spawn(2)
    return np.random.default_rng(boot), int(split.generate_state(1, np.uint64)[0])


@dataclass(frozen=True, eq=False)
class Forest:
    trees: tuple[DecisionTree, ...]
    n_features: int
    feature_names: tuple[str, ...] = ()
    params: dict = field(default_factory=dict)

    @property
    def n_estimators(self) -> int:
        return len(self.trees)

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Mean over trees of the leaf child fraction."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        total = np.zeros(len(X))
        for t in self.trees:
            total += t.scores(X)
        return total / len(self.trees)


def train_forest(data, n_estimators: int = 200, max_features="log2", criterion: str = "entropy",
                 max_depth: int | None = None, min_leaf: int = 1, seed: int = 0, threads: int = 1) -> Forest:
    """Train ``n_estimators`` trees, each on an n-row bootstrap resample."""
    table = as_table(data)
    n = len(table)
    if n == 0:
        raise EmptyData("cannot train on zero rows")
    X, y = table.X, table.y

    def one(i: int) -> DecisionTree:
        rng, split_seed = tree_streams(seed, i)
        counts = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(np.float64)
        return grow(X, y, counts, criterion=criterion, max_depth=max_depth, min_leaf=min_leaf,
                    max_features=max_features, seed=split_seed, feature_names=table.names)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trees = tuple(pool.map(one, range(n_estimators)))
    else:
        trees = tuple(one(i) for i in range(n_estimators))
    params = {
        "n_estimators": n_estimators,
        "max_features": max_features,
        "criterion": criterion,
        "max_depth": max_depth,
        "min_leaf": min_leaf,
        "seed": seed,
    }
    return Forest(trees, X.shape[1], table.names, params)


def feature_importance(f: Forest | DecisionTree) -> list[tuple[str, float]]:
    """Mean decrease in impurity per feature, normalised, descending.

    Each tree's decreases are normalised before averaging. Equal scores keep
    feature order.
    """
    trees = f.trees if isinstance(f, Forest) else (f,)
    total = np.zeros(f.n_features)
    for t in trees:
        total += t.importances()
    s = total.sum()
    if s > 0:
        total = total / s
    names = f.feature_names or tuple(f"f{i}" for i in range(f.n_features))
    order = sorted(range(f.n_features), key=lambda i: -total[i])
    return [(names[i], float(total[i])) for i in order]

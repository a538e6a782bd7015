"""Compiled vs pure-Python tree kernels on the same forest workload.

    python benchmarks/bench_kernels.py [--rows 1500] [--features 22] [--trees 20]

Both backends grow identical trees, so the script also checks that the
resulting scores agree exactly.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from childdetect.classify import _backend
from childdetect.classify.forest import train_forest
from childdetect.table import FeatureTable


def workload(rows: int, features: int, seed: int = 0) -> FeatureTable:
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, rows).astype(np.int8)
    X = rng.normal(size=(rows, features)) + 0.4 * y[:, None] * rng.normal(size=features)
    groups = tuple(f"s{i % 50:02d}" for i in range(rows))
    return FeatureTable(tuple(f"f{j}" for j in range(features)), X, y, groups, "stroke")


def bench(table: FeatureTable, trees: int, backend: str, repeat: int) -> tuple[float, np.ndarray]:
    _backend.use(backend)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        forest = train_forest(table, n_estimators=trees, seed=1)
        best = min(best, time.perf_counter() - t0)
    return best, forest.scores(table.X)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--rows", type=int, default=1500)
    p.add_argument("--features", type=int, default=22)
    p.add_argument("--trees", type=int, default=20)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    table = workload(args.rows, args.features)
    available = _backend.available()
    print(f"workload: {args.rows} rows x {args.features} features, {args.trees} trees")
    results = {}
    for name in ("compiled", "python"):
        if name not in available:
            print(f"{name:>9}: not available")
            continue
        secs, scores = bench(table, args.trees, name, args.repeat if name == "compiled" else 1)
        results[name] = (secs, scores)
        print(f"{name:>9}: {secs * 1000:9.1f} ms")
    if len(results) == 2:
        (c, sc), (py, sp) = results["compiled"], results["python"]
        print(f"  speedup: {py / c:.1f}x; scores identical: {bool(np.array_equal(sc, sp))}")


if __name__ == "__main__":
    main()

"""Window statistics over motion-sensor streams and top-k selection.

Each window yields 8 statistics for each of 4 axes (x, y, z and the
per-sample magnitude) of each of 4 sensors: 128 features named
``{sensor}_{axis}_{stat}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import MissingFeature, SingleClass, TooFewSamples
from .segmentation import SensorWindow
from .session_data import SENSORS
from .table import FeatureTable, as_table
from .touch_features import FeatureVector

AXES = ("x", "y", "z", "mag")
STATS = ("mean", "std", "var", "min", "max", "rmsd", "skewness", "kurtosis")
SENSOR_FEATURES = tuple(f"{s}_{a}_{st}" for s in SENSORS for a in AXES for st in STATS)


def axis_stats_columns(values: np.ndarray) -> np.ndarray:
    """Statistics of each column of an ``(n, c)`` array; returns ``(c, 8)``.

    Skewness and kurtosis are the raw third and fourth standardized moments
    (no excess correction) and are defined as 0 for a constant column.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    n = v.shape[0]
    if n < 3:
        raise TooFewSamples(f"need at least 3 samples, got {n}")
    mean = v.mean(axis=0)
    dev = v - mean
    sq = dev * dev
    m2 = sq.sum(axis=0) / n
    std = np.sqrt(m2)
    rmsd = np.sqrt(np.sum(sq, axis=0) / n)
    lo, hi = v.min(axis=0), v.max(axis=0)
    # a spread too small to square (std underflows to 0) counts as flat too
    flat = (lo == hi) | (std == 0)
    std = np.where(flat, 0.0, std)
    rmsd = np.where(flat, 0.0, rmsd)
    # standardise before cubing so tiny or huge spreads cannot under/overflow
    z = dev / np.where(flat, 1.0, std)
    z2 = z * z
    skew = np.where(flat, 0.0, (z2 * z).sum(axis=0) / n)
    kurt = np.where(flat, 0.0, (z2 * z2).sum(axis=0) / n)
    mean = np.where(lo == hi, lo, mean)
    return np.stack([mean, std, std * std, lo, hi, rmsd, skew, kurt], axis=1)


def axis_stats(series: Sequence[float]) -> tuple[float, ...]:
    """mean, std, var, min, max, rmsd, skewness, kurtosis of one series."""
    return tuple(axis_stats_columns(np.asarray(series, dtype=np.float64)[:, None])[0].tolist())


def window_features(w: SensorWindow) -> tuple[float, ...]:
    """128 statistics in ``SENSOR_FEATURES`` order."""
    out = []
    for sensor in SENSORS:
        stream = w.samples.get(sensor)
        n = 0 if stream is None else len(stream)
        if n < 3:
            raise TooFewSamples(f"sensor {sensor} has {n} samples in window (need 3)")
        cols = np.column_stack([stream.xyz, stream.magnitude])
        out.append(axis_stats_columns(cols).ravel())
    return tuple(np.concatenate(out).tolist())


def window_vector(w: SensorWindow, label: str, group: str) -> FeatureVector:
    return FeatureVector(SENSOR_FEATURES, window_features(w), label, group, "sensor")


@dataclass(frozen=True)
class FeatureMask:
    """Selected feature names, most important first.

    ``ranking`` keeps every candidate feature with its importance so the
    unselected remainder stays inspectable.
    """

    names: tuple[str, ...]
    ranking: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("mask names must be unique")

    def __len__(self) -> int:
        return len(self.names)

    def to_text(self) -> str:
        return "".join(n + "\n" for n in self.names)

    @classmethod
    def from_text(cls, text: str) -> "FeatureMask":
        return cls(tuple(line.strip() for line in text.splitlines() if line.strip()))


def select_top_k(train, k: int = 20, seed: int = 0, n_estimators: int = 200, threads: int = 1) -> FeatureMask:
    """Rank features by forest importance and keep the ``k`` best.

    Only ``train`` is seen; callers doing cross-validation must pass the
    training fold alone.
    """
    from .classify import feature_importance, train_forest

    table = as_table(train)
    if len(set(table.y.tolist())) < 2:
        raise SingleClass("feature selection needs both labels")
    forest = train_forest(table, n_estimators=n_estimators, seed=seed, threads=threads)
    ranking = tuple(feature_importance(forest))
    return FeatureMask(tuple(name for name, _ in ranking[:k]), ranking)


def apply_mask(v, m: FeatureMask):
    """Project a FeatureVector (or FeatureTable) onto the mask's names."""
    if isinstance(v, FeatureTable):
        return v.columns(m.names)
    values = v.as_dict()
    for name in m.names:
        if name not in values:
            raise MissingFeature(name)
    return FeatureVector(m.names, tuple(values[n] for n in m.names), v.label, v.group, v.kind)

"""Column-oriented feature tables.

A :class:`FeatureTable` is the bulk form of a list of
:class:`~childdetect.touch_features.FeatureVector`: a float matrix plus
per-row label, group (session id) and age group. Row order within a group
is chronological, which is what bundling relies on.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import MissingFeature, ValidationError
from .touch_features import FeatureVector

CHILD, ADULT = 1, 0


def encode_labels(labels: Iterable[str]) -> np.ndarray:
    out = []
    for lab in labels:
        if lab not in ("child", "adult"):
            raise ValidationError(f"unknown label {lab!r}")
        out.append(CHILD if lab == "child" else ADULT)
    return np.asarray(out, dtype=np.int8)


@dataclass(frozen=True, eq=False)
class FeatureTable:
    names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    groups: tuple[str, ...]
    kind: str
    age_groups: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64).reshape(len(self.groups), len(self.names))
        y = np.ascontiguousarray(self.y, dtype=np.int8)
        if len(y) != len(X):
            raise ValueError("label count does not match row count")
        if self.age_groups is not None and len(self.age_groups) != len(X):
            raise ValueError("age-group count does not match row count")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def labels(self) -> list[str]:
        return ["child" if v == CHILD else "adult" for v in self.y]

    @classmethod
    def from_vectors(cls, vectors: Sequence[FeatureVector], age_groups: Sequence[str] | None = None) -> "FeatureTable":
        if not vectors:
            raise ValidationError("no feature vectors")
        names = vectors[0].names
        kind = vectors[0].kind
        for v in vectors:
            if v.names != names or v.kind != kind:
                raise ValidationError("feature vectors disagree on names or kind")
        X = np.array([v.values for v in vectors], dtype=np.float64)
        return cls(names, X, encode_labels(v.label for v in vectors), tuple(v.group for v in vectors), kind,
                   tuple(age_groups) if age_groups is not None else None)

    def vectors(self) -> list[FeatureVector]:
        labels = self.labels
        return [
            FeatureVector(self.names, tuple(row), labels[i], self.groups[i], self.kind)
            for i, row in enumerate(self.X.tolist())
        ]

    def rows(self, index) -> "FeatureTable":
        index = np.asarray(index)
        ages = None if self.age_groups is None else tuple(self.age_groups[i] for i in index)
        return FeatureTable(self.names, self.X[index], self.y[index], tuple(self.groups[i] for i in index),
                            self.kind, ages)

    def columns(self, names: Sequence[str]) -> "FeatureTable":
        pos = {n: i for i, n in enumerate(self.names)}
        for n in names:
            if n not in pos:
                raise MissingFeature(n)
        cols = [pos[n] for n in names]
        return FeatureTable(tuple(names), self.X[:, cols], self.y, self.groups, self.kind, self.age_groups)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*self.names, "label", "group"])
        for row, lab, grp in zip(self.X.tolist(), self.labels, self.groups):
            w.writerow([*(repr(v) for v in row), lab, grp])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, kind: str) -> "FeatureTable":
        reader = csv.reader(io.StringIO(text))
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError("empty feature CSV") from None
        if header[-2:] != ["label", "group"]:
            raise ValidationError("feature CSV must end with label,group columns")
        names = tuple(header[:-2])
        values, labels, groups = [], [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValidationError(f"feature CSV line {line_no}: expected {len(header)} fields")
            try:
                values.append([float(v) for v in row[:-2]])
            except ValueError:
                raise ValidationError(f"feature CSV line {line_no}: non-numeric value") from None
            labels.append(row[-2])
            groups.append(row[-1])
        X = np.array(values, dtype=np.float64).reshape(len(values), len(names))
        return cls(names, X, encode_labels(labels), tuple(groups), kind)


def read_csv(path: str | Path, kind: str = "stroke") -> FeatureTable:
    return FeatureTable.from_csv(Path(path).read_text(encoding="utf-8"), kind)


def as_table(data) -> FeatureTable:
    """Accept a FeatureTable or a sequence of FeatureVectors."""
    if isinstance(data, FeatureTable):
        return data
    return FeatureTable.from_vectors(list(data))

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from childdetect.errors import TooFewSamples, ValidationError
from childdetect.evaluate import fold_indices, index_digest, kfold_split
from childdetect.table import FeatureTable


def make(labels, groups=None):
    y = np.asarray(labels, np.int8)
    groups = groups or [f"s{i}" for i in range(len(y))]
    return FeatureTable(("a",), np.zeros((len(y), 1)), y, tuple(groups), "stroke")


def test_even_split_and_stratification():
    t = make([0] * 50 + [1] * 50)
    a = kfold_split(t, 10, seed=3)
    assert np.bincount(a).tolist() == [10] * 10
    for f in range(10):
        assert int(t.y[a == f].sum()) == 5


def test_session_mode_keeps_sessions_together():
    groups = [f"s{i // 7}" for i in range(140)]
    labels = [int(i // 7) % 2 for i in range(140)]
    t = make(labels, groups)
    a = kfold_split(t, 5, mode="session", seed=1)
    owner = {}
    for g, f in zip(groups, a.tolist()):
        assert owner.setdefault(g, f) == f
    assert np.bincount(a).tolist() == [28] * 5


def test_deterministic_and_seeded():
    t = make([0, 1] * 30)
    assert np.array_equal(kfold_split(t, 4, seed=2), kfold_split(t, 4, seed=2))
    assert not np.array_equal(kfold_split(t, 4, seed=2), kfold_split(t, 4, seed=5))


def test_errors():
    with pytest.raises(ValidationError):
        kfold_split(make([0, 1] * 5), 1)
    with pytest.raises(ValidationError):
        kfold_split(make([0, 1] * 5), 2, mode="subject")
    with pytest.raises(TooFewSamples):
        kfold_split(make([0, 1] * 2), 10)
    with pytest.raises(TooFewSamples):
        kfold_split(make([0, 1] * 5, ["a"] * 5 + ["b"] * 5), 3, mode="session")


@settings(max_examples=60)
@given(st.lists(st.integers(0, 1), min_size=10, max_size=200), st.integers(2, 10), st.integers(0, 99))
def test_record_mode_properties(labels, folds, seed):
    t = make(labels)
    a = kfold_split(t, folds, seed=seed)
    sizes = np.bincount(a, minlength=folds)
    assert sizes.max() - sizes.min() <= 1
    for lab in (0, 1):
        per = np.bincount(a[t.y == lab], minlength=folds)
        assert per.max() - per.min() <= 1
    digests = set()
    for f in range(folds):
        train, test = fold_indices(a, f)
        assert not set(train) & set(test) and len(train) + len(test) == len(labels)
        digests.add(index_digest(test))
    assert len(digests) == folds

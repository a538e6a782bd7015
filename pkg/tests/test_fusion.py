from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from childdetect.classify import Score
from childdetect.errors import ValidationError
from childdetect.fusion import Bundle, decide, fuse, fused_mean, make_bundles

probs = st.floats(0.0, 1.0, allow_nan=False)


def test_bundle_counts():
    assert len(make_bundles([0.1] * 10, 8)) == 3
    assert make_bundles([0.1] * 5, 8) == []
    assert [b.start for b in make_bundles(list(range(10)), 3, stride=3)] == [0, 3, 6]
    ones = make_bundles([0.3, 0.6, 0.9], 1)
    assert [fuse(b) for b in ones] == [0.3, 0.6, 0.9]


def test_bundles_accept_score_objects():
    b = make_bundles([Score(0.2), Score(0.4), Score(0.9)], 3)[0]
    assert b.k == 3 and fuse(b) == pytest.approx(0.5, abs=1e-15)


def test_fuse_examples():
    assert fuse(Bundle((0.2, 0.4, 0.9))) == pytest.approx(0.5, abs=1e-15)
    assert fuse(Bundle((0.7,) * 9)) == 0.7


def test_bad_parameters():
    with pytest.raises(ValidationError):
        make_bundles([0.1], 0)
    with pytest.raises(ValidationError):
        make_bundles([0.1], 1, stride=0)
    for t in (0.0, 1.0, 1.5):
        with pytest.raises(ValidationError):
            decide(0.5, t)


def test_decide_boundary():
    assert decide(0.5).verdict == "child"
    assert decide(0.49).verdict == "adult"
    d = decide(0.8, 0.9)
    assert (d.verdict, d.fused, d.threshold) == ("adult", 0.8, 0.9)


@given(st.lists(probs, min_size=1, max_size=30), st.randoms())
def test_permutation_invariance(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    assert fused_mean(values) == fused_mean(shuffled)
    assert min(values) <= fused_mean(values) <= max(values)


@given(probs, st.integers(1, 40))
def test_idempotence(v, k):
    assert fused_mean([v] * k) == v


@given(probs, probs, probs)
def test_threshold_monotone(fused, t1, t2):
    lo, hi = sorted((t1, t2))
    if not (0 < lo and hi < 1):
        return
    if decide(fused, hi).verdict == "child":
        assert decide(fused, lo).verdict == "child"


@given(st.lists(probs, max_size=40), st.integers(1, 10), st.integers(1, 4))
def test_bundles_are_consecutive(values, k, stride):
    bundles = make_bundles(values, k, stride)
    expected = max(0, (len(values) - k) // stride + 1) if len(values) >= k else 0
    assert len(bundles) == expected
    for b in bundles:
        assert b.k == k and list(b.scores) == values[b.start:b.start + k]

"""Score fusion over consecutive observations of one session."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .classify import Score
from .errors import ValidationError


def _p(s) -> float:
    return s.p_child if isinstance(s, Score) else float(s)


def fused_mean(values: Sequence[float]) -> float:
    """Arithmetic mean that ignores summation order.

    ``math.fsum`` is correctly rounded, so any permutation of the same
    scores fuses to the same float, and a constant run returns its value.
    """
    first = values[0]
    if all(v == first for v in values):
        return float(first)
    return math.fsum(values) / len(values)


@dataclass(frozen=True)
class Bundle:
    scores: tuple[float, ...]
    start: int = 0

    @property
    def k(self) -> int:
        return len(self.scores)

    @property
    def fused(self) -> float:
        return fused_mean(self.scores)


@dataclass(frozen=True)
class Decision:
    verdict: str
    fused: float
    threshold: float


def make_bundles(scores: Sequence, k: int, stride: int = 1) -> list[Bundle]:
    """Windows of ``k`` consecutive scores from one session's sequence.

    Fewer than ``k`` scores gives no bundles.
    """
    if k < 1:
        raise ValidationError("bundle size must be >= 1")
    if stride < 1:
        raise ValidationError("stride must be >= 1")
    values = [_p(s) for s in scores]
    return [Bundle(tuple(values[i:i + k]), i) for i in range(0, len(values) - k + 1, stride)]


def fuse(b: Bundle) -> float:
    return b.fused


def decide(fused: float, threshold: float = 0.5) -> Decision:
    """Child when the fused score reaches the threshold (ties go to child)."""
    if not 0.0 < threshold < 1.0:
        raise ValidationError("threshold must lie strictly between 0 and 1")
    return Decision("child" if fused >= threshold else "adult", fused, threshold)

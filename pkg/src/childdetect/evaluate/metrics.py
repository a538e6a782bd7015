"""ROC, AUC and equal error rate with children as the positive class."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from ..errors import EmptySide


def _sides(pos, neg) -> tuple[np.ndarray, np.ndarray]:
    pos = np.asarray(pos, dtype=np.float64).ravel()
    neg = np.asarray(neg, dtype=np.float64).ravel()
    if not len(pos) or not len(neg):
        raise EmptySide(f"need scores on both sides (got {len(pos)} positive, {len(neg)} negative)")
    return pos, neg


def auc(pos_scores, neg_scores) -> float:
    """P(pos > neg) + P(pos == neg) / 2 via the Mann-Whitney rank sum."""
    pos, neg = _sides(pos_scores, neg_scores)
    allv = np.concatenate([pos, neg])
    order = np.argsort(allv, kind="mergesort")
    sv = allv[order]
    cuts = np.flatnonzero(sv[1:] != sv[:-1]) + 1
    starts = np.concatenate([[0], cuts])
    ends = np.concatenate([cuts, [len(sv)]])
    ranks = np.empty(len(sv))
    ranks[order] = np.repeat((starts + ends + 1) / 2.0, ends - starts)
    n_pos, n_neg = len(pos), len(neg)
    return float((ranks[:n_pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Operating points in order of decreasing threshold.

    A sample is called positive when its score is >= threshold. The first
    point uses threshold +inf (nothing positive), the last the minimum
    score (everything positive).
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray

    def __len__(self) -> int:
        return len(self.thresholds)

    @property
    def fnr(self) -> np.ndarray:
        return 1.0 - self.tpr

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("threshold,fpr,tpr\n")
        for t, f, p in zip(self.thresholds.tolist(), self.fpr.tolist(), self.tpr.tolist()):
            buf.write(f"{t!r},{f!r},{p!r}\n")
        return buf.getvalue()


def roc_curve(pos_scores, neg_scores) -> RocCurve:
    pos, neg = _sides(pos_scores, neg_scores)
    scores = np.concatenate([pos, neg])
    is_pos = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    tp = np.cumsum(is_pos[order])
    fp = np.cumsum(1.0 - is_pos[order])
    last = np.concatenate([np.flatnonzero(s[1:] != s[:-1]), [len(s) - 1]])
    thresholds = np.concatenate([[np.inf], s[last]])
    tpr = np.concatenate([[0.0], tp[last] / len(pos)])
    fpr = np.concatenate([[0.0], fp[last] / len(neg)])
    return RocCurve(thresholds, fpr, tpr)


def trapezoid_auc(roc: RocCurve) -> float:
    """Area under the ROC polyline; ties contribute diagonal segments."""
    return float(np.sum(np.diff(roc.fpr) * (roc.tpr[1:] + roc.tpr[:-1]) / 2.0))


def eer_from_roc(roc: RocCurve) -> float:
    """Rate where FPR equals FNR, interpolated along the ROC polyline."""
    fpr, fnr = roc.fpr, roc.fnr
    diff = fpr - fnr
    hit = np.flatnonzero(diff >= 0)
    i = int(hit[0])  # exists: the last point has fpr = 1, fnr = 0
    if diff[i] == 0 or i == 0:
        return float(fpr[i])
    d0, d1 = diff[i - 1], diff[i]
    s = -d0 / (d1 - d0)
    return float(fpr[i - 1] + s * (fpr[i] - fpr[i - 1]))


def roc_and_eer(pos_scores, neg_scores) -> tuple[RocCurve, float]:
    roc = roc_curve(pos_scores, neg_scores)
    return roc, eer_from_roc(roc)

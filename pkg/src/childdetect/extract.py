"""Turn sessions into feature tables for each detection approach.

Rows come out grouped by session in manifest order and chronological
within a session, which is the order bundling relies on.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError, TooFewSamples, ValidationError
from .segmentation import GAP_MS, MIN_SAMPLES, TAP_MAX_MS, TAP_MOVE_PX, gesture_window, segment_gestures, segment_windows
from .sensor_features import SENSOR_FEATURES, window_features
from .session_data import DropPolicy, Session, filter_session
from .table import FeatureTable, encode_labels
from .touch_features import STROKE_FEATURES, TAP_FEATURES, stroke_features, tap_features

APPROACHES = ("touch-tap", "touch-stroke", "sensor", "combined-tap", "combined-stroke")
AGE_FILTERS = (None, "young_child", "older_child")


@dataclass(frozen=True)
class ExtractOptions:
    gap_ms: float = GAP_MS
    tap_move_px: float = TAP_MOVE_PX
    tap_max_ms: float = TAP_MAX_MS
    min_samples: int = MIN_SAMPLES
    policy: DropPolicy = field(default_factory=DropPolicy)


def kind_of(approach: str) -> str:
    return {
        "touch-tap": "tap",
        "touch-stroke": "stroke",
        "sensor": "sensor",
        "combined-tap": "tap+sensor",
        "combined-stroke": "stroke+sensor",
    }[approach]


def feature_names(approach: str) -> tuple[str, ...]:
    touch = STROKE_FEATURES if approach.endswith("stroke") else TAP_FEATURES
    if approach == "sensor":
        return SENSOR_FEATURES
    if approach.startswith("combined"):
        return touch + SENSOR_FEATURES
    return touch


def filter_age(sessions: Sequence[Session], age_filter: str | None) -> list[Session]:
    """Keep adults plus only the requested child age group."""
    if age_filter not in AGE_FILTERS:
        raise ValidationError(f"age filter must be one of {AGE_FILTERS}")
    if age_filter is None:
        return list(sessions)
    return [s for s in sessions if s.label == "adult" or s.age_group == age_filter]


def extract_table(sessions: Sequence[Session], approach: str, window_s: float = 1.0,
                  options: ExtractOptions | None = None, stats: Counter | None = None) -> FeatureTable:
    """Feature table of one approach over all sessions.

    ``stats`` (if given) accumulates counts of skipped observations by
    reason: incomplete gestures, sparse sensor windows and so on.
    """
    if approach not in APPROACHES:
        raise ValidationError(f"approach must be one of {APPROACHES}")
    opts = options or ExtractOptions()
    stats = Counter() if stats is None else stats
    kind = kind_of(approach)
    rows, labels, groups, ages = [], [], [], []
    for raw in sessions:
        s = filter_session(raw, opts.policy)
        for values in _session_rows(s, approach, window_s, opts, stats):
            rows.append(values)
            labels.append(s.label)
            groups.append(s.id)
            ages.append(s.age_group)
    names = feature_names(approach)
    if not rows:
        raise DataError(f"no {kind} observations in {len(sessions)} session(s)")
    X = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite feature values")
    return FeatureTable(names, X, encode_labels(labels), tuple(groups), kind, tuple(ages))


def _session_rows(s: Session, approach: str, window_s: float, opts: ExtractOptions, stats: Counter):
    if approach == "sensor":
        windows, dropped = segment_windows(s, window_s, opts.min_samples, return_dropped=True)
        stats["sparse_windows"] += dropped
        for w in windows:
            yield window_features(w)
        return
    want = "tap" if approach.endswith("tap") else "stroke"
    combined = approach.startswith("combined")
    for g in segment_gestures(s.touch_events, opts.gap_ms, opts.tap_move_px, opts.tap_max_ms):
        if not g.complete:
            stats["incomplete_gestures"] += 1
            continue
        if g.kind != want:
            continue
        if want == "tap":
            touch = tap_features(g)
        else:
            if g.duration <= 0 or len(g.points) < 2:
                stats["degenerate_strokes"] += 1
                continue
            touch = stroke_features(g)
        if not combined:
            yield touch
            continue
        w = gesture_window(s, g, opts.min_samples)
        if w.sparse:
            stats["sparse_gesture_windows"] += 1
        try:
            yield touch + window_features(w)
        except TooFewSamples:
            stats["unfillable_gesture_windows"] += 1

"""Gesture segmentation and sensor windowing."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyStream, ValidationError
from .session_data import SENSORS, SensorStream, Session, TouchEvent

log = logging.getLogger(__name__)

TAP_MOVE_PX = 10.0
TAP_MAX_MS = 300
GAP_MS = 1000
MIN_SAMPLES = 3


def trajectory_length(points: Sequence[TouchEvent]) -> float:
    return sum(math.hypot(b.x - a.x, b.y - a.y) for a, b in zip(points, points[1:]))


@dataclass(frozen=True)
class Gesture:
    kind: str
    points: tuple[TouchEvent, ...]
    complete: bool = True

    def __post_init__(self):
        if not self.points:
            raise ValueError("a gesture needs at least one point")
        if self.kind not in ("tap", "stroke"):
            raise ValueError(f"unknown gesture kind {self.kind!r}")

    @property
    def t_start(self) -> int:
        return self.points[0].t

    @property
    def t_end(self) -> int:
        return self.points[-1].t

    @property
    def duration(self) -> int:
        return self.t_end - self.t_start


def classify_gesture(g: Gesture | Sequence[TouchEvent], tap_move_px: float = TAP_MOVE_PX,
                     tap_max_ms: float = TAP_MAX_MS) -> str:
    """Tap when the finger barely moved and lifted quickly, else stroke."""
    points = g.points if isinstance(g, Gesture) else tuple(g)
    duration = points[-1].t - points[0].t
    if trajectory_length(points) < tap_move_px and duration < tap_max_ms:
        return "tap"
    return "stroke"


def segment_gestures(events: Sequence[TouchEvent], gap_ms: float = GAP_MS,
                     tap_move_px: float = TAP_MOVE_PX, tap_max_ms: float = TAP_MAX_MS) -> list[Gesture]:
    """Group a time-ordered event stream into down…up gestures.

    Every event lands in exactly one gesture. Runs that lack a leading
    ``down`` or a closing ``up``, or that contain a pause longer than
    ``gap_ms``, come back with ``complete=False`` so feature extraction can
    skip them.
    """
    gestures: list[Gesture] = []
    run: list[TouchEvent] = []

    def close(complete: bool):
        if run:
            kind = classify_gesture(run, tap_move_px, tap_max_ms)
            gestures.append(Gesture(kind, tuple(run), complete and run[0].phase == "down"))
            run.clear()

    for ev in events:
        if ev.phase == "down":
            close(False)
            run.append(ev)
            continue
        if run and ev.t - run[-1].t > gap_ms:
            close(False)
        run.append(ev)
        if ev.phase == "up":
            close(True)
    close(False)
    return gestures


@dataclass(frozen=True)
class SensorWindow:
    """Sensor readings with ``t_start <= t < t_end`` for each used sensor."""

    t_start: float
    t_end: float
    samples: dict[str, SensorStream]
    sparse: bool = False

    def counts(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.samples.items()}


def _check_streams(session: Session, sensors: Sequence[str]) -> list[SensorStream]:
    streams = [session.stream(s) for s in sensors]
    empty = [s.sensor for s in streams if not len(s)]
    if empty:
        raise EmptyStream(f"session {session.id}: no samples for {', '.join(empty)}")
    return streams


def _sample_period(streams: Sequence[SensorStream]) -> float:
    diffs = [np.diff(s.t) for s in streams if len(s) > 1]
    diffs = np.concatenate(diffs) if diffs else np.empty(0)
    diffs = diffs[diffs > 0]
    return float(np.median(diffs)) if len(diffs) else 0.0


def segment_windows(session: Session, n_seconds: float, min_samples: int = MIN_SAMPLES,
                    sensors: Sequence[str] = SENSORS, return_dropped: bool = False):
    """Cut the session's sensor data into consecutive n-second windows.

    The data extent runs from the first reading to one sample period past
    the last, so ten seconds of 100 Hz data yield exactly ten 1 s windows.
    A trailing partial window is discarded, as is any window where a sensor
    has fewer than ``min_samples`` readings.
    """
    if not 1 <= n_seconds <= 20:
        raise ValidationError(f"window size {n_seconds} s outside [1, 20]")
    streams = _check_streams(session, sensors)
    start = min(int(s.t[0]) for s in streams)
    end = max(int(s.t[-1]) for s in streams) + _sample_period(streams)
    width = n_seconds * 1000.0
    n_windows = int(math.floor((end - start) / width + 1e-9))
    windows, dropped = [], 0
    for i in range(n_windows):
        lo, hi = start + i * width, start + (i + 1) * width
        parts = {s.sensor: s.between(lo, hi) for s in streams}
        if min(len(p) for p in parts.values()) < min_samples:
            dropped += 1
            continue
        windows.append(SensorWindow(lo, hi, parts))
    if dropped:
        log.debug("session %s: dropped %d sparse %ss windows", session.id, dropped, n_seconds)
    return (windows, dropped) if return_dropped else windows


def gesture_window(session: Session, g: Gesture, min_samples: int = MIN_SAMPLES,
                   sensors: Sequence[str] = SENSORS) -> SensorWindow:
    """Sensor window covering a gesture, widened symmetrically if too thin.

    The window is ``[t_start - a, t_end + 1 + a)`` with the smallest integer
    ``a >= 0`` giving every sensor ``min_samples`` readings. It is flagged
    ``sparse`` when it reaches past the session's sensor bounds (or cannot
    be filled even at full extent).
    """
    streams = _check_streams(session, sensors)
    t0, t1 = g.t_start, g.t_end
    need = 0
    for s in streams:
        # widening by a captures readings at distance <= a outside [t0, t1]
        reach = np.where(s.t < t0, t0 - s.t, np.where(s.t > t1, s.t - t1, 0))
        if len(reach) >= min_samples:
            need = max(need, int(np.partition(reach, min_samples - 1)[min_samples - 1]))
        else:
            need = max(need, int(reach.max()))
    lo, hi = t0 - need, t1 + 1 + need
    first = min(int(s.t[0]) for s in streams)
    last = max(int(s.t[-1]) for s in streams)
    parts = {s.sensor: s.between(lo, hi) for s in streams}
    sparse = lo < first or hi - 1 > last or min(len(p) for p in parts.values()) < min_samples
    return SensorWindow(lo, hi, parts, sparse)

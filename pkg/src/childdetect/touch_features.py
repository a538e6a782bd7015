"""Tap and stroke features.

Taps are summarised by mean pressure, mean size and duration. Strokes get
22 geometric, dynamic and pressure/size features built around the Largest
Deviation Point (LDP): the point farthest from the start-stop chord.
Standard deviations use the population convention throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateStroke
from .segmentation import Gesture
from .session_data import DropPolicy

TAP_FEATURES = ("pressure", "size", "duration")

# ordered by the published importance ranking; this order is the CSV contract
STROKE_FEATURES = (
    "straight_to_trajectory_length_ratio",
    "average_size",
    "std_size",
    "start_p",
    "start_to_LDP_length",
    "average_velocity",
    "std_velocity",
    "start_to_LDP_duration",
    "average_pressure",
    "LDP_to_stop_length",
    "trajectory_length",
    "average_distance",
    "straight_length",
    "LDP_velocity",
    "std_distance",
    "std_pressure",
    "LDP_to_stop_duration",
    "LDP_p",
    "stop_p",
    "LDP_s",
    "start_s",
    "stop_s",
)

KINDS = ("tap", "stroke", "sensor", "tap+sensor", "stroke+sensor")
_FORBIDDEN = DropPolicy().forbidden_features


@dataclass(frozen=True)
class FeatureVector:
    names: tuple[str, ...]
    values: tuple[float, ...]
    label: str
    group: str
    kind: str

    def __post_init__(self):
        names = tuple(self.names)
        values = tuple(float(v) for v in self.values)
        if len(names) != len(values):
            raise ValueError(f"{len(names)} names for {len(values)} values")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        bad = _FORBIDDEN.intersection(names)
        if bad:
            raise ValueError(f"context-dependent feature(s) not allowed: {sorted(bad)}")
        if not all(math.isfinite(v) for v in values):
            raise ValueError("feature values must be finite")
        if self.kind not in KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))


@dataclass(frozen=True)
class LdpResult:
    index: int
    deviation: float


def tap_features(g: Gesture) -> tuple[float, float, float]:
    """(mean pressure, mean size, duration in ms) of a tap."""
    pts = g.points
    pressure = math.fsum(p.pressure for p in pts) / len(pts)
    size = math.fsum(p.size for p in pts) / len(pts)
    return pressure, size, float(pts[-1].t - pts[0].t)


def find_ldp(points: Sequence[tuple[float, float]]) -> LdpResult:
    """Locate the point farthest from the chord joining first and last point.

    Ties go to the earliest index. For a closed stroke (start == stop) the
    chord is degenerate and plain distance from the start point is used.
    """
    if len(points) < 2:
        raise DegenerateStroke(f"LDP needs at least 2 points, got {len(points)}")
    (x0, y0), (x1, y1) = points[0], points[-1]
    dx, dy = x1 - x0, y1 - y0
    chord = math.hypot(dx, dy)
    best, best_i = -1.0, 0
    for i, (x, y) in enumerate(points):
        if chord > 0:
            d = abs(dx * (y - y0) - dy * (x - x0)) / chord
        else:
            d = math.hypot(x - x0, y - y0)
        if d > best:
            best, best_i = d, i
    return LdpResult(best_i, best)


def _pstd(values: np.ndarray) -> float:
    if len(values) == 0:
        return 0.0
    return float(np.sqrt(np.mean((values - values.mean()) ** 2)))


def stroke_features(g: Gesture) -> tuple[float, ...]:
    """The 22 stroke features, in ``STROKE_FEATURES`` order."""
    pts = g.points
    if len(pts) < 2:
        raise DegenerateStroke(f"stroke needs at least 2 points, got {len(pts)}")
    if pts[-1].t <= pts[0].t:
        raise DegenerateStroke("stroke has zero duration")
    xy = np.array([(p.x, p.y) for p in pts], dtype=np.float64)
    t = np.array([p.t for p in pts], dtype=np.float64)
    pressure = np.array([p.pressure for p in pts])
    size = np.array([p.size for p in pts])

    dist = np.hypot(*np.diff(xy, axis=0).T)
    dt = np.diff(t)
    moving = dt > 0
    velocity = dist[moving] / dt[moving]

    straight = float(math.hypot(*(xy[-1] - xy[0])))
    trajectory = float(math.fsum(dist))
    ratio = straight / trajectory if trajectory > 0 else 1.0

    ldp = find_ldp([tuple(p) for p in xy]).index
    start_to_ldp = float(math.hypot(*(xy[ldp] - xy[0])))
    ldp_to_stop = float(math.hypot(*(xy[-1] - xy[ldp])))

    # segment ending at the LDP, else the one leaving it; zero-dt segments skipped
    ldp_velocity = 0.0
    candidates = list(range(ldp - 1, -1, -1)) + list(range(ldp, len(dist)))
    for seg in candidates:
        if dt[seg] > 0:
            ldp_velocity = float(dist[seg] / dt[seg])
            break

    feats = {
        "straight_to_trajectory_length_ratio": ratio,
        "average_size": float(size.mean()),
        "std_size": _pstd(size),
        "start_p": float(pressure[0]),
        "start_to_LDP_length": start_to_ldp,
        "average_velocity": float(velocity.mean()),
        "std_velocity": _pstd(velocity),
        "start_to_LDP_duration": float(t[ldp] - t[0]),
        "average_pressure": float(pressure.mean()),
        "LDP_to_stop_length": ldp_to_stop,
        "trajectory_length": trajectory,
        "average_distance": float(dist.mean()),
        "straight_length": straight,
        "LDP_velocity": ldp_velocity,
        "std_distance": _pstd(dist),
        "std_pressure": _pstd(pressure),
        "LDP_to_stop_duration": float(t[-1] - t[ldp]),
        "LDP_p": float(pressure[ldp]),
        "stop_p": float(pressure[-1]),
        "LDP_s": float(size[ldp]),
        "start_s": float(size[0]),
        "stop_s": float(size[-1]),
    }
    return tuple(feats[name] for name in STROKE_FEATURES)


def gesture_vector(g: Gesture, label: str, group: str) -> FeatureVector:
    if g.kind == "tap":
        return FeatureVector(TAP_FEATURES, tap_features(g), label, group, "tap")
    return FeatureVector(STROKE_FEATURES, stroke_features(g), label, group, "stroke")

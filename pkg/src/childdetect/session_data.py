"""Raw session data: touch events, motion-sensor streams, log ingest.

Logs are JSON Lines. A touch record looks like::

    {"t":100,"phase":"down","x":10,"y":20,"pressure":0.4,"size":0.1}

and a sensor record like::

    {"t":0,"sensor":"lacc","x":3,"y":4,"z":0}

Sensor streams are held as numpy arrays (one ``SensorStream`` per motion
sensor) because a minute of 100 Hz data is 24k readings per session.
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import OrderError, ParseError, ValidationError

log = logging.getLogger(__name__)

PHASES = ("down", "move", "up")
SENSORS = ("acc", "gyro", "lacc", "rot")
LABELS = ("child", "adult")
AGE_GROUPS = ("young_child", "older_child", "adult", "unknown")
CHILD_GROUPS = frozenset({"young_child", "older_child"})

# app id the synthetic logger stamps on experimenter records
LOGGER_APP_ID = "org.childdetect.logger"


@dataclass(frozen=True, slots=True)
class TouchEvent:
    t: int
    phase: str
    x: float
    y: float
    pressure: float
    size: float
    app_id: str | None = None

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ValueError(f"phase must be one of {PHASES}, got {self.phase!r}")
        for name in ("x", "y", "pressure", "size"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} is not finite")
        if not 0.0 <= self.pressure <= 1.0:
            raise ValueError(f"pressure {self.pressure} outside [0, 1]")
        if not 0.0 <= self.size <= 1.0:
            raise ValueError(f"size {self.size} outside [0, 1]")
        if self.x < 0 or self.y < 0:
            raise ValueError("coordinates must be non-negative")


@dataclass(frozen=True, slots=True)
class SensorSample:
    t: int
    sensor: str
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.sensor not in SENSORS:
            raise ValueError(f"sensor must be one of {SENSORS}, got {self.sensor!r}")
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError("sensor values must be finite")

    @property
    def magnitude(self) -> float:
        return magnitude(self.x, self.y, self.z)


def magnitude(x, y, z):
    """Euclidean norm of a three-axis reading; works on scalars or arrays."""
    if isinstance(x, np.ndarray):
        return np.sqrt(x * x + y * y + z * z)
    return math.sqrt(x * x + y * y + z * z)


@dataclass(frozen=True, eq=False)
class SensorStream:
    """Time-ordered readings of one motion sensor.

    ``t`` is an int64 array of millisecond timestamps and ``xyz`` an
    ``(n, 3)`` float64 array. Both are made read-only on construction.
    """

    sensor: str
    t: np.ndarray
    xyz: np.ndarray

    def __post_init__(self):
        t = np.ascontiguousarray(self.t, dtype=np.int64)
        xyz = np.ascontiguousarray(self.xyz, dtype=np.float64).reshape(-1, 3)
        if len(t) != len(xyz):
            raise ValueError("timestamp and value arrays differ in length")
        if len(t) > 1 and np.any(np.diff(t) < 0):
            raise ValueError(f"{self.sensor} stream is not time-ordered")
        if not np.all(np.isfinite(xyz)):
            raise ValueError(f"{self.sensor} stream has non-finite values")
        t.flags.writeable = False
        xyz.flags.writeable = False
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "xyz", xyz)

    def __len__(self) -> int:
        return len(self.t)

    def __eq__(self, other):
        if not isinstance(other, SensorStream):
            return NotImplemented
        return (
            self.sensor == other.sensor
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.xyz, other.xyz)
        )

    __hash__ = None

    @property
    def magnitude(self) -> np.ndarray:
        return magnitude(self.xyz[:, 0], self.xyz[:, 1], self.xyz[:, 2])

    def between(self, t_start: float, t_end: float) -> "SensorStream":
        """Readings with ``t_start <= t < t_end``."""
        lo = np.searchsorted(self.t, t_start, side="left")
        hi = np.searchsorted(self.t, t_end, side="left")
        return SensorStream(self.sensor, self.t[lo:hi], self.xyz[lo:hi])

    def samples(self) -> Iterator[SensorSample]:
        for t, (x, y, z) in zip(self.t.tolist(), self.xyz.tolist()):
            yield SensorSample(t, self.sensor, x, y, z)

    @classmethod
    def empty(cls, sensor: str) -> "SensorStream":
        return cls(sensor, np.empty(0, np.int64), np.empty((0, 3)))


@dataclass(frozen=True, eq=False)
class Session:
    id: str
    label: str
    age_group: str
    touch_events: tuple[TouchEvent, ...] = ()
    sensors: Mapping[str, SensorStream] = field(default_factory=dict)

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")
        if self.age_group not in AGE_GROUPS:
            raise ValueError(f"age_group must be one of {AGE_GROUPS}, got {self.age_group!r}")
        if self.age_group != "unknown" and (self.age_group in CHILD_GROUPS) != (self.label == "child"):
            raise ValueError(f"age_group {self.age_group!r} contradicts label {self.label!r}")
        events = tuple(self.touch_events)
        for a, b in zip(events, events[1:]):
            if b.t < a.t:
                raise ValueError("touch events are not time-ordered")
        object.__setattr__(self, "touch_events", events)
        object.__setattr__(self, "sensors", dict(self.sensors))

    def __eq__(self, other):
        if not isinstance(other, Session):
            return NotImplemented
        return (
            (self.id, self.label, self.age_group, self.touch_events)
            == (other.id, other.label, other.age_group, other.touch_events)
            and self.sensors.keys() == other.sensors.keys()
            and all(self.sensors[k] == other.sensors[k] for k in self.sensors)
        )

    __hash__ = None

    def stream(self, sensor: str) -> SensorStream:
        return self.sensors.get(sensor) or SensorStream.empty(sensor)


# -- parsing -----------------------------------------------------------------


def _lines(stream: str | Iterable[str]) -> Iterable[str]:
    if isinstance(stream, str):
        return stream.splitlines()
    return stream


def _record(line: str, line_no: int, required: tuple[str, ...]) -> dict:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(line_no, f"invalid JSON ({exc.msg})") from None
    if not isinstance(rec, dict):
        raise ParseError(line_no, "record is not a JSON object")
    missing = [k for k in required if k not in rec]
    if missing:
        raise ParseError(line_no, f"missing field(s) {', '.join(missing)}")
    return rec


def _timestamp(value, line_no: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(line_no, "t must be a number")
    if isinstance(value, float):
        if not value.is_integer():
            raise ParseError(line_no, "t must be an integer millisecond count")
        value = int(value)
    return value


def _number(rec: dict, key: str, line_no: int) -> float:
    value = rec[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(line_no, f"{key} must be a number")
    return float(value)


def parse_touch_log(stream: str | Iterable[str], order_tolerance_ms: int = 0) -> list[TouchEvent]:
    """Parse a touch JSONL log into events.

    Raises :class:`ParseError` on a malformed or invariant-violating record
    and :class:`OrderError` when a timestamp drops by more than
    ``order_tolerance_ms`` below the largest one seen so far. Decreases
    within the tolerance are repaired by a stable sort.
    """
    events = []
    latest = None
    needs_sort = False
    for line_no, line in enumerate(_lines(stream), start=1):
        if not line.strip():
            continue
        rec = _record(line, line_no, ("t", "phase", "x", "y", "pressure", "size"))
        t = _timestamp(rec["t"], line_no)
        app_id = rec.get("app_id")
        if app_id is not None and not isinstance(app_id, str):
            raise ParseError(line_no, "app_id must be a string")
        try:
            ev = TouchEvent(
                t,
                rec["phase"],
                _number(rec, "x", line_no),
                _number(rec, "y", line_no),
                _number(rec, "pressure", line_no),
                _number(rec, "size", line_no),
                app_id,
            )
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from None
        if latest is not None and t < latest:
            if latest - t > order_tolerance_ms:
                raise OrderError(line_no, t, latest)
            needs_sort = True
        latest = t if latest is None else max(latest, t)
        events.append(ev)
    if needs_sort:
        events.sort(key=lambda e: e.t)
    return events


@dataclass(frozen=True)
class SensorLog:
    """Result of parsing a sensor log: streams plus per-tag skip counts."""

    streams: dict[str, SensorStream]
    skipped: Counter
    n_lines: int

    @property
    def n_parsed(self) -> int:
        return sum(len(s) for s in self.streams.values())


def parse_sensor_log(stream: str | Iterable[str], order_tolerance_ms: int = 0) -> SensorLog:
    """Parse a sensor JSONL log, partitioned by sensor tag.

    Records from sensors other than the four motion sensors are skipped and
    counted; blank lines are counted under ``""``. Every line ends up
    parsed, counted as skipped, or raising.
    """
    cols: dict[str, tuple[list, list]] = {s: ([], []) for s in SENSORS}
    latest: dict[str, int] = {}
    unsorted: set[str] = set()
    skipped: Counter = Counter()
    n_lines = 0
    for line_no, line in enumerate(_lines(stream), start=1):
        n_lines += 1
        if not line.strip():
            skipped[""] += 1
            continue
        rec = _record(line, line_no, ("t", "sensor", "x", "y", "z"))
        tag = rec["sensor"]
        if not isinstance(tag, str):
            raise ParseError(line_no, "sensor must be a string")
        t = _timestamp(rec["t"], line_no)
        xyz = (_number(rec, "x", line_no), _number(rec, "y", line_no), _number(rec, "z", line_no))
        if not all(math.isfinite(v) for v in xyz):
            raise ParseError(line_no, "sensor values must be finite")
        if tag not in cols:
            skipped[tag] += 1
            continue
        prev = latest.get(tag)
        if prev is not None and t < prev:
            if prev - t > order_tolerance_ms:
                raise OrderError(line_no, t, prev)
            unsorted.add(tag)
        latest[tag] = t if prev is None else max(prev, t)
        cols[tag][0].append(t)
        cols[tag][1].append(xyz)
    streams = {}
    for tag, (ts, vals) in cols.items():
        t = np.asarray(ts, dtype=np.int64)
        xyz = np.asarray(vals, dtype=np.float64).reshape(-1, 3)
        if tag in unsorted:
            order = np.argsort(t, kind="stable")
            t, xyz = t[order], xyz[order]
        streams[tag] = SensorStream(tag, t, xyz)
    other = {k: v for k, v in skipped.items() if k}
    if other:
        log.warning("skipped %d non-motion sensor records: %s", sum(other.values()), dict(sorted(other.items())))
    return SensorLog(streams, skipped, n_lines)


# -- serialization -----------------------------------------------------------


def _num(v: float) -> str:
    # float repr is the shortest round-tripping form, which is what json uses
    return repr(float(v))


def format_touch_event(ev: TouchEvent) -> str:
    out = (
        f'{{"t":{ev.t},"phase":"{ev.phase}","x":{_num(ev.x)},"y":{_num(ev.y)},'
        f'"pressure":{_num(ev.pressure)},"size":{_num(ev.size)}'
    )
    if ev.app_id is not None:
        out += f',"app_id":{json.dumps(ev.app_id)}'
    return out + "}"


def format_touch_log(events: Iterable[TouchEvent]) -> str:
    return "".join(format_touch_event(ev) + "\n" for ev in events)


def format_sensor_log(streams: Mapping[str, SensorStream]) -> str:
    """Serialize streams merged in time order (ties in SENSORS order)."""
    parts_t, parts_rank, parts_xyz = [], [], []
    for rank, tag in enumerate(SENSORS):
        s = streams.get(tag)
        if s is None or not len(s):
            continue
        parts_t.append(s.t)
        parts_rank.append(np.full(len(s), rank))
        parts_xyz.append(s.xyz)
    if not parts_t:
        return ""
    t = np.concatenate(parts_t)
    rank = np.concatenate(parts_rank)
    xyz = np.concatenate(parts_xyz)
    order = np.lexsort((rank, t))
    lines = []
    for ti, ri, (x, y, z) in zip(t[order].tolist(), rank[order].tolist(), xyz[order].tolist()):
        lines.append(f'{{"t":{ti},"sensor":"{SENSORS[ri]}","x":{x!r},"y":{y!r},"z":{z!r}}}\n')
    return "".join(lines)


# -- filtering ---------------------------------------------------------------


@dataclass(frozen=True)
class DropPolicy:
    """What :func:`filter_session` removes.

    Leading and trailing touch records whose ``app_id`` is in
    ``excluded_app_ids`` are experimenter data and get dropped. Coordinates
    stay in the raw events (stroke geometry needs them); the feature layer
    refuses to emit any name in ``forbidden_features``.
    """

    excluded_app_ids: frozenset[str] = frozenset({LOGGER_APP_ID})
    forbidden_features: frozenset[str] = frozenset({"x", "y", "orientation", "stroke_direction", "direction"})


def filter_session(session: Session, policy: DropPolicy = DropPolicy()) -> Session:
    events = session.touch_events
    excluded = policy.excluded_app_ids
    lo, hi = 0, len(events)
    while lo < hi and events[lo].app_id in excluded:
        lo += 1
    while hi > lo and events[hi - 1].app_id in excluded:
        hi -= 1
    if lo == 0 and hi == len(events):
        return session
    return replace(session, touch_events=events[lo:hi])


# -- manifests ---------------------------------------------------------------


def session_manifest(session: Session, touch_path: str, sensor_path: str) -> dict:
    return {
        "id": session.id,
        "label": session.label,
        "age_group": session.age_group,
        "touch": touch_path,
        "sensors": sensor_path,
    }


def load_session(entry: Mapping, base_dir: str | Path = ".") -> Session:
    base = Path(base_dir)
    for key in ("id", "label", "age_group", "touch", "sensors"):
        if key not in entry:
            raise ValidationError(f"session manifest missing {key!r}")
    with open(base / entry["touch"], encoding="utf-8") as fh:
        events = parse_touch_log(fh)
    with open(base / entry["sensors"], encoding="utf-8") as fh:
        sensors = parse_sensor_log(fh).streams
    try:
        return Session(str(entry["id"]), entry["label"], entry["age_group"], tuple(events), sensors)
    except ValueError as exc:
        raise ValidationError(f"session {entry['id']}: {exc}") from None


def load_manifest(path: str | Path) -> list[dict]:
    """Read a manifest holding one session object or a list of them."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid manifest JSON ({exc.msg})") from None
    entries = doc if isinstance(doc, list) else [doc]
    if not all(isinstance(e, dict) for e in entries):
        raise ValidationError(f"{path}: manifest entries must be objects")
    return entries


def load_dataset(path: str | Path) -> list[Session]:
    path = Path(path)
    return [load_session(e, path.parent) for e in load_manifest(path)]


def write_dataset(sessions: Iterable[Session], out_dir: str | Path) -> Path:
    """Write JSONL logs per session plus ``manifest.json``; returns its path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for s in sessions:
        touch_name, sensor_name = f"{s.id}.touch.jsonl", f"{s.id}.sensors.jsonl"
        (out / touch_name).write_text(format_touch_log(s.touch_events), encoding="utf-8")
        (out / sensor_name).write_text(format_sensor_log(s.sensors), encoding="utf-8")
        entries.append(session_manifest(s, touch_name, sensor_name))
    manifest = out / "manifest.json"
    manifest.write_text(json.dumps(entries, indent=1) + "\n", encoding="utf-8")
    return manifest

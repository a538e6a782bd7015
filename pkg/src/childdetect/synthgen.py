"""Synthetic child/adult sessions from parameterised behaviour profiles.

A profile describes how one group touches and holds the phone: stroke
length, speed and curviness, touch size and pressure, tap duration, and
how much the device shakes. Sessions drawn from two profiles make a
labelled dataset in the on-disk log formats, which doubles as the
end-to-end test bed for the detectors.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import InvalidProfile
from .session_data import LOGGER_APP_ID, SENSORS, SensorStream, Session, TouchEvent, session_manifest, write_dataset

GRAVITY = 9.80665
SCREEN_PX = (1080.0, 1920.0)
BUILTIN_CONFIGS = ("default_profiles", "burst_tremor", "size_overlap")


@dataclass(frozen=True)
class Dist:
    """Normal distribution given by mean and standard deviation."""

    mean: float
    std: float = 0.0

    def draw(self, rng: np.random.Generator, lo: float = -math.inf, hi: float = math.inf) -> float:
        v = self.mean if self.std == 0 else rng.normal(self.mean, self.std)
        return float(min(max(v, lo), hi))


def _dist(value, name: str) -> Dist:
    if isinstance(value, Dist):
        d = value
    elif isinstance(value, Mapping):
        unknown = set(value) - {"mean", "std"}
        if unknown or "mean" not in value:
            raise InvalidProfile(f"{name}: expected {{mean, std}}, got keys {sorted(value)}")
        d = Dist(float(value["mean"]), float(value.get("std", 0.0)))
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        d = Dist(float(value[0]), float(value[1]))
    else:
        raise InvalidProfile(f"{name}: expected {{mean, std}}")
    if not (math.isfinite(d.mean) and math.isfinite(d.std)) or d.std < 0:
        raise InvalidProfile(f"{name}: mean must be finite and std >= 0")
    return d


_DIST_FIELDS = ("stroke_length_mm", "stroke_speed", "curviness", "touch_size", "touch_pressure", "tap_duration_ms")


@dataclass(frozen=True)
class BehaviorProfile:
    """Touch and motion behaviour of one group.

    Per-event size and pressure wobble by ``*_jitter`` around a
    per-gesture value. ``subject_jitter`` shifts every session's means by
    that many profile stds (times a standard normal), so sessions differ
    from one another like people do; ``tremor_jitter`` is the log-scale
    std of a per-session factor on all tremor amplitudes. Motion bursts are Hann-windowed
    oscillations whose amplitude is ``burst_gain`` times the sensor's
    tremor, so a zero-tremor profile produces perfectly still streams.
    """

    stroke_length_mm: Dist = Dist(30.0, 9.0)
    stroke_speed: Dist = Dist(95.0, 30.0)  # mm/s
    curviness: Dist = Dist(0.11, 0.04)  # max deviation / chord
    touch_size: Dist = Dist(0.27, 0.04)
    touch_pressure: Dist = Dist(0.52, 0.08)
    tap_duration_ms: Dist = Dist(110.0, 35.0)
    size_jitter: float = 0.01
    pressure_jitter: float = 0.02
    tremor_amplitude: Mapping[str, float] = field(
        default_factory=lambda: {"acc": 0.15, "gyro": 0.12, "lacc": 0.15, "rot": 0.004})
    movement_event_rate: float = 2.0  # bursts per minute
    burst_duration_s: float = 1.0
    burst_gain: float = 4.0
    subject_jitter: float = 0.5
    tremor_jitter: float = 0.2
    sample_rate_hz: float = 100.0

    def __post_init__(self):
        for name in _DIST_FIELDS:
            object.__setattr__(self, name, _dist(getattr(self, name), name))
        tremor = dict(self.tremor_amplitude)
        if set(tremor) != set(SENSORS):
            raise InvalidProfile(f"tremor_amplitude needs exactly {SENSORS}")
        object.__setattr__(self, "tremor_amplitude", {s: float(tremor[s]) for s in SENSORS})
        for m in ("touch_size", "touch_pressure"):
            if not 0.0 <= getattr(self, m).mean <= 1.0:
                raise InvalidProfile(f"{m} mean must lie in [0, 1]")
        for m in ("stroke_length_mm", "stroke_speed", "tap_duration_ms"):
            if getattr(self, m).mean <= 0:
                raise InvalidProfile(f"{m} mean must be positive")
        if self.curviness.mean < 0:
            raise InvalidProfile("curviness mean must be >= 0")
        scalars = {
            "size_jitter": self.size_jitter, "pressure_jitter": self.pressure_jitter,
            "movement_event_rate": self.movement_event_rate, "burst_gain": self.burst_gain,
            "subject_jitter": self.subject_jitter, "tremor_jitter": self.tremor_jitter, **{f"tremor_amplitude.{k}": v for k, v in tremor.items()},
        }
        for name, v in scalars.items():
            if not math.isfinite(v) or v < 0:
                raise InvalidProfile(f"{name} must be finite and >= 0")
        if not self.burst_duration_s > 0 or not self.sample_rate_hz > 0:
            raise InvalidProfile("burst_duration_s and sample_rate_hz must be positive")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["tremor_amplitude"] = dict(self.tremor_amplitude)
        return out

    @classmethod
    def from_dict(cls, doc: Mapping) -> "BehaviorProfile":
        if not isinstance(doc, Mapping):
            raise InvalidProfile("profile must be an object")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise InvalidProfile(f"unknown profile key(s): {', '.join(sorted(unknown))}")
        try:
            return cls(**doc)
        except (TypeError, ValueError) as exc:
            raise InvalidProfile(str(exc)) from None


@dataclass(frozen=True)
class GenConfig:
    """Dataset layout. Children alternate between the two age groups."""

    profiles: Mapping[str, BehaviorProfile] = field(
        default_factory=lambda: {"child": BehaviorProfile(), "adult": BehaviorProfile()})
    sessions_per_class: int = 25
    gestures_per_session: int = 40
    duration_s: float = 60.0
    stroke_fraction: float = 0.63
    px_per_mm: float = 19.4
    touch_rate_hz: float = 60.0
    logger_records: int = 1  # experimenter taps before and after each session
    seed: int = 0

    def __post_init__(self):
        profiles = dict(self.profiles)
        if set(profiles) != {"child", "adult"}:
            raise InvalidProfile("profiles needs exactly 'child' and 'adult'")
        object.__setattr__(self, "profiles", {k: p if isinstance(p, BehaviorProfile) else
                                              BehaviorProfile.from_dict(p) for k, p in profiles.items()})
        if self.sessions_per_class < 1 or self.gestures_per_session < 1:
            raise InvalidProfile("session and gesture counts must be >= 1")
        if not 0.0 <= self.stroke_fraction <= 1.0:
            raise InvalidProfile("stroke_fraction must lie in [0, 1]")
        if self.duration_s <= 0 or self.px_per_mm <= 0 or self.touch_rate_hz <= 0 or self.logger_records < 0:
            raise InvalidProfile("duration, px_per_mm and touch_rate_hz must be positive")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["profiles"] = {k: self.profiles[k].to_dict() for k in ("child", "adult")}
        return out

    @classmethod
    def from_dict(cls, doc: Mapping) -> "GenConfig":
        if not isinstance(doc, Mapping):
            raise InvalidProfile("config must be an object")
        doc = {k: v for k, v in doc.items() if k != "description"}
        unknown = set(doc) - {f.name for f in fields(cls)}
        if unknown:
            raise InvalidProfile(f"unknown config key(s): {', '.join(sorted(unknown))}")
        try:
            return cls(**doc)
        except (TypeError, ValueError) as exc:
            raise InvalidProfile(str(exc)) from None


def load_gen_config(source: str | Path | Mapping | None = None, **overrides) -> GenConfig:
    """Config from a dict, a JSON file or a shipped config name.

    ``None`` means the shipped defaults.
    """
    if source is None:
        source = "default_profiles"
    if isinstance(source, Mapping):
        doc = dict(source)
    elif str(source) in BUILTIN_CONFIGS:
        doc = json.loads(resources.files("childdetect.data").joinpath(f"{source}.json").read_text("utf-8"))
    else:
        try:
            doc = json.loads(Path(source).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InvalidProfile(f"{source}: invalid JSON ({exc.msg})") from None
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return GenConfig.from_dict(doc)


# -- touch ---------------------------------------------------------------------


def _min_jerk(tau: np.ndarray) -> np.ndarray:
    return tau ** 3 * (10.0 - 15.0 * tau + 6.0 * tau * tau)


def _bezier(p0, c, p1, u):
    u = u[:, None]
    return (1 - u) ** 2 * p0 + 2 * (1 - u) * u * c + u * u * p1


def _place(xy: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Shift a shape to a random spot that keeps it on screen if possible."""
    lo = xy.min(axis=0)
    span = xy.max(axis=0) - lo
    room = np.maximum(np.asarray(SCREEN_PX) - span, 0.0)
    return xy - lo + rng.uniform(0.0, 1.0, 2) * room


def _event_values(base: float, jitter: float, n: int, rng: np.random.Generator) -> np.ndarray:
    v = base + (rng.normal(0.0, jitter, n) if jitter > 0 else np.zeros(n))
    return np.round(np.clip(v, 0.01, 1.0), 4)


def stroke_events(profile: BehaviorProfile, t0: int, rng: np.random.Generator, px_per_mm: float = 19.4,
                  touch_rate_hz: float = 60.0, means: Mapping[str, float] | None = None) -> list[TouchEvent]:
    """One down…up stroke along a quadratic arc with a minimum-jerk speed profile.

    The control point sits at twice the target deviation off the chord
    midpoint, which puts the arc's farthest point exactly at that
    deviation.
    """
    means = means or {}
    length = replace(profile.stroke_length_mm, mean=means.get("stroke_length_mm", profile.stroke_length_mm.mean)
                     ).draw(rng, lo=2.0) * px_per_mm
    speed = replace(profile.stroke_speed, mean=means.get("stroke_speed", profile.stroke_speed.mean)
                    ).draw(rng, lo=10.0) * px_per_mm / 1000.0  # px/ms
    curv = replace(profile.curviness, mean=means.get("curviness", profile.curviness.mean)).draw(rng, lo=0.0)
    size = replace(profile.touch_size, mean=means.get("touch_size", profile.touch_size.mean)).draw(rng, 0.02, 1.0)
    pressure = replace(profile.touch_pressure, mean=means.get("touch_pressure", profile.touch_pressure.mean)
                       ).draw(rng, 0.02, 1.0)

    angle = rng.uniform(0.0, 2.0 * math.pi)
    direction = np.array([math.cos(angle), math.sin(angle)])
    normal = np.array([-direction[1], direction[0]]) * (1.0 if rng.random() < 0.5 else -1.0)
    p0 = np.zeros(2)
    p1 = direction * length
    ctrl = 0.5 * (p0 + p1) + normal * 2.0 * curv * length
    # arc length of the quadratic, for the duration
    fine = _bezier(p0, ctrl, p1, np.linspace(0.0, 1.0, 65))
    path = float(np.sum(np.hypot(*np.diff(fine, axis=0).T)))
    duration = max(int(round(path / speed)), 30)
    n = max(3, int(math.ceil(duration * touch_rate_hz / 1000.0)) + 1)
    t = t0 + np.round(np.linspace(0.0, duration, n)).astype(np.int64)
    xy = np.round(_place(_bezier(p0, ctrl, p1, _min_jerk(np.linspace(0.0, 1.0, n))), rng), 2)
    sizes = _event_values(size, profile.size_jitter, n, rng)
    pressures = _event_values(pressure, profile.pressure_jitter, n, rng)
    phases = ["down"] + ["move"] * (n - 2) + ["up"]
    return [TouchEvent(int(t[i]), phases[i], float(xy[i, 0]), float(xy[i, 1]), float(pressures[i]), float(sizes[i]))
            for i in range(n)]


def tap_events(profile: BehaviorProfile, t0: int, rng: np.random.Generator, means: Mapping[str, float] | None = None,
               app_id: str | None = None) -> list[TouchEvent]:
    """A down(, move), up tap with sub-pixel drift and profile duration."""
    means = means or {}
    duration = int(round(replace(profile.tap_duration_ms, mean=means.get("tap_duration_ms",
                                                                          profile.tap_duration_ms.mean)
                                 ).draw(rng, 20.0, 290.0)))
    size = replace(profile.touch_size, mean=means.get("touch_size", profile.touch_size.mean)).draw(rng, 0.02, 1.0)
    pressure = replace(profile.touch_pressure, mean=means.get("touch_pressure", profile.touch_pressure.mean)
                       ).draw(rng, 0.02, 1.0)
    n = 3 if duration >= 40 else 2
    x0, y0 = rng.uniform(20.0, SCREEN_PX[0] - 20.0), rng.uniform(20.0, SCREEN_PX[1] - 20.0)
    drift = np.vstack([np.zeros(2), rng.uniform(-0.8, 0.8, (n - 1, 2))])
    xy = np.round(np.array([x0, y0]) + drift, 2)
    t = t0 + np.round(np.linspace(0.0, duration, n)).astype(np.int64)
    sizes = _event_values(size, profile.size_jitter, n, rng)
    pressures = _event_values(pressure, profile.pressure_jitter, n, rng)
    phases = ["down"] + ["move"] * (n - 2) + ["up"]
    return [TouchEvent(int(t[i]), phases[i], float(xy[i, 0]), float(xy[i, 1]), float(pressures[i]),
                       float(sizes[i]), app_id) for i in range(n)]


# -- sensors -------------------------------------------------------------------


def sensor_streams(profile: BehaviorProfile, duration_s: float, rng: np.random.Generator) -> dict[str, SensorStream]:
    """100 Hz-style streams: baseline + white tremor + Poisson motion bursts.

    acc is gravity on its y axis plus lacc's motion plus its own sensor
    noise; rot sits at a per-session orientation.
    """
    period = 1000.0 / profile.sample_rate_hz
    n = int(math.floor(duration_s * profile.sample_rate_hz))
    t = np.round(np.arange(n) * period).astype(np.int64)
    ts = t / 1000.0
    scale = math.exp(profile.tremor_jitter * rng.standard_normal())
    amp = {k: v * scale for k, v in profile.tremor_amplitude.items()}

    def motion(sensor: str, bursts) -> np.ndarray:
        a = amp[sensor]
        out = rng.normal(0.0, a, (n, 3)) if a > 0 else np.zeros((n, 3))
        for start, freq, phase, direction in bursts:
            lo = np.searchsorted(ts, start)
            hi = np.searchsorted(ts, start + profile.burst_duration_s)
            if hi <= lo:
                continue
            u = (ts[lo:hi] - start) / profile.burst_duration_s
            wave = np.sin(math.pi * u) ** 2 * np.sin(2 * math.pi * freq * (ts[lo:hi] - start) + phase)
            out[lo:hi] += profile.burst_gain * a * wave[:, None] * direction
        return out

    n_bursts = rng.poisson(profile.movement_event_rate * duration_s / 60.0)
    bursts = []
    for _ in range(n_bursts):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        bursts.append((rng.uniform(0.0, max(duration_s - profile.burst_duration_s, 0.0)),
                       rng.uniform(2.0, 6.0), rng.uniform(0.0, 2 * math.pi), direction))

    lacc = motion("lacc", bursts)
    acc = lacc + motion("acc", ()) + np.array([0.0, GRAVITY, 0.0])
    gyro = motion("gyro", bursts)
    baseline = np.round(rng.uniform(-0.5, 0.5, 3), 3)
    rot = baseline + motion("rot", bursts)
    return {s: SensorStream(s, t, np.round(v, 6)) for s, v in zip(SENSORS, (acc, gyro, lacc, rot))}


# -- sessions ------------------------------------------------------------------


def _session_means(profile: BehaviorProfile, rng: np.random.Generator) -> dict[str, float]:
    out = {}
    for name in _DIST_FIELDS:
        d = getattr(profile, name)
        out[name] = d.mean + profile.subject_jitter * d.std * rng.standard_normal()
    out["touch_size"] = min(max(out["touch_size"], 0.02), 1.0)
    out["touch_pressure"] = min(max(out["touch_pressure"], 0.02), 1.0)
    return out


def generate_session(profile: BehaviorProfile, duration_s: float = 60.0, n_gestures: int = 40,
                     rng: np.random.Generator | int | None = None, *, session_id: str = "s000",
                     label: str = "adult", age_group: str | None = None, stroke_fraction: float = 0.63,
                     px_per_mm: float = 19.4, touch_rate_hz: float = 60.0, logger_records: int = 0) -> Session:
    """One labelled session with ``n_gestures`` gestures spread over ``duration_s``.

    Gestures never overlap. ``logger_records`` experimenter taps tagged
    with the logger app id bracket the session.
    """
    if not isinstance(profile, BehaviorProfile):
        raise InvalidProfile("profile must be a BehaviorProfile")
    if n_gestures < 1 or duration_s <= 0:
        raise InvalidProfile("need at least one gesture and a positive duration")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    age_group = age_group or ("young_child" if label == "child" else "adult")
    means = _session_means(profile, rng)

    kinds = np.where(rng.random(n_gestures) < stroke_fraction, "stroke", "tap")
    drafts = []
    for kind in kinds:
        if kind == "stroke":
            drafts.append(stroke_events(profile, 0, rng, px_per_mm, touch_rate_hz, means))
        else:
            drafts.append(tap_events(profile, 0, rng, means))
    busy = sum(d[-1].t for d in drafts)
    total_ms = int(duration_s * 1000)
    margin = 100 + 320 * logger_records
    free = total_ms - 2 * margin - busy - 60 * n_gestures
    if free < 0:
        raise InvalidProfile(f"{n_gestures} gestures do not fit in {duration_s} s")
    gaps = np.diff(np.concatenate([[0], np.sort(rng.integers(0, free + 1, n_gestures)), [free]]))

    events: list[TouchEvent] = []
    for i in range(logger_records):
        events += tap_events(profile, 10 + i * 320, rng, app_id=LOGGER_APP_ID)
    t = margin
    for draft, gap in zip(drafts, gaps[:-1]):
        t += int(gap) + 60
        events += [replace(ev, t=ev.t + t) for ev in draft]
        t += draft[-1].t
    for i in range(logger_records):
        events += tap_events(profile, total_ms - margin + 20 + i * 320, rng, app_id=LOGGER_APP_ID)
    sensors = sensor_streams(profile, duration_s, rng)
    return Session(session_id, label, age_group, tuple(events), sensors)


def session_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def generate_dataset(cfg: GenConfig | None = None, threads: int = 1) -> tuple[list[Session], list[dict]]:
    """Sessions (children first) and their manifest entries.

    Each session draws from its own RNG keyed by (seed, index), so the
    result does not depend on ``threads``.
    """
    cfg = cfg or load_gen_config()
    n = cfg.sessions_per_class
    jobs = [("child", i, "young_child" if i % 2 == 0 else "older_child") for i in range(n)]
    jobs += [("adult", i, "adult") for i in range(n)]

    def make(job_index: int) -> Session:
        label, i, age = jobs[job_index]
        return generate_session(
            cfg.profiles[label], cfg.duration_s, cfg.gestures_per_session, session_rng(cfg.seed, job_index),
            session_id=f"{label}{i:03d}", label=label, age_group=age, stroke_fraction=cfg.stroke_fraction,
            px_per_mm=cfg.px_per_mm, touch_rate_hz=cfg.touch_rate_hz, logger_records=cfg.logger_records,
        )

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            sessions = list(pool.map(make, range(len(jobs))))
    else:
        sessions = [make(j) for j in range(len(jobs))]
    manifest = [session_manifest(s, f"{s.id}.touch.jsonl", f"{s.id}.sensors.jsonl") for s in sessions]
    return sessions, manifest


def write_synthetic(cfg: GenConfig, out_dir: str | Path, threads: int = 1) -> Path:
    """Generate and write a dataset plus the config it came from."""
    sessions, _ = generate_dataset(cfg, threads)
    path = write_dataset(sessions, out_dir)
    (Path(out_dir) / "gen_config.json").write_text(json.dumps(cfg.to_dict(), indent=1) + "\n", encoding="utf-8")
    return path

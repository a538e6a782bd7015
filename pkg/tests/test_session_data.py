from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from childdetect.errors import OrderError, ParseError, ValidationError
from childdetect.session_data import (
    LOGGER_APP_ID,
    SensorSample,
    SensorStream,
    Session,
    TouchEvent,
    filter_session,
    format_sensor_log,
    format_touch_log,
    load_dataset,
    load_manifest,
    magnitude,
    parse_sensor_log,
    parse_touch_log,
    write_dataset,
)
from childdetect.extract import extract_table

from conftest import ev


def test_touch_identity_parse():
    out = parse_touch_log('{"t":100,"phase":"down","x":10,"y":20,"pressure":0.4,"size":0.1}\n')
    assert out == [TouchEvent(100, "down", 10.0, 20.0, 0.4, 0.1)]


def test_touch_empty_input():
    assert parse_touch_log("") == []


@pytest.mark.parametrize("line", [
    '{"t":1,"phase":"down","x":1,"y":1,"pressure":1.5,"size":0.1}',
    '{"t":1,"phase":"down","x":1,"y":1,"pressure":0.5,"size":-0.1}',
    '{"t":1,"phase":"hover","x":1,"y":1,"pressure":0.5,"size":0.1}',
    '{"t":1,"phase":"down","x":-1,"y":1,"pressure":0.5,"size":0.1}',
    '{"t":1,"phase":"down","x":1,"pressure":0.5,"size":0.1}',
    '{"t":1.5,"phase":"down","x":1,"y":1,"pressure":0.5,"size":0.1}',
    'not json',
    '[1, 2]',
])
def test_touch_malformed(line):
    with pytest.raises(ParseError) as info:
        parse_touch_log("\n" + line + "\n")
    assert info.value.line_no == 2


def test_touch_order_error_and_tolerance():
    text = ('{"t":10,"phase":"down","x":1,"y":1,"pressure":0.5,"size":0.1}\n'
            '{"t":7,"phase":"up","x":1,"y":1,"pressure":0.5,"size":0.1}\n')
    with pytest.raises(OrderError):
        parse_touch_log(text)
    fixed = parse_touch_log(text, order_tolerance_ms=5)
    assert [e.t for e in fixed] == [7, 10]


def test_equal_timestamps_allowed():
    text = ('{"t":5,"sensor":"lacc","x":1,"y":2,"z":3}\n'
            '{"t":5,"sensor":"lacc","x":1,"y":2,"z":3}\n')
    assert len(parse_sensor_log(text).streams["lacc"]) == 2


def test_sensor_parse_and_skip():
    text = ('{"t":0,"sensor":"lacc","x":3,"y":4,"z":0}\n'
            '{"t":1,"sensor":"magnetometer","x":3,"y":4,"z":0}\n'
            '\n')
    log = parse_sensor_log(text)
    lacc = log.streams["lacc"]
    assert len(lacc) == 1 and lacc.magnitude[0] == 5.0
    assert log.skipped["magnetometer"] == 1
    # partition: every line parsed or skipped-with-count
    assert log.n_parsed + sum(log.skipped.values()) == log.n_lines == 3


def test_sensor_order_error():
    text = ('{"t":5,"sensor":"lacc","x":1,"y":1,"z":1}\n'
            '{"t":3,"sensor":"lacc","x":1,"y":1,"z":1}\n')
    with pytest.raises(OrderError):
        parse_sensor_log(text)


def test_sensor_interleaved_streams_are_independent():
    text = ('{"t":5,"sensor":"lacc","x":1,"y":1,"z":1}\n'
            '{"t":3,"sensor":"gyro","x":1,"y":1,"z":1}\n')
    log = parse_sensor_log(text)
    assert {k: len(v) for k, v in log.streams.items() if len(v)} == {"lacc": 1, "gyro": 1}


def test_sensor_malformed():
    with pytest.raises(ParseError):
        parse_sensor_log('{"t":0,"sensor":"acc","x":"a","y":0,"z":0}\n')
    with pytest.raises(ParseError):
        parse_sensor_log('{"t":0,"sensor":"acc","x":NaN,"y":0,"z":0}\n')


def test_sample_validation():
    with pytest.raises(ValueError):
        SensorSample(0, "baro", 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        SensorSample(0, "acc", math.inf, 0.0, 0.0)


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(finite, finite, finite)
def test_magnitude_property(x, y, z):
    m = SensorSample(0, "acc", x, y, z).magnitude
    assert m >= max(abs(x), abs(y), abs(z)) - 1e-9 * max(1.0, m)
    sq = x * x + y * y + z * z
    assert math.isclose(m * m, sq, rel_tol=1e-9, abs_tol=1e-300)
    assert magnitude(np.array([x]), np.array([y]), np.array([z]))[0] == m


touch_events = st.lists(
    st.tuples(st.integers(0, 50), st.sampled_from(["down", "move", "up"]),
              st.floats(0, 2000, allow_nan=False), st.floats(0, 2000, allow_nan=False),
              st.floats(0, 1), st.floats(0, 1), st.one_of(st.none(), st.text(max_size=5))),
    max_size=30,
)


@given(touch_events)
def test_touch_round_trip(rows):
    t = 0
    events = []
    for dt, phase, x, y, p, s, app in rows:
        t += dt
        events.append(TouchEvent(t, phase, x, y, p, s, app))
    text = format_touch_log(events)
    again = parse_touch_log(text)
    assert again == events
    assert format_touch_log(again) == text


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 3), st.sampled_from(["acc", "gyro", "lacc", "rot"]), finite, finite, finite),
                max_size=40))
def test_sensor_round_trip(rows):
    t = 0
    lines = []
    for dt, sensor, x, y, z in rows:
        t += dt
        lines.append(json.dumps({"t": t, "sensor": sensor, "x": x, "y": y, "z": z}))
    first = parse_sensor_log("\n".join(lines))
    text = format_sensor_log(first.streams)
    second = parse_sensor_log(text)
    assert first.streams.keys() == second.streams.keys()
    assert all(first.streams[k] == second.streams[k] for k in first.streams)
    assert format_sensor_log(second.streams) == text


def _session(events, label="child", age="young_child"):
    return Session("s1", label, age, tuple(events), {})


def test_filter_noop():
    s = _session([ev(0, "down"), ev(10, "up")])
    assert filter_session(s) is s


def test_filter_drops_logger_head_and_tail():
    events = [ev(i, "move", app_id=LOGGER_APP_ID) for i in range(3)]
    events += [ev(10, "down"), ev(20, "move"), ev(30, "up")]
    events += [ev(40, "down", app_id=LOGGER_APP_ID)]
    out = filter_session(_session(events))
    assert [e.t for e in out.touch_events] == [10, 20, 30]


def test_filter_keeps_interior_logger_records():
    events = [ev(0, "down"), ev(5, "move", app_id=LOGGER_APP_ID), ev(10, "up")]
    assert filter_session(_session(events)).touch_events == tuple(events)


def test_session_invariants():
    with pytest.raises(ValueError):
        Session("a", "adult", "young_child")
    with pytest.raises(ValueError):
        Session("a", "kid", "unknown")
    with pytest.raises(ValueError):
        Session("a", "child", "young_child", (ev(10, "down"), ev(5, "up")))
    Session("a", "child", "unknown")


def test_stream_window_and_readonly():
    s = SensorStream("acc", np.arange(10) * 10, np.ones((10, 3)))
    assert len(s.between(20, 50)) == 3
    with pytest.raises(ValueError):
        s.t[0] = 5
    with pytest.raises(ValueError):
        SensorStream("acc", [5, 3], np.ones((2, 3)))


def test_features_never_named_xy(small_sessions):
    for approach in ("touch-tap", "touch-stroke", "combined-stroke"):
        names = extract_table(small_sessions[:2] + small_sessions[-2:], approach).names
        assert not {"x", "y", "orientation", "stroke_direction"} & set(names)


def test_dataset_round_trip(tmp_path, small_sessions):
    path = write_dataset(small_sessions[:2], tmp_path)
    again = load_dataset(path)
    assert again == small_sessions[:2]
    assert len(load_manifest(path)) == 2


def test_manifest_single_object_and_errors(tmp_path, small_sessions):
    path = write_dataset(small_sessions[:1], tmp_path)
    entry = json.loads(path.read_text())[0]
    single = tmp_path / "one.json"
    single.write_text(json.dumps(entry))
    assert load_dataset(single) == small_sessions[:1]
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ValidationError):
        load_manifest(bad)
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({k: v for k, v in entry.items() if k != "label"}))
    with pytest.raises(ValidationError):
        load_dataset(missing)

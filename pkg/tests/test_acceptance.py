"""Acceptance criteria 1-9. Each test prints one PASS/FAIL line."""

from __future__ import annotations

import math
import time
from dataclasses import replace

import numpy as np
import pytest

import oracles
from childdetect.classify import train_forest, train_tree
from childdetect.classify.linear import logistic_grad, logistic_loss
from childdetect.classify.persist import dumps
from childdetect.evaluate import (
    EvalConfig,
    ablate_features,
    auc,
    evaluate_pipeline,
    evaluate_table,
    prepare_table,
    roc_and_eer,
    roc_curve,
    sweep_csv,
    sweep_window,
    trapezoid_auc,
)
from childdetect.evaluate import pipeline
from childdetect.extract import extract_table
from childdetect.segmentation import Gesture
from childdetect.sensor_features import axis_stats
from childdetect.session_data import TouchEvent
from childdetect.synthgen import generate_dataset, load_gen_config, write_synthetic
from childdetect.table import FeatureTable
from childdetect.touch_features import STROKE_FEATURES, find_ldp, stroke_features, tap_features

K_LIST = (1, 2, 3, 5, 8, 12, 16)


@pytest.fixture
def report_line(capsys):
    def emit(n: int, ok: bool, detail: str, started: float) -> None:
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} ({detail}; {time.perf_counter() - started:.1f} s)")
    return emit


def _gesture(rows, kind="stroke"):
    phases = ["down"] + ["move"] * (len(rows) - 2) + ["up"]
    return Gesture(kind, tuple(TouchEvent(t, ph, x, y, p, s) for (x, y, t, p, s), ph in zip(rows, phases)))


def _table(X, y):
    X = np.asarray(X, float).reshape(len(y), -1)
    return FeatureTable(tuple(f"f{j}" for j in range(X.shape[1])), X, np.asarray(y, np.int8),
                        tuple(f"g{i}" for i in range(len(y))), "stroke")


def test_criterion_1_feature_oracles(report_line):
    start = time.perf_counter()
    rows = [(0, 0, 0, 0.5, 0.2), (4, 3, 10, 0.6, 0.3), (8, 0, 20, 0.7, 0.4)]
    third = math.sqrt(0.02 / 3)  # population std of three values 0.1 apart
    hand = {
        "straight_to_trajectory_length_ratio": 0.8, "average_size": 0.3, "std_size": third, "start_p": 0.5,
        "start_to_LDP_length": 5.0, "average_velocity": 0.5, "std_velocity": 0.0, "start_to_LDP_duration": 10.0,
        "average_pressure": 0.6, "LDP_to_stop_length": 5.0, "trajectory_length": 10.0, "average_distance": 5.0,
        "straight_length": 8.0, "LDP_velocity": 0.5, "std_distance": 0.0, "std_pressure": third,
        "LDP_to_stop_duration": 10.0, "LDP_p": 0.6, "stop_p": 0.7, "LDP_s": 0.3, "start_s": 0.2, "stop_s": 0.4,
    }
    got = dict(zip(STROKE_FEATURES, stroke_features(_gesture(rows))))
    oracle = oracles.stroke(rows)
    stroke_ok = len(got) == 22 and all(abs(got[k] - hand[k]) <= 1e-9 and abs(got[k] - oracle[k]) <= 1e-9
                                       for k in STROKE_FEATURES)
    tap = tap_features(_gesture(rows, "tap"))
    tap_ok = all(abs(a - b) <= 1e-9 for a, b in zip(tap, (0.6, 0.3, 20.0))) and len(tap) == 3
    ldp = find_ldp([(0, 0), (4, 3), (8, 0)])
    ok = stroke_ok and tap_ok and ldp.deviation == 3.0 and time.perf_counter() - start < 1.0
    report_line(1, ok, f"ratio {got['straight_to_trajectory_length_ratio']}, LDP deviation {ldp.deviation}, "
                       f"average_velocity {got['average_velocity']}", start)
    assert ok


def test_criterion_2_moment_statistics(report_line):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(3, 10_001))
        xs = rng.normal(rng.uniform(-5, 5), rng.uniform(0.01, 3), n)
        got = axis_stats(xs)
        want = oracles.moments(xs.tolist())
        for a, b in zip(got, want):
            worst = max(worst, abs(a - b) / max(abs(b), 1e-12))
        mean, std, _, _, _, rmsd, _, _ = got
        assert abs(rmsd - std) <= 1e-12
    stats = axis_stats([1.0, 2.0, 3.0])
    fixture_ok = abs(stats[7] - 1.5) <= 1e-12 and stats[6] == 0.0
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and fixture_ok and elapsed < 10
    report_line(2, ok, f"max relative error {worst:.2e}, [1,2,3] kurtosis {stats[7]} skewness {stats[6]}", start)
    assert ok


def test_criterion_3_metrics(report_line):
    start = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(500):
        n_pos, n_neg = rng.integers(1, 60, 2)
        levels = int(rng.integers(2, 30))
        pos = rng.integers(0, levels, n_pos) / levels  # many ties
        neg = rng.integers(0, levels, n_neg) / levels
        if rng.random() < 0.5:
            pos, neg = rng.uniform(size=n_pos), rng.uniform(size=n_neg)
        worst = max(worst, abs(auc(pos, neg) - trapezoid_auc(roc_curve(pos, neg))))
    eer_fixture = roc_and_eer([0.9, 0.8, 0.4], [0.6, 0.2, 0.1])[1]
    perfect = (auc([0.9, 0.8, 0.7], [0.3, 0.2]), roc_and_eer([0.9, 0.8, 0.7], [0.3, 0.2])[1])
    same = auc(rng.uniform(size=2000), rng.uniform(size=2000))
    elapsed = time.perf_counter() - start
    ok = (worst <= 1e-9 and abs(eer_fixture - 1 / 3) <= 1e-12 and perfect == (1.0, 0.0)
          and abs(same - 0.5) <= 0.05 and elapsed < 10)
    report_line(3, ok, f"max |rank-trapezoid| {worst:.1e}, fixture EER {eer_fixture:.6f}, "
                       f"perfect {perfect}, null AUC {same:.3f}", start)
    assert ok


def test_criterion_4_classifier_sanity(report_line):
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    x = np.concatenate([-rng.uniform(0.05, 3, 50), rng.uniform(0.05, 3, 50)])
    y = (x < 0).astype(np.int8)
    forest = train_forest(_table(x, y), n_estimators=200, max_features="log2", criterion="entropy", seed=0)
    train_acc = float(np.mean((forest.scores(x[:, None]) >= 0.5) == (y == 1)))

    Xs = rng.normal(size=(40, 5))
    yy = rng.integers(0, 2, 40).astype(float)
    w, b = rng.normal(size=5), -0.2
    gw, _ = logistic_grad(w, b, Xs, yy)
    h = 1e-6
    grad_err = max(abs((logistic_loss(w + h * e, b, Xs, yy) - logistic_loss(w - h * e, b, Xs, yy)) / (2 * h) - g)
                   for e, g in zip(np.eye(5), gw))

    null = []
    for seed in range(20):
        r = np.random.default_rng(1000 + seed)
        X = r.normal(size=(1400, 6))
        yl = r.permutation(np.repeat([0, 1], 700)).astype(np.int8)  # labels carry no signal
        f = train_forest(_table(X[:400], yl[:400]), n_estimators=200, seed=seed)
        s = f.scores(X[400:])
        null.append(auc(s[yl[400:] == 1], s[yl[400:] == 0]))
    elapsed = time.perf_counter() - start
    ok = train_acc == 1.0 and grad_err <= 1e-6 and all(0.4 <= a <= 0.6 for a in null) and elapsed < 60
    report_line(4, ok, f"train accuracy {train_acc}, gradient error {grad_err:.1e}, "
                       f"null AUC range [{min(null):.3f}, {max(null):.3f}]", start)
    assert ok


@pytest.fixture(scope="module")
def default_sessions():
    sessions, _ = generate_dataset(load_gen_config("default_profiles"))
    return sessions


def test_criterion_5_trends(report_line, default_sessions):
    start = time.perf_counter()
    reports = {a: evaluate_pipeline(EvalConfig(approach=a, k_list=K_LIST), default_sessions)
               for a in ("touch-stroke", "sensor", "combined-stroke")}
    stroke, sensor, combined = (reports[a] for a in ("touch-stroke", "sensor", "combined-stroke"))
    combined_by_3 = max(combined.auc_at(k) for k in (1, 2, 3))
    largest = max(K_LIST)
    eers = {a: r.eer_at(largest) for a, r in reports.items()}
    checks = [
        stroke.auc_at(8) >= 0.95,
        stroke.auc_at(8) >= stroke.auc_at(1),
        sensor.auc_at(5) >= 0.97,
        combined_by_3 >= 0.97,
        all(e is not None and e <= 0.05 for e in eers.values()),
    ]
    elapsed = time.perf_counter() - start
    ok = all(checks) and elapsed < 300
    report_line(5, ok, f"stroke AUC k=1 {stroke.auc_at(1):.3f} k=8 {stroke.auc_at(8):.3f}; sensor AUC k=5 "
                       f"{sensor.auc_at(5):.3f}; combined AUC by k=3 {combined_by_3:.3f}; EER k={largest} "
                       + ", ".join(f"{a} {e:.4f}" for a, e in eers.items()), start)
    assert ok


def test_criterion_6_size_only_ablation(report_line):
    start = time.perf_counter()
    sessions, _ = generate_dataset(load_gen_config("size_overlap"))
    cfg = EvalConfig(approach="touch-stroke", k_list=(1,))
    full = evaluate_pipeline(cfg, sessions).auc_at(1)
    size = ablate_features(cfg, sessions, "size").auc_at(1)
    elapsed = time.perf_counter() - start
    ok = full - size >= 0.05 and elapsed < 120
    report_line(6, ok, f"full AUC {full:.3f}, size-only AUC {size:.3f}", start)
    assert ok


def test_criterion_7_window_sweep(report_line):
    start = time.perf_counter()
    sessions, _ = generate_dataset(load_gen_config("burst_tremor"))
    rows = sweep_window(EvalConfig(approach="sensor", k_list=(1,)), sessions, tuple(range(1, 21)))
    by_n = {r["window_s"]: r["auc"] for r in rows}
    table_rows = sweep_csv(rows).strip().splitlines()[1:]
    elapsed = time.perf_counter() - start
    ok = (len(rows) == 20 and len(table_rows) == 20 and sorted(by_n) == list(range(1, 21))
          and all(0 <= a <= 1 for a in by_n.values()) and by_n[1] >= by_n[20] - 0.02 and elapsed < 600)
    report_line(7, ok, f"{len(rows)} rows, AUC n=1 {by_n[1]:.4f}, n=20 {by_n[20]:.4f}", start)
    assert ok


def test_criterion_8_determinism(report_line, tmp_path, small_config):
    start = time.perf_counter()
    same = []
    # synthetic data
    cfg = replace(small_config, sessions_per_class=4)
    a = write_synthetic(cfg, tmp_path / "a", threads=1).parent
    b = write_synthetic(cfg, tmp_path / "b", threads=4).parent
    same.append(all((a / p.name).read_bytes() == p.read_bytes() for p in b.iterdir())
                and len(list(a.iterdir())) == len(list(b.iterdir())))
    sessions, _ = generate_dataset(cfg, threads=3)
    # features
    csv = [extract_table(sessions, "combined-stroke").to_csv() for _ in range(2)]
    same.append(csv[0] == csv[1])
    # models
    table = extract_table(sessions, "touch-stroke")
    same.append(dumps(train_forest(table, seed=8, threads=1)) == dumps(train_forest(table, seed=8, threads=4)))
    # reports
    for approach in ("touch-stroke", "sensor"):
        docs = [evaluate_pipeline(EvalConfig(approach=approach, folds=4, k_list=(1, 4), threads=t), sessions)
                .to_json() for t in (1, 2, 4)]
        same.append(docs[0] == docs[1] == docs[2])
    ok = all(same)
    report_line(8, ok, f"{sum(same)}/{len(same)} stages byte-identical at 1/2/4 threads", start)
    assert ok


def test_criterion_9_leakage_guards(report_line, small_sessions, monkeypatch):
    start = time.perf_counter()
    seen = []
    real = pipeline.select_top_k

    def spy(train, k, **kw):
        seen.append(train)
        return real(train, k, **kw)

    monkeypatch.setattr(pipeline, "select_top_k", spy)
    ok = True
    for mode in ("record", "session"):
        cfg = EvalConfig(approach="sensor", folds=4, mode=mode, k_list=(1,), classifier_params={"n_estimators": 40})
        table = prepare_table(cfg, small_sessions)
        seen.clear()
        report = evaluate_table(cfg, table)
        folds = np.asarray(report.folds)
        lk = report.leakage
        ok &= lk["folds_disjoint"] and lk["selection_train_only"] and lk["selection_fits"] == cfg.folds
        ok &= len(seen) == cfg.folds
        for f, train in enumerate(seen):
            test_rows = {r.tobytes() for r in table.X[folds == f]}
            ok &= np.array_equal(train.X, table.X[folds != f]) and not test_rows & {r.tobytes() for r in train.X}
            if mode == "session":
                ok &= not set(train.groups) & {table.groups[i] for i in np.flatnonzero(folds == f)}
        digests = lk["fold_digests"]
        ok &= all(tr != te for tr, te in digests) and len({te for _, te in digests}) == cfg.folds
    report_line(9, bool(ok), "fold sets disjoint, selection fit on training folds only (record and session mode)",
                start)
    assert ok

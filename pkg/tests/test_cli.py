from __future__ import annotations

import json
import subprocess
import sys

import pytest

from childdetect.cli import run

FAST = '{"n_estimators": 20}'


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert run(["synth", "--out", str(out), "--sessions", "4", "--gestures", "20", "--duration-s", "25",
                "--seed", "2", "--threads", "1"]) == 0
    return out


def test_pipeline_smoke(data, tmp_path):
    manifest = str(data / "manifest.json")
    assert (data / "gen_config.json").exists()
    feats = str(tmp_path / "stroke.csv")
    model = str(tmp_path / "model.json")
    report = tmp_path / "report.json"
    assert run(["ingest", "--manifest", manifest, "--out", str(tmp_path / "ingest.json")]) == 0
    ingest = json.loads((tmp_path / "ingest.json").read_text())
    assert len(ingest["sessions"]) == 8 and ingest["skipped_total"] == {}
    assert run(["segment", "--manifest", manifest, "--out", str(tmp_path / "g.jsonl")]) == 0
    assert run(["extract", "--manifest", manifest, "--kind", "stroke", "--out", feats]) == 0
    assert json.loads((tmp_path / "stroke.csv.config.json").read_text())["approach"] == "touch-stroke"
    assert run(["train", "--features", feats, "--params", FAST, "--out", model, "--threads", "2"]) == 0
    assert json.loads((tmp_path / "model.json").read_text())["config"]["params"] == {"n_estimators": 20, "seed": 0}
    pred = tmp_path / "pred.jsonl"
    assert run(["predict", "--model", model, "--features", feats, "--k", "3", "--out", str(pred)]) == 0
    lines = [json.loads(line) for line in pred.read_text().splitlines()]
    assert lines and all(d["verdict"] in ("child", "adult") and d["k"] == 3 for d in lines)
    assert run(["eval", "--manifest", manifest, "--folds", "4", "--k-list", "1-3", "--params", FAST,
                "--out", str(report), "--roc-dir", str(tmp_path / "roc")]) == 0
    doc = json.loads(report.read_text())
    assert [r["k"] for r in doc["results"]] == [1, 2, 3]
    assert (tmp_path / "roc" / "roc_k1.csv").exists()


def test_other_commands(data, tmp_path):
    manifest = str(data / "manifest.json")
    common = ["--manifest", manifest, "--folds", "3", "--params", FAST, "--threads", "1"]
    assert run(["sweep", *common, "--approach", "sensor", "--top-k", "8", "--n-list", "1,2",
                "--out", str(tmp_path / "sweep.csv")]) == 0
    assert len((tmp_path / "sweep.csv").read_text().splitlines()) == 3
    assert run(["ablate", *common, "--keep", "size", "--out", str(tmp_path / "ab.json")]) == 0
    assert len(json.loads((tmp_path / "ab.json").read_text())["config"]["ablation_features"]) == 5
    assert run(["compare", "--manifest", manifest, "--folds", "3", "--classifiers", "tree,logistic",
                "--out", str(tmp_path / "cmp.json")]) == 0
    assert [r["classifier"] for r in json.loads((tmp_path / "cmp.json").read_text())["rows"]] == ["tree", "logistic"]
    assert run(["rank", "--manifest", manifest, "--k", "5", "--out", str(tmp_path / "mask.txt")]) == 0
    assert len((tmp_path / "mask.txt").read_text().split()) == 5
    sensor = str(tmp_path / "sensor.csv")
    assert run(["extract", "--manifest", manifest, "--approach", "sensor", "--mask", str(tmp_path / "mask.txt"),
                "--out", sensor]) == 0
    assert len(open(sensor).readline().split(",")) == 5 + 2


def test_exit_codes(data, tmp_path, caplog):
    manifest = str(data / "manifest.json")
    assert run(["eval", "--manifest", manifest, "--bogus"]) == 1
    assert run(["eval", "--manifest", manifest, "--folds", "1"]) == 1
    assert run(["eval", "--manifest", str(tmp_path / "missing.json")]) == 2
    children = [e for e in json.loads((data / "manifest.json").read_text()) if e["label"] == "child"]
    one = data / "children.json"
    one.write_text(json.dumps(children))
    assert run(["eval", "--manifest", str(one), "--folds", "2", "--params", FAST]) == 2
    assert "SingleClass" in caplog.text


def test_config_file_and_rerun_identical(data, tmp_path):
    cfg = tmp_path / "eval.json"
    cfg.write_text(json.dumps({"data": str(data / "manifest.json"), "approach": "combined-stroke",
                               "folds": 3, "k_list": [1, 2], "classifier_params": {"n_estimators": 20}}))
    outs = []
    for threads in ("1", "3"):
        out = tmp_path / f"r{threads}.json"
        assert run(["eval", "--config", str(cfg), "--threads", threads, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["config"]["approach"] == "combined-stroke"


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "childdetect", "--version"], capture_output=True, text=True)
    assert done.returncode == 0 and "childdetect" in done.stdout

"""Command-line entry point.

Exit codes: 0 success, 1 invalid usage or configuration, 2 bad data.
Logs go to stderr; results go to the files named by ``--out`` (or stdout).
Every artifact carries the fully resolved configuration that produced it,
either inline (JSON outputs) or in a ``<out>.config.json`` sidecar.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import Counter
from pathlib import Path
from typing import Sequence

from . import __version__
from .classify import FORMAT_VERSION, backend, load_model, model_to_dict, predict_scores, train_model
from .errors import ChildDetectError, DataError, ValidationError
from .evaluate import EvalConfig, ablate_features, compare_classifiers, evaluate_pipeline, sweep_csv, sweep_window
from .extract import APPROACHES, ExtractOptions, extract_table, filter_age
from .fusion import decide, make_bundles
from .segmentation import segment_gestures
from .sensor_features import SENSOR_FEATURES, FeatureMask, select_top_k
from .session_data import load_dataset, load_manifest, parse_sensor_log, parse_touch_log
from .synthgen import load_gen_config, write_synthetic
from .table import FeatureTable, read_csv
from .touch_features import TAP_FEATURES

log = logging.getLogger("childdetect")

KIND_APPROACH = {"tap": "touch-tap", "stroke": "touch-stroke", "sensor": "sensor",
                 "tap+sensor": "combined-tap", "stroke+sensor": "combined-stroke"}


class ArgumentParser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors; 2 means bad data here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- helpers -------------------------------------------------------------------


def _dump(doc, out: str | None) -> None:
    text = json.dumps(doc, indent=1) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _write_text(text: str, out: str | None, echo: dict) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8")
    Path(out + ".config.json").write_text(json.dumps(echo, indent=1) + "\n", encoding="utf-8")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        if "-" in text and "," not in text:
            lo, hi = text.split("-")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected e.g. 1,2,3 or 1-20, got {text!r}") from None


def _options(args) -> ExtractOptions:
    return ExtractOptions(args.gap_ms, args.tap_move_px, args.tap_max_ms, args.min_samples)


def _infer_kind(names: Sequence[str]) -> str:
    names = set(names)
    sensor = bool(names & set(SENSOR_FEATURES))
    touch = names - set(SENSOR_FEATURES)
    if not touch:
        return "sensor"
    tap = touch <= set(TAP_FEATURES)
    return ("tap" if tap else "stroke") + ("+sensor" if sensor else "")


def _table(path: str) -> FeatureTable:
    text = Path(path).read_text(encoding="utf-8")
    header = text.split("\n", 1)[0].split(",")[:-2]
    return read_csv(path, _infer_kind(header))


def _segment_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("segmentation")
    g.add_argument("--gap-ms", type=float, default=1000.0, help="pause that splits a gesture (default 1000)")
    g.add_argument("--tap-move-px", type=float, default=10.0, help="max tap travel in px (default 10)")
    g.add_argument("--tap-max-ms", type=float, default=300.0, help="max tap duration in ms (default 300)")
    g.add_argument("--min-samples", type=int, default=3, help="min sensor samples per window (default 3)")


def _eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON evaluation config; flags override its values")
    p.add_argument("--manifest", help="dataset manifest (else the config's 'data' entry)")
    p.add_argument("--approach", choices=APPROACHES)
    p.add_argument("--classifier", choices=("forest", "tree", "logistic", "perceptron"))
    p.add_argument("--params", help="classifier parameters as a JSON object")
    p.add_argument("--k-list", type=_int_list, help="bundle sizes, e.g. 1,2,4,8 or 1-16")
    p.add_argument("--window-s", type=float)
    p.add_argument("--age-filter", choices=("young_child", "older_child"))
    p.add_argument("--folds", type=int)
    p.add_argument("--mode", choices=("record", "session"))
    p.add_argument("--stride", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--top-k", type=int, help="sensor features kept by importance (sensor default 20; 0 = all)")
    p.add_argument("--aggregate", choices=("pooled", "per_fold"))


def _eval_config(args) -> tuple[EvalConfig, str]:
    doc: dict = {}
    base = Path(".")
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.config}: invalid JSON ({exc.msg})") from None
        if not isinstance(doc, dict):
            raise ValidationError("config must be a JSON object")
        base = Path(args.config).parent
    data = args.manifest or (str(base / doc["data"]) if "data" in doc else None)
    doc.pop("data", None)
    overrides = {
        "approach": args.approach, "classifier": args.classifier, "k_list": args.k_list,
        "window_s": args.window_s, "age_filter": args.age_filter, "folds": args.folds, "mode": args.mode,
        "stride": args.stride, "seed": args.seed, "top_k": args.top_k, "aggregate": args.aggregate,
    }
    if args.params:
        try:
            overrides["classifier_params"] = json.loads(args.params)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"--params: invalid JSON ({exc.msg})") from None
    doc.update({k: v for k, v in overrides.items() if v is not None})
    doc["threads"] = args.threads
    if data is None:
        raise ValidationError("no dataset: pass --manifest or set 'data' in the config")
    return EvalConfig.from_dict(doc), data


# -- subcommands -----------------------------------------------------------------


def cmd_synth(args) -> None:
    cfg = load_gen_config(args.config, seed=args.seed, sessions_per_class=args.sessions,
                          gestures_per_session=args.gestures, duration_s=args.duration_s)
    path = write_synthetic(cfg, args.out, args.threads)
    log.info("wrote %d sessions to %s", 2 * cfg.sessions_per_class, path)


def cmd_ingest(args) -> None:
    base = Path(args.manifest).parent
    sessions, totals = [], Counter()
    for entry in load_manifest(args.manifest):
        with open(base / entry["touch"], encoding="utf-8") as fh:
            events = parse_touch_log(fh, args.order_tolerance_ms)
        with open(base / entry["sensors"], encoding="utf-8") as fh:
            slog = parse_sensor_log(fh, args.order_tolerance_ms)
        skipped = {k or "<blank>": v for k, v in sorted(slog.skipped.items())}
        totals.update(skipped)
        sessions.append({
            "id": entry["id"], "label": entry["label"], "age_group": entry["age_group"],
            "touch_events": len(events),
            "sensor_samples": {s: len(v) for s, v in sorted(slog.streams.items())},
            "skipped": skipped,
        })
    _dump({"config": {"manifest": args.manifest, "order_tolerance_ms": args.order_tolerance_ms},
           "sessions": sessions, "skipped_total": dict(sorted(totals.items()))}, args.out)


def cmd_segment(args) -> None:
    lines = []
    for s in load_dataset(args.manifest):
        for i, g in enumerate(segment_gestures(s.touch_events, args.gap_ms, args.tap_move_px, args.tap_max_ms)):
            lines.append(json.dumps({"session": s.id, "index": i, "kind": g.kind, "complete": g.complete,
                                     "t_start": g.t_start, "t_end": g.t_end, "n_points": len(g.points)}))
    echo = {"manifest": args.manifest, "gap_ms": args.gap_ms, "tap_move_px": args.tap_move_px,
            "tap_max_ms": args.tap_max_ms}
    _write_text("".join(line + "\n" for line in lines), args.out, echo)


def cmd_extract(args) -> None:
    args.approach = KIND_APPROACH[args.kind] if args.kind else args.approach or "touch-stroke"
    sessions = filter_age(load_dataset(args.manifest), args.age_filter)
    stats: Counter = Counter()
    table = extract_table(sessions, args.approach, args.window_s, _options(args), stats)
    if args.mask:
        mask = FeatureMask.from_text(Path(args.mask).read_text(encoding="utf-8"))
        keep = set(mask.names)
        table = table.columns([n for n in table.names if n in keep or n not in SENSOR_FEATURES])
    for reason, n in sorted(stats.items()):
        if n:
            log.info("skipped %d observation(s): %s", n, reason)
    echo = {"manifest": args.manifest, "approach": args.approach, "window_s": args.window_s,
            "age_filter": args.age_filter, "mask": args.mask, "gap_ms": args.gap_ms,
            "tap_move_px": args.tap_move_px, "tap_max_ms": args.tap_max_ms, "min_samples": args.min_samples,
            "rows": len(table), "skipped": dict(sorted(stats.items()))}
    _write_text(table.to_csv(), args.out, echo)


def cmd_train(args) -> None:
    table = _table(args.features)
    try:
        params = json.loads(args.params) if args.params else {}
    except json.JSONDecodeError as exc:
        raise ValidationError(f"--params: invalid JSON ({exc.msg})") from None
    if args.classifier in ("forest", "tree", "perceptron"):
        params.setdefault("seed", args.seed)
    if args.classifier == "forest":
        params["threads"] = args.threads
    model = train_model(args.classifier, table, **params)
    doc = model_to_dict(model)
    params.pop("threads", None)
    doc["config"] = {"features": args.features, "classifier": args.classifier, "params": params,
                     "rows": len(table), "format_version": FORMAT_VERSION}
    text = json.dumps(doc, separators=(",", ":")) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    log.info("trained %s on %d rows x %d features", args.classifier, len(table), len(table.names))


def cmd_predict(args) -> None:
    model = load_model(args.model)
    table = _table(args.features)
    names = getattr(model, "feature_names", ())
    if names and tuple(names) != table.names:
        table = table.columns(names)
    scores = predict_scores(model, table.X)
    runs: dict[str, list[int]] = {}
    for i, g in enumerate(table.groups):
        runs.setdefault(g, []).append(i)
    lines = []
    for group, idx in runs.items():
        for b in make_bundles([float(scores[i]) for i in idx], args.k, args.stride):
            d = decide(b.fused, args.threshold)
            lines.append(json.dumps({"session": group, "start": b.start, "k": b.k, "fused": d.fused,
                                     "verdict": d.verdict, "label": table.labels[idx[0]]}))
    echo = {"model": args.model, "features": args.features, "k": args.k, "stride": args.stride,
            "threshold": args.threshold}
    _write_text("".join(line + "\n" for line in lines), args.out, echo)


def _write_rocs(report, roc_dir: str | None) -> None:
    if not roc_dir:
        return
    out = Path(roc_dir)
    out.mkdir(parents=True, exist_ok=True)
    for r in report.results:
        if r.roc is not None:
            (out / f"roc_k{r.k}.csv").write_text(r.roc.to_csv(), encoding="utf-8")


def cmd_eval(args) -> None:
    cfg, data = _eval_config(args)
    report = evaluate_pipeline(cfg, load_dataset(data))
    for w in report.warnings:
        log.warning(w)
    _dump(report.to_dict(), args.out)
    _write_rocs(report, args.roc_dir)


def cmd_sweep(args) -> None:
    cfg, data = _eval_config(args)
    rows = sweep_window(cfg, load_dataset(data), args.n_list)
    echo = {**cfg.resolved(), "n_list": list(args.n_list)}
    _write_text(sweep_csv(rows), args.out, echo)


def cmd_ablate(args) -> None:
    cfg, data = _eval_config(args)
    keep = args.keep.split(",") if "," in args.keep else args.keep
    report = ablate_features(cfg, load_dataset(data), keep)
    report.config["keep"] = args.keep
    _dump(report.to_dict(), args.out)


def cmd_compare(args) -> None:
    grid = {}
    if args.grid:
        try:
            grid = json.loads(Path(args.grid).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.grid}: invalid JSON ({exc.msg})") from None
    classifiers = args.classifiers.split(",")
    base = EvalConfig(approach=args.approach, threads=args.threads, mode=args.mode)
    rows = compare_classifiers(load_dataset(args.manifest), args.approach, classifiers, grid,
                               args.folds, args.seed, base)
    _dump({"config": {**base.resolved(), "folds": args.folds, "seed": args.seed, "classifiers": classifiers,
                      "grid": grid}, "rows": rows}, args.out)


def cmd_rank(args) -> None:
    if args.features:
        table = _table(args.features)
    else:
        sessions = filter_age(load_dataset(args.manifest), args.age_filter)
        table = extract_table(sessions, "sensor", args.window_s, _options(args))
    mask = select_top_k(table, args.k, seed=args.seed, threads=args.threads)
    echo = {"features": args.features, "manifest": args.manifest, "window_s": args.window_s, "k": args.k,
            "seed": args.seed, "ranking": [[n, v] for n, v in mask.ranking]}
    _write_text(mask.to_text(), args.out, echo)


# -- parser --------------------------------------------------------------------


def build_parser() -> ArgumentParser:
    p = ArgumentParser(prog="childdetect", description="Child vs adult detection from touch and motion data.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    def command(name: str, help: str, func, threads: bool = True):
        sp = sub.add_parser(name, help=help, description=help)
        sp.set_defaults(func=func)
        if threads:
            sp.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                            help="worker threads (default: all cores); results do not depend on it")
        return sp

    sp = command("synth", "generate a synthetic labelled dataset", cmd_synth)
    sp.add_argument("--config", help="generator JSON, or a shipped name: default_profiles, burst_tremor, size_overlap")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--sessions", type=int, help="sessions per class")
    sp.add_argument("--gestures", type=int, help="gestures per session")
    sp.add_argument("--duration-s", type=float)

    sp = command("ingest", "parse and validate a dataset, report skipped lines", cmd_ingest, threads=False)
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--order-tolerance-ms", type=int, default=0)
    sp.add_argument("--out")

    sp = command("segment", "write the gesture index as JSONL", cmd_segment, threads=False)
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out")
    _segment_flags(sp)

    sp = command("extract", "write a feature table as CSV", cmd_extract, threads=False)
    sp.add_argument("--manifest", required=True)
    which = sp.add_mutually_exclusive_group()
    which.add_argument("--approach", choices=APPROACHES)
    which.add_argument("--kind", choices=tuple(KIND_APPROACH), help="observation kind (alias for --approach)")
    sp.add_argument("--window-s", type=float, default=1.0)
    sp.add_argument("--age-filter", choices=("young_child", "older_child"))
    sp.add_argument("--mask", help="feature mask file (one sensor feature name per line)")
    sp.add_argument("--out")
    _segment_flags(sp)

    sp = command("train", "train a classifier on a feature CSV", cmd_train)
    sp.add_argument("--features", required=True)
    sp.add_argument("--classifier", choices=("forest", "tree", "logistic", "perceptron"), default="forest")
    sp.add_argument("--params", help="classifier parameters as a JSON object")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")

    sp = command("predict", "score features and write bundle decisions as JSONL", cmd_predict, threads=False)
    sp.add_argument("--model", required=True)
    sp.add_argument("--features", required=True)
    sp.add_argument("--k", type=int, default=1, help="bundle size")
    sp.add_argument("--stride", type=int, default=1)
    sp.add_argument("--threshold", type=float, default=0.5)
    sp.add_argument("--out")

    sp = command("eval", "cross-validated AUC/EER per bundle size", cmd_eval)
    _eval_flags(sp)
    sp.add_argument("--out", help="report JSON")
    sp.add_argument("--roc-dir", help="write roc_k<k>.csv files here")

    sp = command("sweep", "sensor window-size sweep as CSV", cmd_sweep)
    _eval_flags(sp)
    sp.add_argument("--n-list", type=_int_list, default=tuple(range(1, 21)), help="window sizes in s (default 1-20)")
    sp.add_argument("--out")

    sp = command("ablate", "evaluate on a feature subset", cmd_ablate)
    _eval_flags(sp)
    sp.add_argument("--keep", required=True, help="'size', a name substring, or a comma-separated name list")
    sp.add_argument("--out")

    sp = command("compare", "grid-searched classifier comparison at k=1", cmd_compare)
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--approach", choices=APPROACHES, default="touch-stroke")
    sp.add_argument("--classifiers", default="forest,tree,logistic,perceptron")
    sp.add_argument("--grid", help="JSON object: classifier -> list of parameter objects")
    sp.add_argument("--folds", type=int, default=10)
    sp.add_argument("--mode", choices=("record", "session"), default="record")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")

    sp = command("rank", "rank sensor features by forest importance, write a top-k mask", cmd_rank)
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--features", help="sensor feature CSV")
    src.add_argument("--manifest")
    sp.add_argument("--window-s", type=float, default=1.0)
    sp.add_argument("--age-filter", choices=("young_child", "older_child"))
    sp.add_argument("--k", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    _segment_flags(sp)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s level=%(levelname)s logger=%(name)s msg=%(message)s",
        stream=sys.stderr,
    )
    if getattr(args, "threads", 1) < 1:
        log.error("--threads must be >= 1")
        return 1
    log.debug("backend=%s command=%s", backend(), args.command)
    try:
        args.func(args)
    except ValidationError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1
    except (DataError, ChildDetectError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 2
    except FileNotFoundError as exc:
        log.error("FileNotFoundError: %s", exc)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

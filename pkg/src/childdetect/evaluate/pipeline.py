"""Cross-validated evaluation of the detection approaches.

Every observation is scored once, by a model that never saw its fold.
Scores are then bundled per session in chronological order, and AUC/EER
are computed per bundle size. Feature selection, when configured, is
refit inside each training fold.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from collections import Counter
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable, Sequence

import numpy as np

from ..classify import train_model
from ..errors import EmptyMask, LeakageError, SingleClass, ValidationError
from ..extract import AGE_FILTERS, APPROACHES, ExtractOptions, extract_table, feature_names, filter_age
from ..fusion import fused_mean
from ..sensor_features import select_top_k
from ..session_data import Session
from ..table import CHILD, FeatureTable
from .cv import MODES, fold_indices, index_digest, kfold_split
from .metrics import RocCurve, auc, roc_and_eer

log = logging.getLogger(__name__)

AGGREGATES = ("pooled", "per_fold")


@dataclass(frozen=True)
class EvalConfig:
    """Everything an evaluation run depends on; echoed into reports.

    ``top_k=None`` means 20 for the sensor approach and no selection
    otherwise; ``top_k=0`` disables selection explicitly.
    """

    approach: str = "touch-stroke"
    classifier: str = "forest"
    classifier_params: dict = field(default_factory=dict)
    k_list: tuple[int, ...] = (1,)
    window_s: float = 1.0
    age_filter: str | None = None
    folds: int = 10
    mode: str = "record"
    stride: int = 1
    seed: int = 0
    top_k: int | None = None
    aggregate: str = "pooled"
    tap_move_px: float = 10.0
    tap_max_ms: float = 300.0
    gap_ms: float = 1000.0
    min_samples: int = 3
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "k_list", tuple(int(k) for k in self.k_list))
        object.__setattr__(self, "classifier_params", dict(self.classifier_params))
        if self.approach not in APPROACHES:
            raise ValidationError(f"approach must be one of {APPROACHES}")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}")
        if self.aggregate not in AGGREGATES:
            raise ValidationError(f"aggregate must be one of {AGGREGATES}")
        if self.age_filter not in AGE_FILTERS:
            raise ValidationError(f"age_filter must be one of {AGE_FILTERS}")
        if not self.k_list or min(self.k_list) < 1:
            raise ValidationError("k_list needs bundle sizes >= 1")
        if self.stride < 1 or self.folds < 2 or self.threads < 1:
            raise ValidationError("stride and threads must be >= 1, folds >= 2")
        if self.top_k is not None and self.top_k < 0:
            raise ValidationError("top_k must be >= 0")

    @property
    def selection_k(self) -> int:
        if self.top_k is None:
            return 20 if self.approach == "sensor" else 0
        return self.top_k

    def options(self) -> ExtractOptions:
        return ExtractOptions(self.gap_ms, self.tap_move_px, self.tap_max_ms, self.min_samples)

    def resolved(self) -> dict:
        out = asdict(self)
        out["k_list"] = list(self.k_list)
        out["top_k"] = self.selection_k
        out.pop("threads")  # execution detail; results do not depend on it
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        doc = dict(doc)
        if "k_list" in doc:
            doc["k_list"] = tuple(doc["k_list"])
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ValidationError(str(exc)) from None


@dataclass
class KResult:
    k: int
    auc: float | None
    eer: float | None
    n_bundles: int
    n_pos: int
    n_neg: int
    roc: RocCurve | None = None

    def to_dict(self) -> dict:
        return {"k": self.k, "auc": self.auc, "eer": self.eer, "n_bundles": self.n_bundles,
                "n_pos": self.n_pos, "n_neg": self.n_neg}


@dataclass
class EvalReport:
    config: dict
    results: list[KResult]
    folds: list[int]
    n_observations: int
    n_sessions: int
    leakage: dict
    warnings: list[str] = field(default_factory=list)
    extraction: dict = field(default_factory=dict)
    scores: np.ndarray | None = None

    def result(self, k: int) -> KResult:
        for r in self.results:
            if r.k == k:
                return r
        raise KeyError(k)

    def auc_at(self, k: int) -> float | None:
        return self.result(k).auc

    def eer_at(self, k: int) -> float | None:
        return self.result(k).eer

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "results": [r.to_dict() for r in self.results],
            "n_observations": self.n_observations,
            "n_sessions": self.n_sessions,
            "extraction": self.extraction,
            "leakage": self.leakage,
            "warnings": self.warnings,
            "folds": self.folds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def _child_sides(values: Sequence[float], labels: Sequence[int]) -> tuple[list[float], list[float]]:
    pos = [v for v, lab in zip(values, labels) if lab == CHILD]
    neg = [v for v, lab in zip(values, labels) if lab != CHILD]
    return pos, neg


def session_runs(groups: Sequence[str], rows: Sequence[int] | None = None) -> dict[str, list[int]]:
    """Row indices per session, in row (chronological) order."""
    out: dict[str, list[int]] = {}
    for i in range(len(groups)) if rows is None else rows:
        out.setdefault(groups[i], []).append(int(i))
    return out


def bundle_scores(scores, labels, groups, k: int, stride: int = 1, rows=None) -> tuple[list[float], list[int]]:
    """Fused score and label of every k-bundle, session by session."""
    fused, fused_labels = [], []
    for idx in session_runs(groups, rows).values():
        vals = [float(scores[i]) for i in idx]
        for start in range(0, len(vals) - k + 1, stride):
            fused.append(fused_mean(vals[start:start + k]))
            fused_labels.append(int(labels[idx[0]]))
    return fused, fused_labels


def bundle_metrics(scores, labels, groups, k_list: Sequence[int], stride: int = 1,
                   warnings: list[str] | None = None) -> list[KResult]:
    """AUC/EER per bundle size from chronologically ordered scores.

    Works on any scorer's output, including externally produced scores.
    """
    out = []
    for k in k_list:
        fused, labs = bundle_scores(scores, labels, groups, k, stride)
        pos, neg = _child_sides(fused, labs)
        if not pos or not neg:
            msg = f"k={k}: no bundles for {'children' if not pos else 'adults'}; metrics undefined"
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
            out.append(KResult(k, None, None, len(fused), len(pos), len(neg)))
            continue
        roc, eer = roc_and_eer(pos, neg)
        out.append(KResult(k, auc(pos, neg), eer, len(fused), len(pos), len(neg), roc))
    return out


def _per_fold_metrics(scores, table: FeatureTable, assignment, cfg: EvalConfig, warnings) -> list[KResult]:
    out = []
    for k in cfg.k_list:
        aucs, eers, n_b, n_p, n_n = [], [], 0, 0, 0
        for fold in range(cfg.folds):
            _, test = fold_indices(assignment, fold)
            fused, labs = bundle_scores(scores, table.y, table.groups, k, cfg.stride, rows=test)
            pos, neg = _child_sides(fused, labs)
            n_b, n_p, n_n = n_b + len(fused), n_p + len(pos), n_n + len(neg)
            if pos and neg:
                aucs.append(auc(pos, neg))
                eers.append(roc_and_eer(pos, neg)[1])
        if not aucs:
            msg = f"k={k}: no fold has bundles of both classes; metrics undefined"
            log.warning(msg)
            warnings.append(msg)
            out.append(KResult(k, None, None, n_b, n_p, n_n))
        else:
            out.append(KResult(k, float(np.mean(aucs)), float(np.mean(eers)), n_b, n_p, n_n))
    return out


def _fold_seed(seed: int, fold: int, purpose: int) -> int:
    state = np.random.SeedSequence(seed, spawn_key=(fold, purpose)).generate_state(1, np.uint32)
    return int(state[0])


def prepare_table(cfg: EvalConfig, sessions: Sequence[Session], stats: Counter | None = None) -> FeatureTable:
    chosen = filter_age(sessions, cfg.age_filter)
    return extract_table(chosen, cfg.approach, cfg.window_s, cfg.options(), stats)


def evaluate_table(cfg: EvalConfig, table: FeatureTable, trainer: str | Callable | None = None,
                   extraction: dict | None = None) -> EvalReport:
    """Cross-validate a prepared feature table under ``cfg``."""
    if len(set(table.y.tolist())) < 2:
        raise SingleClass("evaluation needs both children and adults")
    trainer = trainer or cfg.classifier
    assignment = kfold_split(table, cfg.folds, cfg.mode, cfg.seed)
    scores = np.full(len(table), np.nan)
    leakage = {"folds_disjoint": True, "selection_train_only": True, "fold_digests": []}
    if cfg.mode == "session":
        leakage["sessions_disjoint"] = True
    k_sel = min(cfg.selection_k, len(table.names))

    def run_fold(fold: int):
        train, test = fold_indices(assignment, fold)
        if not len(test):
            return fold, test, None, None
        if np.intersect1d(train, test).size:
            raise LeakageError(f"fold {fold}: train and test rows overlap")
        if cfg.mode == "session":
            if {table.groups[i] for i in train} & {table.groups[i] for i in test}:
                raise LeakageError(f"fold {fold}: a session spans train and test")
        train_table = table.rows(train)
        if len(set(train_table.y.tolist())) < 2:
            raise SingleClass(f"fold {fold}: training data has one class")
        columns = table.names
        if k_sel:
            # selection only ever receives the training slice
            if len(train_table) != len(train) or np.intersect1d(train, test).size:
                raise LeakageError(f"fold {fold}: feature selection would see test rows")
            mask = select_top_k(train_table, k_sel, seed=_fold_seed(cfg.seed, fold, 0), threads=inner_threads)
            columns = mask.names
            train_table = train_table.columns(columns)
        params = dict(cfg.classifier_params)
        if trainer in ("forest", "tree", "perceptron"):
            params.setdefault("seed", _fold_seed(cfg.seed, fold, 1))
        if trainer == "forest":
            params.setdefault("threads", inner_threads)
        model = train_model(trainer, train_table, **params)
        digests = [index_digest(train), index_digest(test)]
        if k_sel:
            digests.append(index_digest(train))  # rows the selector was fit on
        return fold, test, model.scores(table.rows(test).columns(columns).X), digests

    # parallelise across folds when there are enough of them, else inside the forest
    outer = min(cfg.threads, cfg.folds)
    inner_threads = 1 if outer > 1 else cfg.threads
    if outer > 1:
        with ThreadPoolExecutor(outer) as pool:
            done = list(pool.map(run_fold, range(cfg.folds)))
    else:
        done = [run_fold(f) for f in range(cfg.folds)]
    for fold, test, fold_scores, digests in done:
        if fold_scores is None:
            continue
        scores[test] = fold_scores
        leakage["fold_digests"].append(digests[:2])
        if k_sel:
            leakage["selection_fits"] = leakage.get("selection_fits", 0) + 1
            if digests[2] != digests[0]:
                raise LeakageError(f"fold {fold}: selection fit on rows other than the training fold")
    if any(tr == te for tr, te in leakage["fold_digests"]):
        raise LeakageError("a fold tests on its own training rows")
    if len({te for _, te in leakage["fold_digests"]}) != len(leakage["fold_digests"]):
        raise LeakageError("two folds share a test set")
    if np.isnan(scores).any():
        raise LeakageError("some rows were never held out")

    warnings: list[str] = []
    if cfg.aggregate == "pooled":
        results = bundle_metrics(scores, table.y, table.groups, cfg.k_list, cfg.stride, warnings)
    else:
        results = _per_fold_metrics(scores, table, assignment, cfg, warnings)
    return EvalReport(
        config=cfg.resolved(),
        results=results,
        folds=assignment.tolist(),
        n_observations=len(table),
        n_sessions=len(set(table.groups)),
        leakage=leakage,
        warnings=warnings,
        extraction=dict(sorted((extraction or {}).items())),
        scores=scores,
    )


def evaluate_pipeline(config: EvalConfig | dict, data: Sequence[Session], trainer=None,
                      columns: Sequence[str] | None = None) -> EvalReport:
    """Extract features for ``config.approach`` and cross-validate."""
    cfg = config if isinstance(config, EvalConfig) else EvalConfig.from_dict(config)
    stats: Counter = Counter()
    table = prepare_table(cfg, data, stats)
    if columns is not None:
        table = table.columns(columns)
    return evaluate_table(cfg, table, trainer, dict(stats))


def sweep_window(config: EvalConfig | dict, data: Sequence[Session], n_list: Sequence[float] = tuple(range(1, 21))
                 ) -> list[dict]:
    """One sensor-approach evaluation per window size; one row per (n, k)."""
    cfg = config if isinstance(config, EvalConfig) else EvalConfig.from_dict(config)
    if cfg.approach != "sensor":
        raise ValidationError("window sweep needs the sensor approach")
    rows = []
    for n in n_list:
        report = evaluate_pipeline(replace(cfg, window_s=n), data)
        for r in report.results:
            rows.append({"window_s": n, "k": r.k, "auc": r.auc, "eer": r.eer,
                         "n_observations": report.n_observations, "n_bundles": r.n_bundles})
    return rows


def sweep_csv(rows: Sequence[dict]) -> str:
    lines = ["window_s,k,auc,eer,n_observations,n_bundles"]
    for r in rows:
        lines.append(",".join("" if r[c] is None else repr(r[c]) if isinstance(r[c], float) else str(r[c])
                              for c in ("window_s", "k", "auc", "eer", "n_observations", "n_bundles")))
    return "\n".join(lines) + "\n"


def is_size_feature(name: str) -> bool:
    """Touch-area features: average_size, std_size, start_s, stop_s, LDP_s, size."""
    return "size" in name or name in ("start_s", "stop_s", "LDP_s")


PRESETS: dict[str, Callable[[str], bool]] = {"size": is_size_feature, "all": lambda name: True}


def keep_predicate(keep) -> Callable[[str], bool]:
    """Predicate from a callable, a preset name, a substring or a name list."""
    if callable(keep):
        return keep
    if isinstance(keep, str):
        return PRESETS.get(keep) or (lambda name: keep in name)
    wanted = set(keep)
    return lambda name: name in wanted


def ablate_features(config: EvalConfig | dict, data: Sequence[Session], keep) -> EvalReport:
    """Evaluate on the features whose names pass ``keep``.

    ``keep`` is a predicate, a preset (``"size"`` keeps average_size,
    std_size, start_s, stop_s and LDP_s), a substring or a collection of names.
    """
    cfg = config if isinstance(config, EvalConfig) else EvalConfig.from_dict(config)
    pred = keep_predicate(keep)
    names = [n for n in feature_names(cfg.approach) if pred(n)]
    if not names:
        raise EmptyMask("the keep rule matches no feature")
    report = evaluate_pipeline(cfg, data, columns=names)
    report.config["ablation_features"] = names
    return report


def compare_classifiers(data: Sequence[Session], approach: str, classifiers: Sequence, grid: dict | None = None,
                        folds: int = 10, seed: int = 0, base: EvalConfig | None = None) -> list[dict]:
    """Best single-observation AUC per classifier over its parameter grid."""
    if not classifiers:
        raise ValidationError("no classifiers to compare")
    base = replace(base or EvalConfig(), approach=approach, folds=folds, seed=seed, k_list=(1,))
    stats: Counter = Counter()
    table = prepare_table(base, data, stats)
    grid = grid or {}
    rows = []
    for clf in classifiers:
        name = clf if isinstance(clf, str) else getattr(clf, "__name__", repr(clf))
        param_sets = grid.get(name) or [{}]
        runs = []
        for params in param_sets:
            cfg = replace(base, classifier=name if isinstance(clf, str) else "custom", classifier_params=params)
            report = evaluate_table(cfg, table, clf, dict(stats))
            runs.append({"params": params, "auc": report.auc_at(1), "eer": report.eer_at(1)})
        best = max(runs, key=lambda r: -1.0 if r["auc"] is None else r["auc"])
        rows.append({"classifier": name, "best_auc": best["auc"], "best_params": best["params"], "runs": runs})
    return rows

"""Cross-validation, metrics and the evaluation harness."""

from .cv import MODES, fold_indices, index_digest, kfold_split
from .metrics import RocCurve, auc, eer_from_roc, roc_and_eer, roc_curve, trapezoid_auc
from .pipeline import (
    EvalConfig,
    EvalReport,
    KResult,
    ablate_features,
    bundle_metrics,
    bundle_scores,
    compare_classifiers,
    evaluate_pipeline,
    evaluate_table,
    is_size_feature,
    keep_predicate,
    prepare_table,
    sweep_csv,
    sweep_window,
)

__all__ = [
    "MODES", "fold_indices", "index_digest", "kfold_split",
    "RocCurve", "auc", "eer_from_roc", "roc_and_eer", "roc_curve", "trapezoid_auc",
    "EvalConfig", "EvalReport", "KResult", "ablate_features", "bundle_metrics", "bundle_scores",
    "compare_classifiers", "evaluate_pipeline", "evaluate_table", "is_size_feature", "keep_predicate",
    "prepare_table", "sweep_csv", "sweep_window",
]

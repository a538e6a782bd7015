"""Stratified k-fold assignment at record or session level."""

from __future__ import annotations

import hashlib

import numpy as np

from ..errors import TooFewSamples, ValidationError
from ..table import as_table

MODES = ("record", "session")


def kfold_split(samples, folds: int = 10, mode: str = "record", seed: int = 0) -> np.ndarray:
    """Fold id (0..folds-1) for every row.

    ``record`` mode shuffles each label's rows and deals them round-robin,
    continuing the deal across labels, so fold sizes and per-fold label
    counts each differ by at most one. ``session`` mode keeps a session's
    rows together, placing sessions (largest first, per label) into the
    fold holding the fewest rows of that label.
    """
    table = as_table(samples)
    if folds < 2:
        raise ValidationError("need at least 2 folds")
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}")
    n = len(table)
    rng = np.random.default_rng(seed)
    out = np.full(n, -1, dtype=np.int64)
    if mode == "record":
        if n < folds:
            raise TooFewSamples(f"{n} rows cannot fill {folds} folds")
        order = np.concatenate([rng.permutation(np.flatnonzero(table.y == lab)) for lab in (0, 1)])
        out[order] = np.arange(n) % folds
        return out

    sessions: dict[str, list[int]] = {}
    for i, g in enumerate(table.groups):
        sessions.setdefault(g, []).append(i)
    if len(sessions) < folds:
        raise TooFewSamples(f"{len(sessions)} sessions cannot fill {folds} folds")
    totals = np.zeros(folds, dtype=np.int64)
    for lab in (0, 1):
        ids = []
        for g, rows in sessions.items():
            labs = set(table.y[rows].tolist())
            if len(labs) > 1:
                raise ValidationError(f"session {g} mixes labels")
            if labs == {lab}:
                ids.append(g)
        ids = [ids[i] for i in rng.permutation(len(ids))]
        ids.sort(key=lambda g: -len(sessions[g]))
        per_label = np.zeros(folds, dtype=np.int64)
        for g in ids:
            f = min(range(folds), key=lambda j: (per_label[j], totals[j], j))
            out[sessions[g]] = f
            per_label[f] += len(sessions[g])
            totals[f] += len(sessions[g])
    return out


def fold_indices(assignment: np.ndarray, fold: int) -> tuple[np.ndarray, np.ndarray]:
    test = np.flatnonzero(assignment == fold)
    train = np.flatnonzero(assignment != fold)
    return train, test


def index_digest(index) -> str:
    data = np.asarray(sorted(int(i) for i in index), dtype=np.int64).tobytes()
    return hashlib.sha256(data).hexdigest()[:16]

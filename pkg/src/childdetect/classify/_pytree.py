"""Pure-numpy tree kernel, used when the compiled extension is unavailable.

Same contract and same arithmetic as ``_ctree``; see that module.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
MIN_GAIN = 1e-12


def _splitmix(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def _impurity(c0, c1, criterion):
    n = c0 + c1
    with np.errstate(divide="ignore", invalid="ignore"):
        p0 = c0 / n
        p1 = c1 / n
        if criterion == 0:
            t0 = np.where(c0 > 0, p0 * np.log2(np.where(c0 > 0, p0, 1.0)), 0.0)
            t1 = np.where(c1 > 0, p1 * np.log2(np.where(c1 > 0, p1, 1.0)), 0.0)
            h = (0.0 - t0) - t1
        else:
            h = 1.0 - p0 * p0 - p1 * p1
    return np.where(n > 0, h, 0.0)


def build_tree(X, y, w, mtry, criterion, max_depth, min_leaf, seed):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int8)
    w = np.asarray(w, dtype=np.float64)
    d = X.shape[1]
    samples = np.flatnonzero(w > 0)
    state = int(seed) & _MASK
    feat, thr_out, left, right, c0s, c1s, impr = [], [], [], [], [], [], []
    stack = [(0, len(samples), 0, -1, False)]
    while stack:
        start, end, depth, parent, is_left = stack.pop()
        node = len(feat)
        idx = samples[start:end]
        wy = w[idx]
        # weights are integer counts, so these sums are exact in any order
        c1 = float(np.sum(wy[y[idx] == 1]))
        c0 = float(np.sum(wy[y[idx] == 0]))
        feat.append(-1)
        thr_out.append(0.0)
        left.append(-1)
        right.append(-1)
        c0s.append(c0)
        c1s.append(c1)
        impr.append(0.0)
        if parent >= 0:
            (left if is_left else right)[parent] = node

        tot = c0 + c1
        if not (c0 > 0 and c1 > 0 and tot >= 2 * min_leaf and (max_depth < 0 or depth < max_depth)):
            continue
        imp = float(_impurity(np.float64(c0), np.float64(c1), criterion))

        feats = list(range(d))
        for i in range(mtry):
            state, r = _splitmix(state)
            j = i + r % (d - i)
            feats[i], feats[j] = feats[j], feats[i]
        chosen = sorted(feats[:mtry])

        best_gain, best_f, best_thr, best_nl, best_il, best_ir = 0.0, -1, 0.0, 0.0, 0.0, 0.0
        yi = y[idx]
        for f in chosen:
            vals = X[idx, f]
            order = np.lexsort((idx, vals))
            sv = vals[order]
            if sv[0] == sv[-1]:
                continue
            sw = wy[order]
            sy = yi[order]
            wl0 = np.cumsum(np.where(sy == 0, sw, 0.0))[:-1]
            wl1 = np.cumsum(np.where(sy == 1, sw, 0.0))[:-1]
            nl = wl0 + wl1
            nr = tot - nl
            ok = (sv[:-1] < sv[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
            if not ok.any():
                continue
            pos = np.flatnonzero(ok)
            wl0, wl1, nl, nr = wl0[pos], wl1[pos], nl[pos], nr[pos]
            il = _impurity(wl0, wl1, criterion)
            ir = _impurity(c0 - wl0, c1 - wl1, criterion)
            gain = imp - (nl / tot) * il - (nr / tot) * ir
            k = int(np.argmax(gain))
            if gain[k] > best_gain:
                a, b = sv[pos[k]], sv[pos[k] + 1]
                thr = (a + b) * 0.5
                if thr >= b or thr < a:
                    thr = a
                best_gain, best_f, best_thr = float(gain[k]), f, float(thr)
                best_nl, best_il, best_ir = float(nl[k]), float(il[k]), float(ir[k])

        if best_f < 0 or best_gain <= MIN_GAIN:
            continue
        go_left = X[idx, best_f] <= best_thr
        samples[start:end] = np.concatenate([idx[go_left], idx[~go_left]])
        mid = start + int(go_left.sum())
        feat[node] = best_f
        thr_out[node] = best_thr
        impr[node] = tot * imp - best_nl * best_il - (tot - best_nl) * best_ir
        stack.append((mid, end, depth + 1, node, False))
        stack.append((start, mid, depth + 1, node, True))

    return (
        np.asarray(feat, dtype=np.intp),
        np.asarray(thr_out, dtype=np.float64),
        np.asarray(left, dtype=np.intp),
        np.asarray(right, dtype=np.intp),
        np.column_stack([c0s, c1s]).astype(np.float64).reshape(-1, 2),
        np.asarray(impr, dtype=np.float64),
    )


def apply_tree(X, feature, threshold, left, right):
    X = np.asarray(X, dtype=np.float64)
    node = np.zeros(len(X), dtype=np.intp)
    rows = np.arange(len(X))
    while True:
        f = feature[node]
        inner = f >= 0
        if not inner.any():
            return node
        go = X[rows, np.where(inner, f, 0)] <= threshold[node]
        node = np.where(inner, np.where(go, left[node], right[node]), node)

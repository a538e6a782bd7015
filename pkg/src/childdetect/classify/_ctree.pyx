# distutils: language = c++
"""Compiled tree induction and traversal.

Mirrors ``_pytree`` operation for operation: same node order, same RNG
stream, same impurity arithmetic. Keep the two in sync.
"""

import numpy as np

from libc.math cimport log2
from libcpp.algorithm cimport sort
from libcpp.pair cimport pair
from libcpp.vector cimport vector

ctypedef unsigned long long u64

cdef double MIN_GAIN = 1e-12


cdef struct Frame:
    Py_ssize_t start
    Py_ssize_t end
    int depth
    Py_ssize_t parent
    bint is_left


cdef inline u64 splitmix(u64* state) noexcept nogil:
    state[0] += <u64>0x9E3779B97F4A7C15ULL
    cdef u64 z = state[0]
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double impurity(double c0, double c1, int criterion) noexcept nogil:
    cdef double n = c0 + c1
    cdef double p0, p1, h
    if n <= 0:
        return 0.0
    p0 = c0 / n
    p1 = c1 / n
    if criterion == 0:
        h = 0.0
        if c0 > 0:
            h = h - p0 * log2(p0)
        if c1 > 0:
            h = h - p1 * log2(p1)
        return h
    return 1.0 - p0 * p0 - p1 * p1


def build_tree(const double[:, ::1] X, const signed char[::1] y, const double[::1] w,
               int mtry, int criterion, int max_depth, double min_leaf, u64 seed):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef vector[Py_ssize_t] samples
    cdef vector[Py_ssize_t] feats
    cdef vector[pair[double, Py_ssize_t]] buf
    cdef vector[Frame] stack
    cdef vector[Py_ssize_t] out_feat, out_left, out_right
    cdef vector[double] out_thr, out_c0, out_c1, out_impr
    cdef Frame fr, child
    cdef Py_ssize_t i, j, k, m, f, fi, node, s, tmp, mid, best_f
    cdef double c0, c1, tot, imp, wl0, wl1, nl, nr, gain, best_gain, best_thr, a, b, thr
    cdef double best_nl, best_il, best_ir, il, ir
    cdef u64 state = seed
    cdef bint splittable

    with nogil:
        for i in range(n):
            if w[i] > 0:
                samples.push_back(i)
        buf.resize(samples.size())
        feats.resize(d)
        fr.start = 0
        fr.end = <Py_ssize_t>samples.size()
        fr.depth = 0
        fr.parent = -1
        fr.is_left = False
        stack.push_back(fr)

        while not stack.empty():
            fr = stack.back()
            stack.pop_back()
            node = <Py_ssize_t>out_feat.size()
            c0 = 0.0
            c1 = 0.0
            for k in range(fr.start, fr.end):
                s = samples[k]
                if y[s]:
                    c1 += w[s]
                else:
                    c0 += w[s]
            out_feat.push_back(-1)
            out_thr.push_back(0.0)
            out_left.push_back(-1)
            out_right.push_back(-1)
            out_c0.push_back(c0)
            out_c1.push_back(c1)
            out_impr.push_back(0.0)
            if fr.parent >= 0:
                if fr.is_left:
                    out_left[fr.parent] = node
                else:
                    out_right[fr.parent] = node

            tot = c0 + c1
            splittable = c0 > 0 and c1 > 0 and tot >= 2 * min_leaf and (max_depth < 0 or fr.depth < max_depth)
            if not splittable:
                continue
            imp = impurity(c0, c1, criterion)

            for i in range(d):
                feats[i] = i
            for i in range(mtry):
                j = i + <Py_ssize_t>(splitmix(&state) % <u64>(d - i))
                tmp = feats[i]
                feats[i] = feats[j]
                feats[j] = tmp
            sort(feats.begin(), feats.begin() + mtry)

            m = fr.end - fr.start
            best_gain = 0.0
            best_f = -1
            best_thr = 0.0
            best_il = 0.0
            best_ir = 0.0
            best_nl = 0.0
            for fi in range(mtry):
                f = feats[fi]
                for k in range(m):
                    s = samples[fr.start + k]
                    buf[k].first = X[s, f]
                    buf[k].second = s
                sort(buf.begin(), buf.begin() + m)
                if buf[0].first == buf[m - 1].first:
                    continue
                wl0 = 0.0
                wl1 = 0.0
                for k in range(m - 1):
                    s = buf[k].second
                    if y[s]:
                        wl1 = wl1 + w[s]
                    else:
                        wl0 = wl0 + w[s]
                    if buf[k].first < buf[k + 1].first:
                        nl = wl0 + wl1
                        nr = tot - nl
                        if nl < min_leaf or nr < min_leaf:
                            continue
                        il = impurity(wl0, wl1, criterion)
                        ir = impurity(c0 - wl0, c1 - wl1, criterion)
                        gain = imp - (nl / tot) * il - (nr / tot) * ir
                        if gain > best_gain:
                            a = buf[k].first
                            b = buf[k + 1].first
                            thr = (a + b) * 0.5
                            if thr >= b or thr < a:
                                thr = a
                            best_gain = gain
                            best_f = f
                            best_thr = thr
                            best_nl = nl
                            best_il = il
                            best_ir = ir

            if best_f < 0 or best_gain <= MIN_GAIN:
                continue

            i = fr.start
            j = fr.end - 1
            while i <= j:
                if X[samples[i], best_f] <= best_thr:
                    i += 1
                else:
                    tmp = samples[i]
                    samples[i] = samples[j]
                    samples[j] = tmp
                    j -= 1
            mid = i
            out_feat[node] = best_f
            out_thr[node] = best_thr
            out_impr[node] = tot * imp - best_nl * best_il - (tot - best_nl) * best_ir

            child.depth = fr.depth + 1
            child.parent = node
            child.start = mid
            child.end = fr.end
            child.is_left = False
            stack.push_back(child)
            child.start = fr.start
            child.end = mid
            child.is_left = True
            stack.push_back(child)

    nn = out_feat.size()
    feature = np.empty(nn, dtype=np.intp)
    threshold = np.empty(nn, dtype=np.float64)
    left = np.empty(nn, dtype=np.intp)
    right = np.empty(nn, dtype=np.intp)
    value = np.empty((nn, 2), dtype=np.float64)
    improvement = np.empty(nn, dtype=np.float64)
    cdef Py_ssize_t[::1] fv = feature, lv = left, rv = right
    cdef double[::1] tv = threshold, iv = improvement
    cdef double[:, ::1] vv = value
    for i in range(<Py_ssize_t>nn):
        fv[i] = out_feat[i]
        tv[i] = out_thr[i]
        lv[i] = out_left[i]
        rv[i] = out_right[i]
        vv[i, 0] = out_c0[i]
        vv[i, 1] = out_c1[i]
        iv[i] = out_impr[i]
    return feature, threshold, left, right, value, improvement


def apply_tree(const double[:, ::1] X, const Py_ssize_t[::1] feature, const double[::1] threshold,
               const Py_ssize_t[::1] left, const Py_ssize_t[::1] right):
    """Leaf index reached by each row of X."""
    cdef Py_ssize_t n = X.shape[0], i, node, f
    out = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] ov = out
    with nogil:
        for i in range(n):
            node = 0
            f = feature[0]
            while f >= 0:
                if X[i, f] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
                f = feature[node]
            ov[i] = node
    return out

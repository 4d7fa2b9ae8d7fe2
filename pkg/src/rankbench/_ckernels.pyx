# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Behaviour mirrors ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, isnan, INFINITY

cnp.import_array()


def fold_weighted(ranks, weights):
    cdef const double[:, ::1] R = np.ascontiguousarray(ranks, dtype=np.float64)
    cdef const double[::1] W = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t m = R.shape[0], k = R.shape[1], i, j
    out_rank = np.zeros(k, dtype=np.float64)
    out_weight = np.zeros(k, dtype=np.float64)
    out_count = np.zeros(k, dtype=np.int64)
    cdef double[::1] rank = out_rank
    cdef double[::1] weight = out_weight
    cdef cnp.int64_t[::1] count = out_count
    cdef double[::1] total = np.zeros(k, dtype=np.float64)
    cdef double r, w, wa, s
    cdef cnp.int64_t c
    if W.shape[0] != m:
        raise ValueError("weights length must match number of rankings")
    with nogil:
        for j in range(m):
            w = W[j]
            for i in range(k):
                r = R[j, i]
                if isnan(r):
                    continue
                c = count[i]
                total[i] += r
                if c == 0:
                    rank[i] = r
                    weight[i] = w
                else:
                    wa = weight[i]
                    s = wa + w
                    if s > 0.0:
                        rank[i] = rank[i] * wa / s + r * w / s
                    else:
                        rank[i] = total[i] / <double>(c + 1)
                    weight[i] = s
                count[i] = c + 1
    return out_rank, out_weight, out_count


def loss_curve(accuracy, runtime, order):
    cdef const double[::1] acc = np.ascontiguousarray(accuracy, dtype=np.float64)
    cdef const double[::1] rt = np.ascontiguousarray(runtime, dtype=np.float64)
    cdef const cnp.int64_t[::1] idx = np.ascontiguousarray(order, dtype=np.int64)
    cdef Py_ssize_t n = acc.shape[0], m = idx.shape[0], i, p = 0
    cdef double ideal = -INFINITY, best = 0.0, t = 0.0, prev, loss, a
    cdef cnp.int64_t q
    for i in range(n):
        if not isnan(acc[i]) and acc[i] > ideal:
            ideal = acc[i]
    if ideal == -INFINITY:
        raise ValueError("dataset has no present cells")
    out_t = np.empty(m, dtype=np.float64)
    out_l = np.empty(m, dtype=np.float64)
    cdef double[::1] times = out_t
    cdef double[::1] losses = out_l
    prev = ideal
    for i in range(m):
        q = idx[i]
        if q < 0 or q >= n:
            raise IndexError("algorithm index out of range")
        a = acc[q]
        if isnan(a):
            continue
        t += rt[q]
        if a > best:
            best = a
        loss = ideal - best
        if loss < prev:
            times[p] = t
            losses[p] = loss
            p += 1
            prev = loss
    return out_t[:p].copy(), out_l[:p].copy(), ideal


def interval_mean(times, losses, double initial, double t_min, double t_max, bint log_scale):
    cdef const double[::1] ts = np.ascontiguousarray(times, dtype=np.float64)
    cdef const double[::1] ls = np.ascontiguousarray(losses, dtype=np.float64)
    cdef Py_ssize_t n = ts.shape[0], i
    cdef double base = initial, x_lo, x_hi, cur, prev, acc = 0.0, t, x
    for i in range(n):
        if ts[i] < t_max:
            base = ls[i]
        else:
            break
    if log_scale:
        x_lo = log(t_min)
        x_hi = log(t_max)
    else:
        x_lo = t_min
        x_hi = t_max
    cur = initial
    prev = x_lo
    for i in range(n):
        t = ts[i]
        if t <= t_min:
            cur = ls[i]
            continue
        if t >= t_max:
            break
        x = log(t) if log_scale else t
        acc += (cur - base) * (x - prev)
        cur = ls[i]
        prev = x
    acc += (cur - base) * (x_hi - prev)
    return base + acc / (x_hi - x_lo)

"""Pure-Python inner loops; the reference twin of ``_ckernels.pyx``.

Every function here has an identically named, identically behaving
counterpart in the compiled module. Arithmetic is written in the same
operation order so both backends round the same way.
"""

from __future__ import annotations

import math

import numpy as np


def fold_weighted(ranks, weights):
    """Incremental weighted aggregation of stacked rankings.

    Args:
        ranks: (n_rankings, n_items) float array, ``NaN`` where an item is
            absent from a ranking. Rows are folded in order.
        weights: (n_rankings,) per-ranking weight.

    Returns:
        (rank, weight, count) arrays of length n_items. ``count == 0`` marks
        items never observed; their rank and weight are 0.
    """
    ranks = np.ascontiguousarray(ranks, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    m, k = ranks.shape
    rank = [0.0] * k
    weight = [0.0] * k
    total = [0.0] * k
    count = [0] * k
    rows = ranks.tolist()
    ws = weights.tolist()
    for j in range(m):
        w = ws[j]
        row = rows[j]
        for i in range(k):
            r = row[i]
            if r != r:
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
                    rank[i] = total[i] / (c + 1)
                weight[i] = s
            count[i] = c + 1
    return (
        np.array(rank, dtype=np.float64),
        np.array(weight, dtype=np.float64),
        np.array(count, dtype=np.int64),
    )


def loss_curve(accuracy, runtime, order):
    """Walk ``order`` over one dataset and record best-so-far loss drops.

    Args:
        accuracy, runtime: per-algorithm values on the dataset, ``NaN`` if absent.
        order: algorithm indices in execution order.

    Returns:
        (times, losses, initial_loss). A breakpoint is emitted only when the
        loss strictly decreases; absent algorithms cost no time.
    """
    acc = np.asarray(accuracy, dtype=np.float64).tolist()
    rt = np.asarray(runtime, dtype=np.float64).tolist()
    ideal = -math.inf
    for a in acc:
        if a == a and a > ideal:
            ideal = a
    if ideal == -math.inf:
        raise ValueError("dataset has no present cells")
    best = 0.0
    t = 0.0
    prev = ideal
    times = []
    losses = []
    n = len(acc)
    for idx in np.asarray(order, dtype=np.int64).tolist():
        if idx < 0 or idx >= n:
            raise IndexError("algorithm index out of range")
        a = acc[idx]
        if a != a:
            continue
        t += rt[idx]
        if a > best:
            best = a
        loss = ideal - best
        if loss < prev:
            times.append(t)
            losses.append(loss)
            prev = loss
    return np.array(times, dtype=np.float64), np.array(losses, dtype=np.float64), ideal


def interval_mean(times, losses, initial, t_min, t_max, log_scale):
    """Time-average of a right-continuous step function over [t_min, t_max].

    The function equals ``initial`` before ``times[0]`` and ``losses[i]`` on
    ``[times[i], times[i + 1])``. With ``log_scale`` the average is taken with
    respect to ``ln t``. The value on the last segment is factored out first so
    a constant curve returns its value exactly.
    """
    ts = np.asarray(times, dtype=np.float64).tolist()
    ls = np.asarray(losses, dtype=np.float64).tolist()
    n = len(ts)
    base = initial
    for i in range(n):
        if ts[i] < t_max:
            base = ls[i]
        else:
            break
    if log_scale:
        x_lo = math.log(t_min)
        x_hi = math.log(t_max)
    else:
        x_lo = t_min
        x_hi = t_max
    cur = initial
    prev = x_lo
    acc = 0.0
    for i in range(n):
        t = ts[i]
        if t <= t_min:
            cur = ls[i]
            continue
        if t >= t_max:
            break
        x = math.log(t) if log_scale else t
        acc += (cur - base) * (x - prev)
        cur = ls[i]
        prev = x
    acc += (cur - base) * (x_hi - prev)
    return base + acc / (x_hi - x_lo)

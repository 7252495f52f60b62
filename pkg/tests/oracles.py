"""Brute-force reference implementations used by the tests."""
import itertools

import numpy as np


def monotone_regression(values, weights=None):
    """L2-optimal nondecreasing fit by enumerating every contiguous block partition.

    The optimum is piecewise constant with each block at its weighted mean,
    so scanning all 2^(n-1) partitions whose block means are nondecreasing
    and keeping the smallest squared error gives the exact minimizer.
    """
    v = np.asarray(values, dtype=float)
    w = np.ones(len(v)) if weights is None else np.asarray(weights, dtype=float)
    n = len(v)
    best, best_fit = np.inf, None
    for cuts in itertools.product((0, 1), repeat=n - 1):
        bounds = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [n]
        means = [np.dot(v[a:b], w[a:b]) / w[a:b].sum() for a, b in zip(bounds, bounds[1:])]
        if any(m2 < m1 - 1e-15 for m1, m2 in zip(means, means[1:])):
            continue
        fit = np.concatenate([np.full(b - a, m) for (a, b), m in zip(zip(bounds, bounds[1:]), means)])
        sse = float(np.dot(w, (v - fit) ** 2))
        if sse < best - 1e-15:
            best, best_fit = sse, fit
    return best_fit


def min_cost_threshold(candidates, scores, y, fp, fn):
    """Smallest candidate with the lowest total cost of the rule ``score > t``."""
    best_t, best_c = None, np.inf
    for t in sorted(set(float(c) for c in candidates)):
        pred = scores > t
        c = float(np.sum(np.where(pred & (y == 0), fp, 0.0)) + np.sum(np.where(~pred & (y == 1), fn, 0.0)))
        if c < best_c:
            best_t, best_c = t, c
    return best_t

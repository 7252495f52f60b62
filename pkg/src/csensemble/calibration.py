"""Leaf probability estimators for trees and score calibrators for boosted ensembles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tree import NodeStats, Tree

LEAF_KINDS = (
    "frequency", "laplace", "m_estimation",
    "curtailment", "curtailment+laplace", "curtailment+m_estimation",
)
SCORE_KINDS = ("none", "logistic_correction", "platt", "isotonic")


def default_m(base_rate: float) -> int:
    """Smallest ``m`` with ``base_rate * m >= 10``."""
    if base_rate <= 0:
        return 1
    return max(1, math.ceil(10.0 / base_rate - 1e-9))


@dataclass(frozen=True)
class LeafEstimator:
    """Rule turning leaf statistics into a positive-class probability.

    ``m`` defaults to ``default_m(base_rate)`` when left as ``None``; the
    same ``m`` is the minimum node size for curtailment. With
    ``use_weights`` the estimator reads weight-scaled counts
    ``n * W+/W`` instead of raw counts (experimental: calibration of
    weighted probabilities is not well founded).
    """

    kind: str = "frequency"
    base_rate: float = 0.5
    m: int | None = None
    use_weights: bool = False

    def __post_init__(self):
        if self.kind not in LEAF_KINDS:
            raise ValueError(f"unknown leaf estimator {self.kind!r}")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be at least 1")
        if not 0.0 <= self.base_rate <= 1.0:
            raise ValueError("base_rate must lie in [0, 1]")

    @property
    def m_value(self) -> int:
        return self.m if self.m is not None else default_m(self.base_rate)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base_rate": self.base_rate, "m": self.m, "use_weights": self.use_weights}

    @classmethod
    def from_dict(cls, d: dict) -> "LeafEstimator":
        return cls(d["kind"], d["base_rate"], d["m"], d["use_weights"])


def _counts(s: NodeStats, use_weights: bool) -> tuple[float, float]:
    if use_weights and s.w > 0:
        return s.n * s.w_pos / s.w, float(s.n)
    return float(s.n_pos), float(s.n)


def _base_estimate(n_pos: float, n: float, kind: str, base_rate: float, m: int) -> float:
    if kind == "frequency":
        if n == 0:
            raise ValueError("frequency estimate of an empty node is undefined")
        return n_pos / n
    if kind == "laplace":
        return (n_pos + 1.0) / (n + 2.0)
    return (n_pos + base_rate * m) / (n + m)


def leaf_probability(stats: NodeStats, ancestors: Sequence[NodeStats], est: LeafEstimator) -> float:
    """Positive-class probability at a node.

    ``ancestors`` lists the strict ancestors nearest first. Curtailment
    replaces a node holding fewer than ``m`` records by its nearest ancestor
    holding at least ``m`` (the root if none does), then applies the base
    estimator (frequency unless combined with Laplace or m-estimation).
    """
    m = est.m_value
    kind = est.kind
    if kind.startswith("curtailment"):
        chosen = stats
        if stats.n < m:
            chosen = ancestors[-1] if ancestors else stats
            for a in ancestors:
                if a.n >= m:
                    chosen = a
                    break
        stats = chosen
        kind = kind.partition("+")[2] or "frequency"
    n_pos, n = _counts(stats, est.use_weights)
    return _base_estimate(n_pos, n, kind, est.base_rate, m)


def tree_node_probabilities(tree: Tree, est: LeafEstimator) -> np.ndarray:
    """``leaf_probability`` evaluated at every node of ``tree``."""
    stats = [tree.node_stats(i) for i in range(tree.n_nodes)]
    out = np.empty(tree.n_nodes)
    for i in range(tree.n_nodes):
        if tree.feature[i] >= 0:
            out[i] = np.nan
            continue
        out[i] = leaf_probability(stats[i], [stats[a] for a in tree.ancestors(i)], est)
    return out


def weighted_leaf_probabilities(tree: Tree) -> np.ndarray:
    """Weighted frequency ``W+/W`` at every node (0.5 where the node has no weight)."""
    w = tree.stats[:, 2] + tree.stats[:, 3]
    return np.where(w > 0, tree.stats[:, 2] / np.where(w > 0, w, 1.0), 0.5)


# ---------------------------------------------------------------------------
# score calibration

def logistic_correction(S):
    """Map a normalized vote score in [0, 1] to ``1 / (exp(-2(2S - 1)) + 1)``."""
    S = np.asarray(S, dtype=np.float64)
    out = 1.0 / (np.exp(-2.0 * (2.0 * S - 1.0)) + 1.0)
    return float(out) if out.ndim == 0 else out


def platt_targets(n_pos: int, n_neg: int) -> tuple[float, float]:
    """Soft targets replacing labels 1 and 0 in Platt scaling."""
    return (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0)


def platt_fit(scores, labels, max_iter: int = 100, tol: float = 1e-10) -> tuple[float, float]:
    """Fit ``P(S) = 1 / (exp(A*S + B) + 1)`` by damped Newton on cross-entropy to soft targets.

    Returns ``(A, B)``. Raises if ``labels`` hold a single class.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    n_pos = int((y == 1).sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("Platt scaling needs both classes in the fitting set")
    t_pos, t_neg = platt_targets(n_pos, n_neg)
    t = np.where(y == 1, t_pos, t_neg)
    if np.ptp(s) == 0:
        # no signal: intercept-only fit at the mean soft target
        p = float(t.mean())
        return 0.0, math.log((1.0 - p) / p)

    def objective(A, B):
        f = A * s + B
        # cross-entropy written stably in terms of f
        return float(np.sum(t * f + np.logaddexp(0.0, -f)))

    A, B = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))
    fval = objective(A, B)
    for _ in range(max_iter):
        f = A * s + B
        p = np.exp(-np.logaddexp(0.0, f))  # 1 / (1 + e^f)
        d1 = t - p
        grad = np.array([np.dot(s, d1), d1.sum()])
        if np.abs(grad).max() < tol:
            break
        q = p * (1.0 - p)
        H = np.array([[np.dot(s * s, q), np.dot(s, q)], [np.dot(s, q), q.sum()]])
        H[0, 0] += 1e-12
        H[1, 1] += 1e-12
        step = -np.linalg.lstsq(H, grad, rcond=None)[0]
        lam = 1.0
        while lam >= 1e-10:
            nA, nB = A + lam * step[0], B + lam * step[1]
            nf = objective(nA, nB)
            if nf < fval + 1e-4 * lam * float(np.dot(grad, step)):
                A, B, fval = nA, nB, nf
                break
            lam /= 2.0
        else:
            break
    return float(A), float(B)


def platt_apply(A: float, B: float, S):
    S = np.asarray(S, dtype=np.float64)
    out = np.exp(-np.logaddexp(0.0, A * S + B))
    return float(out) if out.ndim == 0 else out


def pav(values, weights=None) -> tuple[np.ndarray, np.ndarray]:
    """Pool adjacent violators on an ordered sequence.

    Returns ``(levels, sizes)`` of the final blocks: levels are nondecreasing
    weighted means, sizes count the input positions in each block.
    """
    v = np.asarray(values, dtype=np.float64)
    w = np.ones(len(v)) if weights is None else np.asarray(weights, dtype=np.float64)
    lev, wt, size = [], [], []
    for vi, wi in zip(v, w):
        lev.append(vi)
        wt.append(wi)
        size.append(1)
        while len(lev) > 1 and lev[-2] > lev[-1]:
            tw = wt[-2] + wt[-1]
            merged = (lev[-2] * wt[-2] + lev[-1] * wt[-1]) / tw
            sz = size[-2] + size[-1]
            del lev[-1], wt[-1], size[-1]
            lev[-1], wt[-1], size[-1] = merged, tw, sz
    return np.array(lev), np.array(size, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class ScoreCalibrator:
    """Fitted map from a normalized vote score ``S`` to a probability."""

    kind: str = "none"
    A: float = 0.0
    B: float = 0.0
    breakpoints: tuple[float, ...] = ()
    levels: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in SCORE_KINDS:
            raise ValueError(f"unknown score calibrator {self.kind!r}")

    def __call__(self, S):
        if self.kind == "none":
            S = np.asarray(S, dtype=np.float64)
            return float(S) if S.ndim == 0 else S
        if self.kind == "logistic_correction":
            return logistic_correction(S)
        if self.kind == "platt":
            return platt_apply(self.A, self.B, S)
        return isotonic_apply(self, S)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "A": self.A, "B": self.B,
            "breakpoints": list(self.breakpoints), "levels": list(self.levels),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreCalibrator":
        return cls(d["kind"], d["A"], d["B"], tuple(d["breakpoints"]), tuple(d["levels"]))


def isotonic_fit(scores, labels) -> ScoreCalibrator:
    """Isotonic (PAV) calibration.

    Records sharing a score form one initial block. Each final block is
    stored as its smallest score (breakpoint) and its mean label (level).
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if s.size == 0:
        raise ValueError("isotonic calibration needs at least one record")
    uniq, inverse, counts = np.unique(s, return_inverse=True, return_counts=True)
    means = np.bincount(inverse, weights=y) / counts
    levels, sizes = pav(means, counts)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    return ScoreCalibrator("isotonic", breakpoints=tuple(uniq[starts].tolist()), levels=tuple(levels.tolist()))


def isotonic_apply(cal: ScoreCalibrator, S):
    """Level of the block whose score interval contains ``S`` (clamped at both ends)."""
    S = np.asarray(S, dtype=np.float64)
    bp = np.asarray(cal.breakpoints)
    lv = np.asarray(cal.levels)
    k = np.clip(np.searchsorted(bp, S, side="right") - 1, 0, len(lv) - 1)
    out = lv[k]
    return float(out) if out.ndim == 0 else out


def fit_score_calibrator(kind: str, scores=None, labels=None) -> ScoreCalibrator:
    if kind in ("none", "logistic_correction"):
        return ScoreCalibrator(kind)
    if kind == "platt":
        A, B = platt_fit(scores, labels)
        return ScoreCalibrator("platt", A, B)
    if kind == "isotonic":
        return isotonic_fit(scores, labels)
    raise ValueError(f"unknown score calibrator {kind!r}")

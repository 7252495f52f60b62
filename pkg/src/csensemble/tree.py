"""Binary decision trees: impurity- and cost-based growing, weighted training, pruning."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .data import CostModel, Dataset

SPLIT_CRITERIA = ("gini_gain", "gain_ratio", "cost_gain")
LABELINGS = ("auto", "majority", "weight-majority", "cost-threshold")
ATTRIBUTE_MODES = ("all", "per_tree", "per_split")
PRUNE_METHODS = ("none", "cost_complexity", "reduced_error", "cost_complexity_cost", "reduced_cost")

# gains closer than this (relative) are treated as ties
_GAIN_TOL = 1e-12


@dataclass(frozen=True)
class NodeStats:
    """Counts, summed weights and summed record costs at a tree node."""

    n_pos: int = 0
    n_neg: int = 0
    w_pos: float = 0.0
    w_neg: float = 0.0
    sum_fn_cost: float = 0.0
    sum_fp_cost: float = 0.0

    @property
    def n(self) -> int:
        return self.n_pos + self.n_neg

    @property
    def w(self) -> float:
        return self.w_pos + self.w_neg

    def __add__(self, other: "NodeStats") -> "NodeStats":
        return NodeStats(*(a + b for a, b in zip(self.astuple(), other.astuple())))

    def astuple(self):
        return (self.n_pos, self.n_neg, self.w_pos, self.w_neg, self.sum_fn_cost, self.sum_fp_cost)


@dataclass(frozen=True)
class TreeConfig:
    """Growing and pruning options.

    ``max_depth`` counts node levels, so ``max_depth=2`` is a stump with a
    single split. ``k`` is the attribute subset size for the random modes;
    ``None`` picks ``floor(sqrt(d))`` per split and ``ceil(d / 2)`` per tree.
    """

    split_criterion: str = "gini_gain"
    labeling: str = "auto"
    min_node_size: int = 1
    max_depth: int | None = None
    attribute_mode: str = "all"
    k: int | None = None
    prune: str = "none"
    seed: int = 0

    def __post_init__(self):
        if self.split_criterion not in SPLIT_CRITERIA:
            raise ValueError(f"unknown split criterion {self.split_criterion!r}")
        if self.labeling not in LABELINGS:
            raise ValueError(f"unknown labeling {self.labeling!r}")
        if self.attribute_mode not in ATTRIBUTE_MODES:
            raise ValueError(f"unknown attribute mode {self.attribute_mode!r}")
        if self.prune not in PRUNE_METHODS:
            raise ValueError(f"unknown pruning method {self.prune!r}")
        if self.min_node_size < 1:
            raise ValueError("min_node_size must be at least 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be at least 1")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "TreeConfig":
        return cls(**d)


# ---------------------------------------------------------------------------
# split criteria

def _gini(p, n):
    tot = p + n
    with np.errstate(invalid="ignore", divide="ignore"):
        pp = np.where(tot > 0, p / np.where(tot > 0, tot, 1), 0.0)
    return np.where(tot > 0, 1.0 - pp ** 2 - (1.0 - pp) ** 2, 0.0)


def _entropy(p, n):
    tot = p + n
    safe = np.where(tot > 0, tot, 1)
    out = np.zeros(np.broadcast(p, n).shape)
    for part in (p, n):
        q = part / safe
        with np.errstate(divide="ignore", invalid="ignore"):
            out = out - np.where(q > 0, q * np.log2(np.where(q > 0, q, 1)), 0.0)
    return np.where(tot > 0, out, 0.0)


def _gini_gain_binary(P, N, lp, ln):
    # size-weighted child gini is 2 p n / ((p + n) T); empty children add 0
    rp, rn = P - lp, N - ln
    T = P + N
    lt, rt = lp + ln, rp + rn
    with np.errstate(invalid="ignore", divide="ignore"):
        child = np.where(lt > 0, lp * ln / lt, 0.0) + np.where(rt > 0, rp * rn / rt, 0.0)
    return _gini(P, N) - 2.0 * child / T


def _gain_ratio_binary(P, N, lp, ln):
    rp, rn = P - lp, N - ln
    T = P + N
    fl, fr = (lp + ln) / T, (rp + rn) / T
    gain = _entropy(P, N) - fl * _entropy(lp, ln) - fr * _entropy(rp, rn)
    split_info = _entropy(lp + ln, rp + rn)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(split_info > 0, gain / np.where(split_info > 0, split_info, 1), 0.0)


def _node_cost(sum_fn, sum_fp):
    # a node is labelled positive iff sum_fn > sum_fp, i.e. P_t+ > T_cs for
    # class-dependent costs; its cost is that of the records it misclassifies
    return np.where(sum_fn > sum_fp, sum_fp, sum_fn)


def _cost_gain_binary(FN, FP, lfn, lfp):
    return _node_cost(FN, FP) - _node_cost(lfn, lfp) - _node_cost(FN - lfn, FP - lfp)


def _masses(s: NodeStats, weighted: bool):
    return (s.w_pos, s.w_neg) if weighted else (float(s.n_pos), float(s.n_neg))


def _check_partition(parent: NodeStats, children: Sequence[NodeStats]):
    if parent.n == 0:
        raise ValueError("parent node is empty")
    if sum(c.n_pos for c in children) != parent.n_pos or sum(c.n_neg for c in children) != parent.n_neg:
        raise ValueError("children do not partition the parent")


def gini_gain(parent: NodeStats, children: Sequence[NodeStats], weighted: bool = False) -> float:
    """CART gain: parent Gini impurity minus the size-weighted child impurities."""
    _check_partition(parent, children)
    P, N = _masses(parent, weighted)
    T = P + N
    out = float(_gini(P, N))
    for c in children:
        p, n = _masses(c, weighted)
        if p + n > 0:
            out -= (p + n) / T * float(_gini(p, n))
    return out


def gain_ratio(parent: NodeStats, children: Sequence[NodeStats], weighted: bool = False) -> float:
    """C4.5 gain ratio: information gain over split information, in bits."""
    _check_partition(parent, children)
    if sum(1 for c in children if c.n > 0) < 2:
        raise ValueError("gain ratio needs at least two nonempty children (split information is zero)")
    P, N = _masses(parent, weighted)
    T = P + N
    gain = float(_entropy(P, N))
    split_info = 0.0
    for c in children:
        p, n = _masses(c, weighted)
        f = (p + n) / T
        if f > 0:
            gain -= f * float(_entropy(p, n))
            split_info -= f * math.log2(f)
    return gain / split_info


def node_cost(stats: NodeStats) -> float:
    """Misclassification cost of a node under minimum-expected-cost labelling."""
    return float(_node_cost(stats.sum_fn_cost, stats.sum_fp_cost))


def cost_gain(parent: NodeStats, children: Sequence[NodeStats]) -> float:
    """Cost reduction of a split: parent cost minus the children's costs."""
    if parent.n == 0:
        raise ValueError("parent node is empty")
    return node_cost(parent) - sum(node_cost(c) for c in children)


# ---------------------------------------------------------------------------
# tree structure

@dataclass(frozen=True, eq=False)
class Tree:
    """Flat-array decision tree.

    Node ``i`` is a leaf when ``feature[i] == -1``. Numeric splits send
    ``x <= threshold`` left; categorical splits send ``x == threshold`` (a
    category code) left and every other category right.
    """

    feature: np.ndarray
    threshold: np.ndarray
    is_cat: np.ndarray
    left: np.ndarray
    right: np.ndarray
    parent: np.ndarray
    label: np.ndarray
    stats: np.ndarray  # (n_nodes, 6) columns as NodeStats.astuple()
    n_features: int
    weighted: bool = False
    seen_categories: dict = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature < 0

    @property
    def n_leaves(self) -> int:
        return int(self.is_leaf.sum())

    def node_stats(self, i: int) -> NodeStats:
        s = self.stats[i]
        return NodeStats(int(s[0]), int(s[1]), float(s[2]), float(s[3]), float(s[4]), float(s[5]))

    def ancestors(self, i: int) -> list[int]:
        """Strict ancestors of node ``i``, nearest first."""
        out = []
        p = int(self.parent[i])
        while p >= 0:
            out.append(p)
            p = int(self.parent[p])
        return out

    def depth(self) -> int:
        d = np.zeros(self.n_nodes, dtype=int)
        for i in range(1, self.n_nodes):
            d[i] = d[self.parent[i]] + 1
        return int(d.max()) + 1

    def apply(self, X) -> np.ndarray:
        """Index of the leaf reached by every row of ``X``."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.flatnonzero(self.feature[node] >= 0)
        while rows.size:
            nd = node[rows]
            f = self.feature[nd]
            x = X[rows, f]
            thr = self.threshold[nd]
            cat = self.is_cat[nd]
            go_left = np.where(cat, x == thr, x <= thr)
            if cat.any():
                go_left = self._route_unseen(go_left, cat, f, x, nd)
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])
            rows = rows[self.feature[node[rows]] >= 0]
        return node

    def _route_unseen(self, go_left, cat, f, x, nd):
        # a category never seen in training follows the larger child (tie: left)
        go_left = go_left.copy()
        for feat in np.unique(f[cat]):
            seen = self.seen_categories.get(int(feat), ())
            sel = cat & (f == feat) & ~np.isin(x, np.asarray(seen, dtype=np.float64))
            if sel.any():
                n_left = self.stats[self.left[nd[sel]], :2].sum(axis=1)
                n_right = self.stats[self.right[nd[sel]], :2].sum(axis=1)
                go_left[sel] = n_left >= n_right
        return go_left

    def predict(self, X) -> np.ndarray:
        return self.label[self.apply(X)].astype(np.int8)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "is_cat": self.is_cat.astype(int).tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "parent": self.parent.tolist(),
            "label": self.label.astype(int).tolist(),
            "stats": self.stats.tolist(),
            "n_features": self.n_features,
            "weighted": self.weighted,
            "seen_categories": {str(k): list(v) for k, v in sorted(self.seen_categories.items())},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        stats = np.array(d["stats"], dtype=np.float64).reshape(-1, 6)
        return cls(
            np.array(d["feature"], dtype=np.int64),
            np.array(d["threshold"], dtype=np.float64),
            np.array(d["is_cat"], dtype=bool),
            np.array(d["left"], dtype=np.int64),
            np.array(d["right"], dtype=np.int64),
            np.array(d["parent"], dtype=np.int64),
            np.array(d["label"], dtype=np.int8),
            stats,
            int(d["n_features"]),
            bool(d["weighted"]),
            {int(k): tuple(float(c) for c in v) for k, v in d["seen_categories"].items()},
        )


def predict_leaf(tree: Tree, record) -> tuple[int, NodeStats]:
    """Route one feature vector to its leaf; return the leaf label and stats."""
    leaf = int(tree.apply(np.asarray(record, dtype=np.float64).reshape(1, -1))[0])
    return int(tree.label[leaf]), tree.node_stats(leaf)


def _label_rule(config: TreeConfig, weighted: bool) -> str:
    if config.labeling != "auto":
        return config.labeling
    if config.split_criterion == "cost_gain":
        return "cost-threshold"
    return "weight-majority" if weighted else "majority"


def _label(s, rule: str) -> int:
    # ties predict negative
    if rule == "majority":
        return int(s[0] > s[1])
    if rule == "weight-majority":
        return int(s[2] > s[3])
    return int(s[4] > s[5])


def _resolve_k(config: TreeConfig, d: int) -> int:
    if config.attribute_mode == "all":
        return d
    if config.k is not None:
        if config.k > d:
            raise ValueError(f"k={config.k} exceeds the {d} available attributes")
        return config.k
    if config.attribute_mode == "per_split":
        return max(1, int(math.floor(math.sqrt(d))))
    return max(1, int(math.ceil(d / 2)))


class _Grower:
    def __init__(self, data: Dataset, weights, config: TreeConfig, cost_model, rng):
        n = len(data)
        self.X = data.X
        self.y = data.y
        self.cat = np.asarray(data.categorical, dtype=bool)
        self.config = config
        self.weighted = weights is not None
        w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
        if w.shape != (n,):
            raise ValueError("weights must cover every record")
        pos = self.y == 1
        self.cols = np.empty((n, 6))
        self.cols[:, 0] = pos
        self.cols[:, 1] = ~pos
        self.cols[:, 2] = np.where(pos, w, 0.0)
        self.cols[:, 3] = np.where(pos, 0.0, w)
        if cost_model is not None:
            c = cost_model.record_costs(data)
            self.cols[:, 4] = np.where(pos, c, 0.0)
            self.cols[:, 5] = np.where(pos, 0.0, c)
        elif config.split_criterion == "cost_gain" or config.labeling == "cost-threshold":
            raise ValueError("cost-based splitting or labelling needs a cost model")
        else:
            self.cols[:, 4:] = 0.0
        self.rule = _label_rule(config, self.weighted)
        self.rng = rng
        d = data.n_features
        self.k = _resolve_k(config, d)
        self.tree_attrs = np.arange(d)
        if config.attribute_mode == "per_tree":
            self.tree_attrs = np.sort(rng.choice(d, self.k, replace=False))

    def candidate_attrs(self):
        if self.config.attribute_mode == "per_split":
            return np.sort(self.rng.choice(len(self.cat), self.k, replace=False))
        return self.tree_attrs

    def gains(self, tot, left):
        """Criterion value for every candidate left-child stats row."""
        crit = self.config.split_criterion
        if crit == "cost_gain":
            return _cost_gain_binary(tot[4], tot[5], left[:, 4], left[:, 5])
        if self.weighted:
            P, N, lp, ln = tot[2], tot[3], left[:, 2], left[:, 3]
        else:
            P, N, lp, ln = tot[0], tot[1], left[:, 0], left[:, 1]
        if crit == "gini_gain":
            return _gini_gain_binary(P, N, lp, ln)
        return _gain_ratio_binary(P, N, lp, ln)

    def best_split(self, idx, tot):
        best = None  # (gain, attr, threshold)
        cols = self.cols[idx]
        for j in self.candidate_attrs():
            x = self.X[idx, j]
            if self.cat[j]:
                codes = x.astype(np.int64)
                K = int(codes.max()) + 1
                left = np.stack([np.bincount(codes, cols[:, c], minlength=K) for c in range(6)], axis=1)
                cnt = left[:, 0] + left[:, 1]
                ok = (cnt > 0) & (cnt < len(idx))
                thr = np.flatnonzero(ok).astype(np.float64)
                left = left[ok]
            else:
                order = np.argsort(x, kind="stable")
                xs = x[order]
                cut = np.flatnonzero(xs[:-1] < xs[1:])
                if cut.size == 0:
                    continue
                csum = np.cumsum(cols[order], axis=0)
                left = csum[cut]
                thr = (xs[cut] + xs[cut + 1]) / 2.0
            if thr.size == 0:
                continue
            g = self.gains(tot, left)
            gmax = g.max()
            pick = int(np.flatnonzero(g >= gmax - _GAIN_TOL * max(1.0, abs(gmax)))[0])
            cand = (float(g[pick]), int(j), float(thr[pick]))
            if best is None or cand[0] > best[0] + _GAIN_TOL * max(1.0, abs(best[0])):
                best = cand
        return best

    def grow(self) -> Tree:
        n = len(self.y)
        feature, threshold, is_cat, left, right, parent, label, stats = ([] for _ in range(8))

        def new_node(idx, par):
            s = self.cols[idx].sum(axis=0)
            feature.append(-1)
            threshold.append(0.0)
            is_cat.append(False)
            left.append(-1)
            right.append(-1)
            parent.append(par)
            label.append(_label(s, self.rule))
            stats.append(s)
            return len(feature) - 1

        root = new_node(np.arange(n), -1)
        stack = [(root, np.arange(n), 1)]
        cfg = self.config
        while stack:
            node, idx, depth = stack.pop()
            s = stats[node]
            if s[0] == 0 or s[1] == 0:
                continue
            if len(idx) < max(2, cfg.min_node_size):
                continue
            if cfg.max_depth is not None and depth >= cfg.max_depth:
                continue
            found = self.best_split(idx, s)
            if found is None or found[0] <= _GAIN_TOL * max(1.0, abs(found[0])):
                continue
            _, j, thr = found
            x = self.X[idx, j]
            mask = (x == thr) if self.cat[j] else (x <= thr)
            li, ri = idx[mask], idx[~mask]
            feature[node], threshold[node], is_cat[node] = j, thr, bool(self.cat[j])
            lnode = new_node(li, node)
            rnode = new_node(ri, node)
            left[node], right[node] = lnode, rnode
            # right pushed first so the left subtree is numbered first
            stack.append((rnode, ri, depth + 1))
            stack.append((lnode, li, depth + 1))

        seen = {}
        for j in np.flatnonzero(self.cat):
            seen[int(j)] = tuple(float(v) for v in np.unique(self.X[:, j]))
        return Tree(
            np.array(feature, dtype=np.int64), np.array(threshold, dtype=np.float64),
            np.array(is_cat, dtype=bool), np.array(left, dtype=np.int64),
            np.array(right, dtype=np.int64), np.array(parent, dtype=np.int64),
            np.array(label, dtype=np.int8), np.array(stats, dtype=np.float64).reshape(-1, 6),
            self.X.shape[1], self.weighted, seen,
        )


def grow_tree(
    data: Dataset,
    weights=None,
    config: TreeConfig = TreeConfig(),
    cost_model: CostModel | None = None,
    rng: np.random.Generator | None = None,
) -> Tree:
    """Grow a tree greedily.

    Candidate numeric thresholds are midpoints between consecutive distinct
    values. Ties between equally good splits go to the lowest attribute
    index, then the lowest threshold. Growing stops on pure nodes, nodes
    smaller than ``min_node_size``, ``max_depth``, or a non-positive best
    gain. Passing ``weights`` switches to weighted training: weighted class
    probabilities in the criterion and weight-majority leaf labels.

    ``cost_model`` supplies the summed record costs kept in every node; it is
    required for ``cost_gain`` and ``cost-threshold`` labelling.
    """
    if len(data) == 0:
        raise ValueError("cannot grow a tree on an empty dataset")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    return _Grower(data, weights, config, cost_model, rng).grow()


# ---------------------------------------------------------------------------
# pruning

def _compact(tree: Tree, collapsed: Iterable[int]) -> Tree:
    """Copy of ``tree`` with every node in ``collapsed`` turned into a leaf."""
    collapsed = set(int(c) for c in collapsed)
    old_ids = []
    stack = [0]
    while stack:
        i = stack.pop()
        old_ids.append(i)
        if tree.feature[i] >= 0 and i not in collapsed:
            stack.append(int(tree.right[i]))
            stack.append(int(tree.left[i]))
    new_of = {o: k for k, o in enumerate(old_ids)}
    old = np.array(old_ids, dtype=np.int64)
    keep_split = np.array([tree.feature[o] >= 0 and o not in collapsed for o in old_ids], dtype=bool)
    def remap(arr):
        return np.array([new_of[int(v)] if k and v >= 0 else -1 for v, k in zip(arr, keep_split)],
                        dtype=np.int64)

    parent = np.array([new_of[int(p)] if p >= 0 else -1 for p in tree.parent[old]], dtype=np.int64)
    return Tree(
        np.where(keep_split, tree.feature[old], -1),
        np.where(keep_split, tree.threshold[old], 0.0),
        tree.is_cat[old] & keep_split,
        remap(tree.left[old]),
        remap(tree.right[old]),
        parent,
        tree.label[old].copy(),
        tree.stats[old].copy(),
        tree.n_features,
        tree.weighted,
        dict(tree.seen_categories),
    )


def _training_loss(tree: Tree, use_cost: bool) -> np.ndarray:
    s, lab = tree.stats, tree.label == 1
    if use_cost:
        return np.where(lab, s[:, 5], s[:, 4])
    if tree.weighted:
        return np.where(lab, s[:, 3], s[:, 2]) / (s[0, 2] + s[0, 3])
    return np.where(lab, s[:, 1], s[:, 0]) / (s[0, 0] + s[0, 1])


def _validation_loss(tree: Tree, valid: Dataset, use_cost: bool, cost_model, weights=None) -> np.ndarray:
    """Loss each node would incur on the validation records reaching it if it were a leaf."""
    if use_cost:
        per_record = cost_model.record_costs(valid)
    elif weights is not None:
        per_record = np.asarray(weights, dtype=np.float64)
    else:
        per_record = np.ones(len(valid))
    X, y = valid.X, valid.y
    loss = np.zeros(tree.n_nodes)
    node = np.zeros(len(valid), dtype=np.int64)
    rows = np.arange(len(valid))
    while rows.size:
        nd = node[rows]
        wrong = tree.label[nd] != y[rows]
        np.add.at(loss, nd, np.where(wrong, per_record[rows], 0.0))
        inner = tree.feature[nd] >= 0
        rows, nd = rows[inner], nd[inner]
        if not rows.size:
            break
        x = X[rows, tree.feature[nd]]
        cat = tree.is_cat[nd]
        go_left = np.where(cat, x == tree.threshold[nd], x <= tree.threshold[nd])
        if cat.any():
            go_left = tree._route_unseen(go_left, cat, tree.feature[nd], x, nd)
        node[rows] = np.where(go_left, tree.left[nd], tree.right[nd])
    return loss


def _subtree_sums(tree: Tree, collapsed: set, leaf_value: np.ndarray):
    """Per node: (sum of leaf_value over its current leaves, number of current leaves)."""
    total = np.zeros(tree.n_nodes)
    leaves = np.zeros(tree.n_nodes, dtype=np.int64)
    # children always have larger indices than their parent
    for i in range(tree.n_nodes - 1, -1, -1):
        if tree.feature[i] < 0 or i in collapsed:
            total[i], leaves[i] = leaf_value[i], 1
        else:
            l, r = tree.left[i], tree.right[i]
            total[i], leaves[i] = total[l] + total[r], leaves[l] + leaves[r]
    return total, leaves


def _reachable_internal(tree: Tree, collapsed: set) -> list[int]:
    out, stack = [], [0]
    while stack:
        i = stack.pop()
        if tree.feature[i] >= 0 and i not in collapsed:
            out.append(i)
            stack.extend((int(tree.left[i]), int(tree.right[i])))
    return out


def cost_complexity_sequence(tree: Tree, use_cost: bool = False) -> list[tuple[float, frozenset]]:
    """Weakest-link pruning sequence as ``(alpha, collapsed node set)`` pairs.

    The first member is the smallest subtree with the full tree's training
    loss; the last is the root alone.
    """
    R = _training_loss(tree, use_cost)
    collapsed: set = set()
    seq = [(0.0, frozenset())]
    while True:
        internal = _reachable_internal(tree, collapsed)
        if not internal:
            break
        sub, nleaf = _subtree_sums(tree, collapsed, R)
        ids = np.array(internal)
        g = (R[ids] - sub[ids]) / (nleaf[ids] - 1)
        alpha = max(float(g.min()), 0.0)
        tol = 1e-12 * max(1.0, abs(alpha))
        collapsed |= {int(i) for i in ids[g <= alpha + tol]}
        seq.append((alpha, frozenset(collapsed)))
    if len(seq) > 1 and seq[1][0] <= 1e-12:
        seq = seq[1:]
    return seq


def prune(
    tree: Tree,
    method: str,
    validation: Dataset | None = None,
    cost_model: CostModel | None = None,
    validation_weights=None,
) -> Tree:
    """Prune ``tree`` and return the pruned copy.

    ``cost_complexity`` picks the member of the weakest-link sequence with
    the lowest validation loss (ties: the smaller tree). ``reduced_error``
    collapses nodes bottom-up whenever that does not increase validation
    loss. The ``*_cost`` variants measure loss as total misclassification
    cost under ``cost_model``. Weighted trees use training weight instead of
    counts; ``validation_weights`` optionally weights validation errors.
    """
    if method not in PRUNE_METHODS:
        raise ValueError(f"unknown pruning method {method!r}")
    if method == "none" or tree.n_nodes == 1:
        return tree
    use_cost = method in ("cost_complexity_cost", "reduced_cost")
    if use_cost and cost_model is None:
        raise ValueError(f"{method} pruning needs a cost model")
    if validation is None or len(validation) == 0:
        raise ValueError(f"{method} pruning needs a nonempty validation set")
    vloss = _validation_loss(tree, validation, use_cost, cost_model, validation_weights)
    if method.startswith("cost_complexity"):
        best_set, best_loss = frozenset(), math.inf
        for _, coll in cost_complexity_sequence(tree, use_cost):
            total, _ = _subtree_sums(tree, set(coll), vloss)
            if total[0] <= best_loss + 1e-12:
                best_set, best_loss = coll, total[0]
        return _compact(tree, best_set)
    collapsed: set = set()
    sub = vloss.copy()
    for i in range(tree.n_nodes - 1, -1, -1):
        if tree.feature[i] < 0:
            continue
        children = sub[tree.left[i]] + sub[tree.right[i]]
        if vloss[i] <= children + 1e-12:
            collapsed.add(i)
            sub[i] = vloss[i]
        else:
            sub[i] = children
    return _compact(tree, collapsed)


def is_subtree(pruned: Tree, full: Tree) -> bool:
    """True if ``pruned`` is ``full`` with some internal nodes turned into leaves."""
    stack = [(0, 0)]
    while stack:
        a, b = stack.pop()
        if not np.array_equal(pruned.stats[a], full.stats[b]):
            return False
        if pruned.feature[a] < 0:
            continue
        if full.feature[b] < 0 or pruned.feature[a] != full.feature[b] or pruned.threshold[a] != full.threshold[b]:
            return False
        stack.append((int(pruned.left[a]), int(full.left[b])))
        stack.append((int(pruned.right[a]), int(full.right[b])))
    return True


def fit_tree(
    data: Dataset,
    weights=None,
    config: TreeConfig = TreeConfig(),
    cost_model: CostModel | None = None,
    rng: np.random.Generator | None = None,
    validation: Dataset | None = None,
) -> Tree:
    """Grow and, if ``config.prune`` asks for it, prune against ``validation``."""
    tree = grow_tree(data, weights, config, cost_model, rng)
    if config.prune != "none":
        tree = prune(tree, config.prune, validation, cost_model)
    return tree

"""Bagging-family trainers and vote/probability aggregation."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .calibration import LeafEstimator, tree_node_probabilities, weighted_leaf_probabilities
from .data import CostModel, Dataset, initial_cost_weights, normalize
from .sampling import SamplerSpec, resample
from .tree import Tree, TreeConfig, fit_tree

AGGREGATIONS = ("avg_prob", "majority", "weighted_majority")
_PRESAMPLE_KEY = 0xFFFFFFFF


def member_rng(seed: int, index: int) -> np.random.Generator:
    """Independent reproducible stream for ensemble member ``index``."""
    return np.random.default_rng([int(seed), int(index)])


def vote_share(votes, weights=None) -> np.ndarray:
    """Share of vote weight pointing to the positive class.

    ``votes`` has members on axis 0. A negative weight counts its magnitude
    toward the opposite class. An all-zero weight vector gives 0.5.
    """
    h = np.asarray(votes)
    w = np.ones(h.shape) if weights is None else np.broadcast_to(
        np.asarray(weights, dtype=np.float64).reshape((-1,) + (1,) * (h.ndim - 1)) if np.ndim(weights) == 1 else weights,
        h.shape,
    )
    toward_pos = np.where((h == 1) == (w >= 0), np.abs(w), 0.0).sum(axis=0)
    total = np.abs(w).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0, toward_pos / np.where(total > 0, total, 1.0), 0.5)


def aggregate(member_outputs, mode: str = "majority", alphas=None) -> tuple[np.ndarray, np.ndarray]:
    """Combine member outputs into a score ``S`` in [0, 1] and a label ``S > 0.5``.

    ``avg_prob`` averages probabilities; ``majority`` is the positive-vote
    fraction; ``weighted_majority`` weighs each vote by its alpha.
    """
    out = np.asarray(member_outputs, dtype=np.float64)
    if mode not in AGGREGATIONS:
        raise ValueError(f"unknown aggregation {mode!r}")
    is_label = np.isin(out, (0.0, 1.0))
    if mode == "avg_prob":
        if ((out < 0) | (out > 1)).any():
            raise ValueError("avg_prob needs probabilities in [0, 1]")
        S = out.mean(axis=0)
    else:
        if not is_label.all():
            raise ValueError(f"{mode} needs class labels, got probabilities or mixed outputs")
        S = vote_share(out, None if mode == "majority" else alphas)
    return S, (S > 0.5).astype(np.int8)


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    """Trained bagging-style ensemble of trees.

    Members vote with ``member_alphas``. ``vote_weighting="leaf_weight"``
    (weighted ensembles) further scales each member's vote for a record by
    the mean training-record weight at the leaf it reaches.
    """

    members: tuple
    member_alphas: np.ndarray
    trainer_kind: str
    leaf_estimator: LeafEstimator = LeafEstimator()
    aggregation: str = "majority"
    vote_weighting: str = "alpha"
    sample_ids: tuple | None = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.members) < 1:
            raise ValueError("an ensemble needs at least one member")
        a = np.asarray(self.member_alphas, dtype=np.float64)
        if a.shape != (len(self.members),) or not np.isfinite(a).all():
            raise ValueError("member_alphas must be finite, one per member")
        a.flags.writeable = False
        object.__setattr__(self, "member_alphas", a)
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"unknown aggregation {self.aggregation!r}")

    def with_(self, **changes) -> "EnsembleModel":
        changes.setdefault("_cache", {})
        return replace(self, **changes)

    def _node_probs(self, i: int) -> np.ndarray:
        key = ("p", i)
        if key not in self._cache:
            tree = self.members[i]
            est = self.leaf_estimator
            if tree.weighted and est.kind == "frequency":
                probs = weighted_leaf_probabilities(tree)
            else:
                probs = tree_node_probabilities(tree, est)
            self._cache[key] = probs
        return self._cache[key]

    def leaves(self, X) -> np.ndarray:
        return np.stack([t.apply(X) for t in self.members])

    def member_probabilities(self, X, leaves=None) -> np.ndarray:
        leaves = self.leaves(X) if leaves is None else leaves
        return np.stack([self._node_probs(i)[leaves[i]] for i in range(len(self.members))])

    def member_labels(self, X, thresholds=None, leaves=None) -> np.ndarray:
        """Member votes: tree labels, or ``probability > threshold`` when thresholds are given."""
        leaves = self.leaves(X) if leaves is None else leaves
        if thresholds is None:
            return np.stack([t.label[leaves[i]] for i, t in enumerate(self.members)]).astype(np.int8)
        return (self.member_probabilities(X, leaves) > np.asarray(thresholds)).astype(np.int8)

    def vote_weights(self, X, leaves=None) -> np.ndarray:
        leaves = self.leaves(X) if leaves is None else leaves
        if self.vote_weighting == "leaf_weight":
            out = []
            for i, t in enumerate(self.members):
                s = t.stats[leaves[i]]
                out.append((s[:, 2] + s[:, 3]) / (s[:, 0] + s[:, 1]))
            return self.member_alphas[:, None] * np.stack(out)
        return np.broadcast_to(self.member_alphas[:, None], leaves.shape)

    def score(self, X, thresholds=None) -> np.ndarray:
        leaves = self.leaves(X)
        if self.aggregation == "avg_prob":
            return self.member_probabilities(X, leaves).mean(axis=0)
        votes = self.member_labels(X, thresholds, leaves)
        if self.aggregation == "majority" and self.vote_weighting != "leaf_weight":
            return vote_share(votes)
        return vote_share(votes, self.vote_weights(X, leaves))

    def predict(self, X, thresholds=None) -> np.ndarray:
        return (self.score(X, thresholds) > 0.5).astype(np.int8)

    def to_dict(self) -> dict:
        return {
            "members": [t.to_dict() for t in self.members],
            "member_alphas": self.member_alphas.tolist(),
            "trainer_kind": self.trainer_kind,
            "leaf_estimator": self.leaf_estimator.to_dict(),
            "aggregation": self.aggregation,
            "vote_weighting": self.vote_weighting,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleModel":
        return cls(
            tuple(Tree.from_dict(t) for t in d["members"]), np.array(d["member_alphas"]),
            d["trainer_kind"], LeafEstimator.from_dict(d["leaf_estimator"]),
            d["aggregation"], d["vote_weighting"],
        )


def _default_estimator(data: Dataset) -> LeafEstimator:
    return LeafEstimator("frequency", data.stats().base_rate)


def _build(trees, ids, kind, data, aggregation, vote_weighting="alpha"):
    return EnsembleModel(
        tuple(trees), np.ones(len(trees)), kind, _default_estimator(data), aggregation,
        vote_weighting, tuple(ids),
    )


def bagging_train(
    base_config: TreeConfig,
    data: Dataset,
    n_members: int = 100,
    seed: int = 0,
    cost_model: CostModel | None = None,
    validation: Dataset | None = None,
    aggregation: str = "majority",
    trainer_kind: str = "bagging",
) -> EnsembleModel:
    """Bagging: one tree per bootstrap of the training set.

    The attribute mode of ``base_config`` yields Random Forests
    (``per_split``) or Random Decision Forests (``per_tree``).
    """
    if n_members < 1:
        raise ValueError("n_members must be at least 1")
    n = len(data)
    trees, ids = [], []
    for i in range(n_members):
        rng = member_rng(seed, i)
        idx = rng.integers(0, n, n)
        sample = data.subset(idx)
        trees.append(fit_tree(sample, None, base_config, cost_model, rng, validation))
        ids.append(sample.ids)
    return _build(trees, ids, trainer_kind, data, aggregation)


def sample_ensemble_train(
    sampler: SamplerSpec,
    base_config: TreeConfig,
    data: Dataset,
    n_members: int = 100,
    seed: int = 0,
    cost_model: CostModel | None = None,
    validation: Dataset | None = None,
    aggregation: str = "majority",
) -> EnsembleModel:
    """Resample the full training set afresh for every member (Costing when the sampler is CPR)."""
    if n_members < 1:
        raise ValueError("n_members must be at least 1")
    trees, ids = [], []
    for i in range(n_members):
        rng = member_rng(seed, i)
        sample = resample(sampler, data, cost_model, rng).data
        trees.append(fit_tree(sample, None, base_config, cost_model, rng, validation))
        ids.append(sample.ids)
    return _build(trees, ids, f"sample_ensemble:{sampler.kind}", data, aggregation)


def presample(sampler: SamplerSpec, data: Dataset, cost_model: CostModel | None, seed: int) -> Dataset:
    """The single modified training set used by a pre-sampled ensemble."""
    return resample(sampler, data, cost_model, member_rng(seed, _PRESAMPLE_KEY)).data


def presample_ensemble_train(
    sampler: SamplerSpec,
    base_config: TreeConfig,
    data: Dataset,
    n_members: int = 100,
    seed: int = 0,
    cost_model: CostModel | None = None,
    validation: Dataset | None = None,
    aggregation: str = "majority",
) -> EnsembleModel:
    """Resample once, then bag on the modified set (bootstraps of the modified set's size)."""
    modified = presample(sampler, data, cost_model, seed)
    model = bagging_train(
        base_config, modified, n_members, seed, cost_model, validation, aggregation,
        f"presample_ensemble:{sampler.kind}",
    )
    return model


def weighted_ensemble_train(
    base_config: TreeConfig,
    data: Dataset,
    cost_model: CostModel,
    n_members: int = 100,
    seed: int = 0,
    validation: Dataset | None = None,
) -> EnsembleModel:
    """Bagging of weighted trees with cost-proportional record weights.

    Each bootstrap's weights are renormalized; a member's vote for a record
    weighs the mean record weight at the leaf the record reaches.
    """
    if n_members < 1:
        raise ValueError("n_members must be at least 1")
    w0 = initial_cost_weights(data, cost_model)
    n = len(data)
    trees, ids = [], []
    for i in range(n_members):
        rng = member_rng(seed, i)
        idx = rng.integers(0, n, n)
        sample = data.subset(idx)
        tree = fit_tree(sample, normalize(w0[idx]), base_config, cost_model, rng, validation)
        trees.append(tree)
        ids.append(sample.ids)
    return _build(trees, ids, "weighted_ensemble", data, "weighted_majority", "leaf_weight")

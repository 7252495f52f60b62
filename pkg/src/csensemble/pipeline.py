"""Compose trainer, calibration, vote weights and decision policy into one trained model."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .boosting import STUMP, BoostModel, boost_score, boost_train, make_variant
from .calibration import LEAF_KINDS, SCORE_KINDS, LeafEstimator, fit_score_calibrator, tree_node_probabilities
from .data import CostModel, Dataset
from .decision import (
    VOTE_RULES, DecisionPolicy, apply_policy, canonical_votes, check_combination,
    fit_majority_threshold, majority_share, member_epsilons, metacost, model_vote_weights,
    t_cs, thresholding_fit,
)
from .ensemble import (
    EnsembleModel, bagging_train, presample_ensemble_train, sample_ensemble_train,
    weighted_ensemble_train,
)
from .sampling import SamplerSpec
from .tree import Tree, TreeConfig

ENSEMBLE_KINDS = ("bagging", "sample", "presample", "weighted", "boost")


@dataclass(frozen=True)
class MethodSpec:
    """Component stack of one method.

    ``tree=None`` selects the default base learner: fully grown trees for
    bagging-style ensembles and stumps for boosting. ``member_dmecc``
    thresholds each member's probability before voting (``"tcs"`` or
    ``"tthr"``); for boosting only ``"tcs"`` exists. ``calibrate_on`` picks
    the set used for score calibrators and vote-weight errors.
    """

    ensemble: str = "bagging"
    attribute_mode: str = "all"
    sampler: SamplerSpec | None = None
    variant: str | None = None
    sqrt_init: bool = False
    member_dmecc: str | None = None
    n_members: int = 100
    tree: TreeConfig | None = None
    leaf_estimator: str = "frequency"
    m: int | None = None
    score_calibrator: str = "none"
    output: str = "wtmaj"
    vote_rule: str = "uniform"
    policy: str = "default"
    metacost: bool = False
    calibrate_on: str = "validation"
    name: str = ""

    def __post_init__(self):
        if self.ensemble not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.ensemble!r}")
        if self.ensemble == "boost" and self.variant is None:
            raise ValueError("boosting needs a variant")
        if self.ensemble in ("sample", "presample") and self.sampler is None:
            raise ValueError(f"{self.ensemble} ensembles need a sampler")
        if self.leaf_estimator not in LEAF_KINDS:
            raise ValueError(f"unknown leaf estimator {self.leaf_estimator!r}")
        if self.score_calibrator not in SCORE_KINDS:
            raise ValueError(f"unknown score calibrator {self.score_calibrator!r}")
        if self.vote_rule not in VOTE_RULES:
            raise ValueError(f"unknown vote weight rule {self.vote_rule!r}")
        if self.calibrate_on not in ("validation", "train"):
            raise ValueError("calibrate_on must be 'validation' or 'train'")
        if self.n_members < 1:
            raise ValueError("n_members must be at least 1")
        check_combination(self.method_type, self.calibration, self.output, self.policy, self.member_dmecc)
        if self.ensemble == "boost":
            if self.member_dmecc not in (None, "tcs"):
                raise ValueError("boosting supports member thresholding at T_cs only")
            if self.vote_rule != "uniform":
                raise ValueError("boosted rounds vote with their own alphas; vote_rule must be uniform")
            if self.leaf_estimator != "frequency":
                raise ValueError("boosting calibrates scores, not leaves")
        elif self.score_calibrator != "none":
            raise ValueError("score calibrators apply to boosting only")

    @property
    def method_type(self) -> str:
        if self.ensemble == "boost":
            return "boosting"
        return "weighted" if self.ensemble == "weighted" else "others"

    @property
    def calibration(self) -> str:
        return self.score_calibrator if self.ensemble == "boost" else (
            "none" if self.leaf_estimator == "frequency" else self.leaf_estimator
        )

    def base_config(self, seed: int) -> TreeConfig:
        if self.tree is not None:
            cfg = self.tree
        elif self.ensemble == "boost":
            cfg = STUMP
        else:
            cfg = TreeConfig()
        if self.attribute_mode != "all":
            cfg = replace(cfg, attribute_mode=self.attribute_mode)
        return replace(cfg, seed=seed)

    def with_(self, **changes) -> "MethodSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["sampler"] = None if self.sampler is None else self.sampler.to_dict()
        d["tree"] = None if self.tree is None else self.tree.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MethodSpec":
        d = dict(d)
        d["sampler"] = None if d["sampler"] is None else SamplerSpec.from_dict(d["sampler"])
        d["tree"] = None if d["tree"] is None else TreeConfig.from_dict(d["tree"])
        return cls(**d)


@dataclass(frozen=True, eq=False)
class Outputs:
    """Model output for a batch: score plus (for class output) member votes and weights."""

    score: np.ndarray
    votes: np.ndarray | None = None
    weights: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """A trained ensemble or boosted model with its fitted decision policy. Immutable."""

    spec: MethodSpec
    model: EnsembleModel | BoostModel
    cost_model: CostModel
    policy: DecisionPolicy = DecisionPolicy()
    member_threshold: float | None = None
    metacost_tree: Tree | None = None
    schema: dict = field(default_factory=dict)

    def _needs_costs(self) -> bool:
        if self.policy.needs_costs or self.spec.member_dmecc == "tcs":
            return True
        return isinstance(self.model, BoostModel) and self.model.variant.vote_rule != "alpha"

    def costs(self, data: Dataset):
        """``(C_FP, C_FN)`` arrays for ``data`` (from the record columns when costs are per record)."""
        return self.cost_model.pairs(data, require="both")

    def outputs(self, data: Dataset, costs=None) -> Outputs:
        if costs is None and self._needs_costs():
            costs = self.costs(data)
        X = data.X
        m = self.model
        if isinstance(m, BoostModel):
            S, votes, weights = boost_score(m, X, costs)
            if m.variant.vote_rule == "uboost":
                votes = np.ones_like(votes)
            votes, weights = canonical_votes(votes, weights)
            return Outputs(np.asarray(m.calibrator(S), dtype=np.float64), votes, weights)
        leaves = m.leaves(X)
        if self.spec.output == "avg_prob":
            return Outputs(m.member_probabilities(X, leaves).mean(axis=0))
        thr = None
        if self.spec.member_dmecc == "tcs":
            thr = t_cs(*costs)
        elif self.spec.member_dmecc == "tthr":
            thr = self.member_threshold
        votes = m.member_labels(X, thr, leaves)
        votes, weights = canonical_votes(votes, m.vote_weights(X, leaves))
        return Outputs(majority_share(votes, weights), votes, weights)

    def score(self, data: Dataset) -> np.ndarray:
        """Ranking score: calibrated probability, average probability or vote share."""
        if self.metacost_tree is not None:
            t = self.metacost_tree
            return tree_node_probabilities(t, LeafEstimator("frequency"))[t.apply(data.X)]
        return self.outputs(data).score

    def predict(self, data: Dataset) -> np.ndarray:
        if self.metacost_tree is not None:
            return self.metacost_tree.predict(data.X).astype(np.int8)
        return self._decide(data)

    def _decide(self, data: Dataset) -> np.ndarray:
        costs = self.costs(data) if self._needs_costs() else None
        out = self.outputs(data, costs)
        return apply_policy(self.policy, out.score, out.votes, out.weights, costs)

    def to_dict(self) -> dict:
        kind = "boost" if isinstance(self.model, BoostModel) else "ensemble"
        return {
            "spec": self.spec.to_dict(),
            "model_kind": kind,
            "model": self.model.to_dict(),
            "cost_model": self.cost_model.to_dict(),
            "policy": self.policy.to_dict(),
            "member_threshold": self.member_threshold,
            "metacost_tree": None if self.metacost_tree is None else self.metacost_tree.to_dict(),
            "schema": self.schema,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        model_cls = BoostModel if d["model_kind"] == "boost" else EnsembleModel
        return cls(
            MethodSpec.from_dict(d["spec"]), model_cls.from_dict(d["model"]),
            CostModel.from_dict(d["cost_model"]), DecisionPolicy.from_dict(d["policy"]),
            d["member_threshold"],
            None if d["metacost_tree"] is None else Tree.from_dict(d["metacost_tree"]),
            d["schema"],
        )


def _train_core(spec: MethodSpec, train: Dataset, validation, cost_model: CostModel, seed: int):
    cfg = spec.base_config(seed)
    n = spec.n_members
    if spec.ensemble == "bagging":
        return bagging_train(cfg, train, n, seed, cost_model, validation)
    if spec.ensemble == "sample":
        return sample_ensemble_train(spec.sampler, cfg, train, n, seed, cost_model, validation)
    if spec.ensemble == "presample":
        return presample_ensemble_train(spec.sampler, cfg, train, n, seed, cost_model, validation)
    if spec.ensemble == "weighted":
        return weighted_ensemble_train(cfg, train, cost_model, n, seed, validation)
    variant = make_variant(spec.variant, cost_model, n, spec.sqrt_init)
    return boost_train(
        variant, cfg, train, cost_model, n, spec.sampler, seed,
        "tcs" if spec.member_dmecc == "tcs" else None, validation,
    )


def train_pipeline(
    spec: MethodSpec,
    train: Dataset,
    validation: Dataset | None,
    cost_model: CostModel,
    seed: int = 0,
) -> TrainedModel:
    """Train ``spec`` on ``train``; fit thresholds, vote weights and calibrators on ``validation``.

    Probability thresholds take their candidates from training-set outputs
    and are chosen on the validation set.
    """
    needs_valid = (
        spec.policy in ("dmecc_tthr", "mta_tmthr") or spec.member_dmecc == "tthr"
        or (spec.calibrate_on == "validation"
            and (spec.vote_rule != "uniform" or spec.score_calibrator in ("platt", "isotonic")))
    )
    if needs_valid and (validation is None or len(validation) == 0):
        raise ValueError(f"method {spec.name or spec.ensemble} needs a nonempty validation set")
    calib = validation if spec.calibrate_on == "validation" else train
    model = _train_core(spec, train, validation, cost_model, seed)
    member_thr = None

    if isinstance(model, EnsembleModel):
        model = model.with_(
            leaf_estimator=LeafEstimator(spec.leaf_estimator, train.stats().base_rate, spec.m),
            aggregation="avg_prob" if spec.output == "avg_prob" else model.aggregation,
        )
        if spec.member_dmecc == "tthr":
            member_thr = thresholding_fit(
                model.member_probabilities(train.X), model.member_probabilities(validation.X),
                validation, cost_model,
            )
        if spec.vote_rule != "uniform":
            if spec.member_dmecc == "tcs":
                thr = t_cs(*cost_model.pairs(calib))
            else:
                thr = member_thr
            eps = member_epsilons(model.member_labels(calib.X, thr), calib, cost_model)
            model = model.with_(
                member_alphas=model_vote_weights(eps, spec.vote_rule),
                aggregation="weighted_majority" if spec.output == "wtmaj" else model.aggregation,
            )

    trained = TrainedModel(spec, model, cost_model, DecisionPolicy(spec.policy), member_thr,
                           schema=train.schema())

    if isinstance(model, BoostModel) and spec.score_calibrator != "none":
        S = boost_score(model, calib.X, trained.costs(calib) if trained._needs_costs() else None)[0]
        cal = fit_score_calibrator(spec.score_calibrator, S, calib.y)
        trained = replace(trained, model=model.with_(calibrator=cal))

    if spec.policy == "dmecc_tthr":
        t = thresholding_fit(trained.score(train), trained.score(validation), validation, cost_model)
        trained = replace(trained, policy=DecisionPolicy("dmecc_tthr", t))
    elif spec.policy == "mta_tmthr":
        out = trained.outputs(validation)
        t = fit_majority_threshold(majority_share(out.votes, out.weights), validation, cost_model)
        trained = replace(trained, policy=DecisionPolicy("mta_tmthr", t))

    if spec.metacost:
        relabelled = trained.predict(train)
        tree = metacost(train, relabelled, TreeConfig(seed=seed), seed)
        trained = replace(trained, metacost_tree=tree)
    return trained

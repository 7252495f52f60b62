"""Post-training decisions: cost thresholds, DMECC, MEC voting, MTA, vote weights, MetaCost."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CostModel, Dataset, initial_cost_weights
from .tree import Tree, TreeConfig, fit_tree

POLICY_KINDS = ("default", "dmecc_tcs", "dmecc_tthr", "mec", "mta_tcs", "mta_tmthr")
VOTE_RULES = ("uniform", "log-odds", "linear", "exp", "squared")
METHOD_TYPES = ("boosting", "weighted", "others")
OUTPUTS = ("avg_prob", "wtmaj")
EPS_MIN = 1e-10


class InvalidCombination(ValueError):
    """Component combination the method grid marks as invalid."""


def t_cs(c_fp, c_fn):
    """Minimum expected cost threshold ``C_FP / (C_FP + C_FN)``; arrays give one threshold per record."""
    fp = np.asarray(c_fp, dtype=np.float64)
    fn = np.asarray(c_fn, dtype=np.float64)
    if (fp <= 0).any() or (fn <= 0).any():
        raise ValueError("costs must be strictly positive")
    out = fp / (fp + fn)
    return float(out) if out.ndim == 0 else out


def dmecc(probability, threshold):
    """Label 1 iff ``probability > threshold`` (equality goes negative)."""
    out = (np.asarray(probability) > np.asarray(threshold)).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def total_cost(y, pred, fp, fn) -> float:
    y = np.asarray(y)
    pred = np.asarray(pred)
    fp = np.broadcast_to(fp, y.shape)
    fn = np.broadcast_to(fn, y.shape)
    return float(fp[(pred == 1) & (y == 0)].sum() + fn[(pred == 0) & (y == 1)].sum())


def best_threshold(candidates, scores, y, fp, fn) -> float:
    """Candidate minimizing the cost of predicting ``score > candidate``; ties go to the smallest."""
    cand = np.unique(np.asarray(candidates, dtype=np.float64))
    if cand.size == 0:
        raise ValueError("no threshold candidates")
    s = np.asarray(scores, dtype=np.float64).ravel()
    if s.size == 0:
        raise ValueError("threshold fitting needs a nonempty validation set")
    y = np.broadcast_to(np.asarray(y), s.shape) if np.ndim(y) else np.full(s.shape, y)
    fp = np.broadcast_to(np.asarray(fp, dtype=np.float64), s.shape)
    fn = np.broadcast_to(np.asarray(fn, dtype=np.float64), s.shape)
    order = np.argsort(s, kind="stable")
    s, yo = s[order], y[order]
    # cost(c) = FN costs of positives with s <= c + FP costs of negatives with s > c
    fn_cum = np.concatenate([[0.0], np.cumsum(np.where(yo == 1, fn[order], 0.0))])
    fp_cum = np.concatenate([[0.0], np.cumsum(np.where(yo == 0, fp[order], 0.0))])
    k = np.searchsorted(s, cand, side="right")
    cost = fn_cum[k] + (fp_cum[-1] - fp_cum[k])
    best = cost.min()
    tol = 1e-12 * max(1.0, abs(best))
    return float(cand[np.flatnonzero(cost <= best + tol)[0]])


def thresholding_fit(train_probs, valid_probs, validation: Dataset, cost_model: CostModel) -> float:
    """Probability threshold ``T_thr``: the training probability with least validation cost.

    ``valid_probs`` may carry a leading member axis, in which case every
    member's prediction of every validation record counts.
    """
    if len(validation) == 0:
        raise ValueError("threshold fitting needs a nonempty validation set")
    fp, fn = cost_model.pairs(validation, require="own")
    vp = np.asarray(valid_probs, dtype=np.float64)
    reps = vp.size // len(validation)
    return best_threshold(
        np.asarray(train_probs).ravel(), vp.ravel(), np.tile(validation.y, reps),
        np.tile(fp, reps), np.tile(fn, reps),
    )


def fit_majority_threshold(valid_shares, validation: Dataset, cost_model: CostModel) -> float:
    """Vote-share threshold ``T_mthr`` over the shares achieved on the validation set."""
    if len(validation) == 0:
        raise ValueError("threshold fitting needs a nonempty validation set")
    fp, fn = cost_model.pairs(validation, require="own")
    s = np.asarray(valid_shares, dtype=np.float64)
    return best_threshold(s, s, validation.y, fp, fn)


def clamp_eps(eps):
    return np.clip(np.asarray(eps, dtype=np.float64), EPS_MIN, 1.0 - EPS_MIN)


def model_vote_weights(epsilons, rule: str = "log-odds") -> np.ndarray:
    """Member vote weights ``f(eps)`` from weighted member errors.

    Rules: ``log-odds`` ln((1-e)/e), ``linear`` 1-e, ``exp`` e^((1-e)/e),
    ``squared`` ((1-e)/e)^2, ``uniform`` 1. The ``exp`` weights are divided
    by a common factor when needed to stay finite, which leaves every
    weighted vote share unchanged.
    """
    e = clamp_eps(epsilons)
    odds = (1.0 - e) / e
    if rule == "uniform":
        return np.ones_like(e)
    if rule == "log-odds":
        return np.log(odds)
    if rule == "linear":
        return 1.0 - e
    if rule == "squared":
        return odds ** 2
    if rule == "exp":
        shift = max(0.0, float(odds.max()) - 700.0) if odds.size else 0.0
        return np.exp(odds - shift)
    raise ValueError(f"unknown vote weight rule {rule!r}")


def member_epsilons(member_votes, validation: Dataset, cost_model: CostModel) -> np.ndarray:
    """Weighted error of each member, records weighted by normalized cost weights."""
    w = initial_cost_weights(validation, cost_model)
    wrong = np.asarray(member_votes) != validation.y[None, :]
    return wrong.astype(np.float64) @ w


def _sums(votes, alphas):
    h = np.asarray(votes)
    a = np.asarray(alphas, dtype=np.float64)
    if a.ndim == 1 and h.ndim == 2:
        a = a[:, None]
    a = np.broadcast_to(a, h.shape)
    return np.where(h == 1, a, 0.0).sum(axis=0), np.where(h == 1, 0.0, a).sum(axis=0)


def canonical_votes(votes, weights):
    """Rewrite signed vote weights as nonnegative weights on possibly flipped votes."""
    h = np.asarray(votes)
    w = np.broadcast_to(np.asarray(weights, dtype=np.float64), h.shape) if np.ndim(weights) > 1 \
        else np.broadcast_to(np.asarray(weights, dtype=np.float64)[:, None], h.shape)
    return np.where(w >= 0, h, 1 - h).astype(np.int8), np.abs(w)


def mec_share(votes, alphas, c_fp, c_fn):
    """Share of cost-weighted votes that are positive (positive votes weigh ``alpha*C_FN``, negative ``alpha*C_FP``)."""
    a1, a0 = _sums(votes, alphas)
    pos = a1 * np.asarray(c_fn, dtype=np.float64)
    tot = pos + a0 * np.asarray(c_fp, dtype=np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(tot != 0, pos / np.where(tot != 0, tot, 1.0), 0.0)


def mec_vote(votes, alphas, c_fp, c_fn):
    """MEC voting: label 1 iff the cost-weighted positive share exceeds 0.5.

    ``votes`` has members on axis 0; costs may be scalars or per record.
    """
    if (np.asarray(c_fp) <= 0).any() or (np.asarray(c_fn) <= 0).any():
        raise ValueError("MEC voting needs strictly positive costs for every record")
    a1, a0 = _sums(votes, alphas)
    # share > 1/2 compared without the rounding of a division
    out = (a1 * np.asarray(c_fn, dtype=np.float64) > a0 * np.asarray(c_fp, dtype=np.float64)).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def majority_share(votes, alphas):
    a1, a0 = _sums(votes, alphas)
    tot = a1 + a0
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(tot != 0, a1 / np.where(tot != 0, tot, 1.0), 0.0)


def mta(votes, alphas, majority_threshold):
    """Majority threshold adjustment: label 1 iff the alpha-weighted positive share exceeds the threshold."""
    out = (majority_share(votes, alphas) > np.asarray(majority_threshold)).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def metacost(data: Dataset, relabel, base_config: TreeConfig = TreeConfig(), seed: int = 0) -> Tree:
    """Train one cost-insensitive tree on ``data`` relabelled by a cost-sensitive model.

    ``relabel`` is either the new labels or a callable returning them for ``data``.
    """
    labels = relabel(data) if callable(relabel) else relabel
    labels = np.asarray(labels)
    if labels.shape != (len(data),):
        raise ValueError("relabelling must give one label per training record")
    cfg = base_config
    if cfg.split_criterion == "cost_gain" or cfg.labeling == "cost-threshold":
        raise ValueError("the relabelled model must be cost-insensitive")
    return fit_tree(data.with_labels(labels), None, cfg, None, np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# policies and the combination grid

@dataclass(frozen=True)
class DecisionPolicy:
    """How a trained model's output becomes a label.

    ``threshold`` holds the fitted ``T_thr``/``T_mthr``; cost-threshold
    policies resolve ``T_cs`` per record at prediction time.
    """

    kind: str = "default"
    threshold: float | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown decision policy {self.kind!r}; choose from {', '.join(POLICY_KINDS)}")
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise ValueError("thresholds must lie in [0, 1]")

    @property
    def needs_costs(self) -> bool:
        return self.kind in ("dmecc_tcs", "mec", "mta_tcs")

    @property
    def needs_fit(self) -> bool:
        return self.kind in ("dmecc_tthr", "mta_tmthr")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "threshold": self.threshold}

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionPolicy":
        return cls(d["kind"], d["threshold"])


_CALIBRATIONS = {
    "boosting": ("none", "logistic_correction", "platt", "isotonic"),
    "weighted": ("none",),
    "others": ("none", "laplace", "m_estimation", "curtailment"),
}
_GRID_LABEL = {"boosting": "AdaBoost & variants", "weighted": "CS-Weighted ensemble", "others": "Others"}


def _calibration_family(calibration: str) -> str:
    # combined leaf estimators fall under their curtailment row
    return "curtailment" if calibration.startswith("curtailment") else calibration


def check_combination(method_type: str, calibration: str, output: str, policy: str,
                      member_dmecc: str | None = None) -> None:
    """Reject a combination the method grid marks as invalid.

    ``member_dmecc`` (``"tcs"`` or ``"tthr"``) thresholds member
    probabilities before voting, which needs label output.
    """
    if method_type not in METHOD_TYPES:
        raise ValueError(f"unknown method type {method_type!r}")
    cal = _calibration_family(calibration)
    row = f"{_GRID_LABEL[method_type]} / calibration {calibration!r}"
    if cal not in _CALIBRATIONS[method_type]:
        raise InvalidCombination(f"invalid combination: {row} is not a row of the method grid")
    if output not in OUTPUTS:
        raise ValueError(f"unknown ensemble output {output!r}")
    if policy not in POLICY_KINDS:
        raise ValueError(f"unknown decision policy {policy!r}")
    if method_type == "boosting" and output == "avg_prob":
        raise InvalidCombination(f"invalid combination: {row} / output Avg(pr) is marked x")
    tcs_ok = cal != "none" if method_type == "boosting" else cal == "none"
    if policy == "dmecc_tcs" and not tcs_ok:
        raise InvalidCombination(f"invalid combination: {row} / DMECC T_cs is marked x")
    if policy == "dmecc_tthr" and method_type == "boosting" and cal == "none":
        raise InvalidCombination(f"invalid combination: {row} / DMECC T_thr is marked x")
    if policy in ("mec", "mta_tcs", "mta_tmthr") and output != "wtmaj":
        raise InvalidCombination(f"invalid combination: {row} / {policy} needs weighted-majority (class) output")
    if member_dmecc is not None:
        if method_type == "boosting":
            return
        if output != "wtmaj":
            raise InvalidCombination("member-level DMECC needs weighted-majority (class) output")
        if member_dmecc not in ("tcs", "tthr"):
            raise ValueError(f"unknown member threshold {member_dmecc!r}")


def apply_policy(policy: DecisionPolicy, score=None, votes=None, alphas=None, costs=None) -> np.ndarray:
    """Turn a model output into labels.

    ``score`` is the (calibrated) probability or vote share; ``votes`` and
    ``alphas`` are per-member outputs for MEC voting and MTA; ``costs`` is a
    ``(C_FP, C_FN)`` pair of scalars or per-record arrays.
    """
    kind = policy.kind
    if policy.needs_costs and costs is None:
        raise ValueError(f"policy {kind} needs the costs of the records being predicted")
    if kind in ("default", "dmecc_tcs", "dmecc_tthr"):
        if score is None:
            raise ValueError(f"policy {kind} needs a score")
        if kind == "default":
            t = 0.5
        elif kind == "dmecc_tcs":
            t = t_cs(*costs)
        else:
            t = _fitted(policy)
        return np.asarray(dmecc(score, t), dtype=np.int8)
    if votes is None or alphas is None:
        raise ValueError(f"policy {kind} needs member votes and weights")
    if kind == "mec":
        return np.asarray(mec_vote(votes, alphas, *costs), dtype=np.int8)
    t = t_cs(*costs) if kind == "mta_tcs" else _fitted(policy)
    return np.asarray(mta(votes, alphas, t), dtype=np.int8)


def _fitted(policy: DecisionPolicy) -> float:
    if policy.threshold is None:
        raise ValueError(f"policy {policy.kind} has not been fitted")
    return policy.threshold

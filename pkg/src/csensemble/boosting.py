"""AdaBoost engine parameterized by per-variant weight, alpha and vote rules."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .calibration import ScoreCalibrator, weighted_leaf_probabilities
from .data import CostModel, Dataset
from .ensemble import member_rng, vote_share
from .sampling import SamplerSpec, resample
from .tree import Tree, TreeConfig, fit_tree

log = logging.getLogger(__name__)

EPS_MIN = 1e-10
ALPHA_MAX = 50.0
VARIANTS = (
    "adaboost", "ncsab", "uboost", "adacost", "adaub", "asymab",
    "csb0", "csb1", "csb2", "adac1", "adac2", "adac3", "csab",
)
STUMP = TreeConfig(max_depth=2)
_LOG_FLOOR = -700.0


@dataclass(frozen=True)
class BoostVariantSpec:
    """Rules defining one boosting variant.

    init_rule: uniform, costs, sqrt_costs, asym_root, class_balance.
    update_rule: exp, adacost, adaub, asym, csb, adac1, adac2, adac3, csab.
    alpha_rule: log_odds, adacost, adac1, adac2, adac3, csab.
    vote_rule: alpha, alpha_cost, uboost.
    ``j`` picks the update exponent of CSBj; ``m`` is the root order of the
    asymmetric variant (its number of rounds).
    """

    name: str
    init_rule: str = "uniform"
    update_rule: str = "exp"
    alpha_rule: str = "log_odds"
    vote_rule: str = "alpha"
    scaled_costs: bool = False
    j: int | None = None
    m: int | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "BoostVariantSpec":
        return cls(**d)


def make_variant(name: str, cost_model: CostModel | None = None, n_rounds: int | None = None,
                 sqrt_init: bool = False) -> BoostVariantSpec:
    """Rule set of a named variant.

    ``sqrt_init`` switches ``ncsab`` to square-root cost ratios as initial
    weights. ``csab`` only accepts class-dependent costs.
    """
    if name not in VARIANTS:
        raise ValueError(f"unknown boosting variant {name!r}; choose from {', '.join(VARIANTS)}")
    if name == "adaboost":
        return BoostVariantSpec(name)
    if name == "ncsab":
        return BoostVariantSpec(name, "sqrt_costs" if sqrt_init else "costs")
    if name == "uboost":
        return BoostVariantSpec(name, "costs", vote_rule="uboost")
    if name == "adacost":
        return BoostVariantSpec(name, "costs", "adacost", "adacost", scaled_costs=True)
    if name == "adaub":
        return BoostVariantSpec(name, "costs", "adaub")
    if name == "asymab":
        if n_rounds is None or n_rounds < 1:
            raise ValueError("asymab needs the number of rounds")
        return BoostVariantSpec(name, "asym_root", "asym", m=int(n_rounds))
    if name.startswith("csb"):
        return BoostVariantSpec(name, "costs", "csb", vote_rule="alpha_cost", j=int(name[3]))
    if name.startswith("adac"):
        return BoostVariantSpec(name, "uniform", name, name, scaled_costs=True)
    if cost_model is not None and not cost_model.is_class_dependent:
        raise ValueError("csab is defined for class-dependent costs only")
    return BoostVariantSpec(name, "class_balance", "csab", "csab")


def _half_log_ratio(num: float, den: float) -> float:
    # both terms floored relative to their sum, matching the epsilon clamp
    floor = EPS_MIN * (abs(num) + abs(den))
    return 0.5 * math.log(max(num, floor) / max(den, floor))


def adaboost_alpha(eps: float) -> float:
    return _half_log_ratio(1.0 - eps, eps)


def _csab_f(a, b, d, c_fn, c_fp, wp, wn):
    # 2b C cosh(Ca) - C e^{-Ca} W  ==  C (b e^{Ca} - (W - b) e^{-Ca}), per class
    with np.errstate(over="ignore"):
        return (c_fn * (b * np.exp(c_fn * a) - (wp - b) * np.exp(-c_fn * a))
                + c_fp * (d * np.exp(c_fp * a) - (wn - d) * np.exp(-c_fp * a)))


def csab_alpha_solve(b: float, d: float, c_fn: float, c_fp: float,
                     sum_w_pos: float, sum_w_neg: float, alpha_max: float = ALPHA_MAX) -> float:
    """Root of the implicit alpha equation of cost-sensitive AdaBoost.

    ``b`` is the weight of misclassified positives and ``d`` of misclassified
    negatives. The equation's left minus right side is increasing in alpha,
    so the root is unique; it is bracketed by geometric expansion (both
    directions, up to ``alpha_max``) and refined by bisection.
    """
    for v in (b, d, c_fn, c_fp, sum_w_pos, sum_w_neg):
        if v < 0 or not math.isfinite(v):
            raise ValueError("inputs must be finite and nonnegative")
    f = lambda a: float(_csab_f(a, b, d, c_fn, c_fp, sum_w_pos, sum_w_neg))
    f0 = f(0.0)
    if f0 == 0.0:
        return 0.0
    direction = 1.0 if f0 < 0 else -1.0
    lo, step = 0.0, 1.0 / max(c_fn, c_fp)
    hi = direction * min(step, alpha_max)
    while np.sign(f(hi)) == np.sign(f0):
        if abs(hi) >= alpha_max:
            raise ArithmeticError(
                f"no sign change on [0, {hi:g}]: residuals {f0:.3g} at 0 and {f(hi):.3g} at {hi:g}"
            )
        lo = hi
        hi = direction * min(2.0 * abs(hi), alpha_max)
    a, z = (lo, hi) if lo < hi else (hi, lo)
    fa = f(a)
    for _ in range(200):
        mid = 0.5 * (a + z)
        if mid in (a, z):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            z = mid
    return a if abs(fa) <= abs(f(z)) else z


@dataclass(frozen=True, eq=False)
class BoostModel:
    """Boosted trees with their alphas and clamped errors.

    ``c_fp``/``c_fn`` are the class-level costs used for cost-based votes
    when no per-record costs are supplied at prediction. ``member_threshold``
    set to ``"tcs"`` makes each round vote by weighted leaf probability
    above the cost-sensitive threshold.
    """

    rounds: tuple
    alphas: np.ndarray
    epsilons: np.ndarray
    variant: BoostVariantSpec
    c_fp: float | None = None
    c_fn: float | None = None
    member_threshold: str | None = None
    sampler: SamplerSpec | None = None
    calibrator: ScoreCalibrator = ScoreCalibrator()
    diagnostics: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.rounds) < 1:
            raise ValueError("a boosted model needs at least one round")
        for name in ("alphas", "epsilons"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            if a.shape != (len(self.rounds),):
                raise ValueError(f"{name} must hold one value per round")
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    def with_(self, **changes) -> "BoostModel":
        changes.setdefault("_cache", {})
        return replace(self, **changes)

    @property
    def members(self) -> tuple:
        return self.rounds

    @property
    def member_alphas(self) -> np.ndarray:
        return self.alphas

    def leaves(self, X) -> np.ndarray:
        return np.stack([t.apply(X) for t in self.rounds])

    def _costs(self, n: int, costs) -> tuple[np.ndarray, np.ndarray]:
        if costs is not None:
            fp, fn = costs
            return np.broadcast_to(np.asarray(fp, dtype=np.float64), (n,)), \
                np.broadcast_to(np.asarray(fn, dtype=np.float64), (n,))
        if self.c_fp is None or self.c_fn is None:
            raise ValueError("this model needs per-record costs at prediction time")
        return np.full(n, self.c_fp), np.full(n, self.c_fn)

    def _wprob(self, i: int) -> np.ndarray:
        if i not in self._cache:
            self._cache[i] = weighted_leaf_probabilities(self.rounds[i])
        return self._cache[i]

    def member_probabilities(self, X, leaves=None) -> np.ndarray:
        leaves = self.leaves(X) if leaves is None else leaves
        return np.stack([self._wprob(i)[leaves[i]] for i in range(len(self.rounds))])

    def member_labels(self, X, costs=None, leaves=None) -> np.ndarray:
        leaves = self.leaves(X) if leaves is None else leaves
        if self.member_threshold == "tcs":
            fp, fn = self._costs(leaves.shape[1], costs)
            return (self.member_probabilities(X, leaves) > fp / (fp + fn)).astype(np.int8)
        return np.stack([t.label[leaves[i]] for i, t in enumerate(self.rounds)]).astype(np.int8)

    def vote_weights(self, X, costs=None, leaves=None, votes=None) -> np.ndarray:
        """Per-round, per-record signed vote weights under the variant's vote rule."""
        leaves = self.leaves(X) if leaves is None else leaves
        n = leaves.shape[1]
        a = self.alphas[:, None]
        rule = self.variant.vote_rule
        if rule == "alpha":
            return np.broadcast_to(a, leaves.shape)
        fp, fn = self._costs(n, costs)
        if rule == "alpha_cost":
            votes = self.member_labels(X, costs, leaves) if votes is None else votes
            return a * np.where(votes == 1, fn, fp)
        w_pos = np.stack([t.stats[leaves[i], 2] for i, t in enumerate(self.rounds)])
        w_neg = np.stack([t.stats[leaves[i], 3] for i, t in enumerate(self.rounds)])
        return a * (w_pos * fn - w_neg * fp)

    def score(self, X, costs=None) -> np.ndarray:
        return boost_score(self, X, costs)[0]

    def predict(self, X, costs=None) -> np.ndarray:
        return (self.score(X, costs) > 0.5).astype(np.int8)

    def to_dict(self) -> dict:
        return {
            "rounds": [t.to_dict() for t in self.rounds],
            "alphas": self.alphas.tolist(),
            "epsilons": self.epsilons.tolist(),
            "variant": self.variant.to_dict(),
            "c_fp": self.c_fp,
            "c_fn": self.c_fn,
            "member_threshold": self.member_threshold,
            "sampler": None if self.sampler is None else self.sampler.to_dict(),
            "calibrator": self.calibrator.to_dict(),
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoostModel":
        return cls(
            tuple(Tree.from_dict(t) for t in d["rounds"]), np.array(d["alphas"]),
            np.array(d["epsilons"]), BoostVariantSpec.from_dict(d["variant"]),
            d["c_fp"], d["c_fn"], d["member_threshold"],
            None if d["sampler"] is None else SamplerSpec.from_dict(d["sampler"]),
            ScoreCalibrator.from_dict(d["calibrator"]), tuple(d["diagnostics"]),
        )


def boost_score(model: BoostModel, X, costs=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normalized weighted vote ``S`` plus the raw per-round votes and weights.

    The UBoost rule contributes its signed leaf expression directly: a
    positive value points to the positive class, a negative one to the
    negative class. ``S`` is the positive-direction share of the total
    absolute weight.
    """
    leaves = model.leaves(X)
    votes = model.member_labels(X, costs, leaves)
    weights = model.vote_weights(X, costs, leaves, votes)
    if model.variant.vote_rule == "uboost":
        S = vote_share(np.ones_like(votes), weights)
    else:
        S = vote_share(votes, weights)
    return np.clip(S, 0.0, 1.0), votes, weights


# ---------------------------------------------------------------------------
# training

def _init_log_weights(spec: BoostVariantSpec, y, own, fp, fn) -> np.ndarray:
    pos = y == 1
    rule = spec.init_rule
    if rule == "uniform":
        return np.zeros(len(y))
    if rule == "costs":
        return np.log(own)
    if rule == "sqrt_costs":
        return np.where(pos, 0.5, -0.5) * np.log(fn / fp)
    if rule == "asym_root":
        return np.where(pos, 1.0, -1.0) * np.log(fn / fp) / (2.0 * spec.m)
    if rule == "class_balance":
        n_pos, n_neg = int(pos.sum()), int((~pos).sum())
        return np.where(pos, -math.log(max(n_pos, 1)), -math.log(max(n_neg, 1)))
    raise ValueError(f"unknown init rule {rule!r}")


def _weights(logw: np.ndarray) -> np.ndarray:
    w = np.exp(np.maximum(logw - logw.max(), _LOG_FLOOR))
    return w / w.sum()


def _alpha(spec, w, y, correct, own, cs, eps, c_fp, c_fn):
    rule = spec.alpha_rule
    if rule == "log_odds":
        return adaboost_alpha(eps)
    if rule == "adacost":
        beta = np.where(correct, (1.0 - cs) / 2.0, (1.0 + cs) / 2.0)
        r = float(np.sum(w * np.where(correct, 1.0, -1.0) * beta))
        return _half_log_ratio(1.0 + r, 1.0 - r)
    rt = float(np.sum(w[correct] * cs[correct]))
    rf = float(np.sum(w[~correct] * cs[~correct]))
    if rule == "adac1":
        return _half_log_ratio(1.0 + rt - rf, 1.0 - rt + rf)
    if rule == "adac2":
        return _half_log_ratio(rt, rf)
    if rule == "adac3":
        r2t = float(np.sum(w[correct] * cs[correct] ** 2))
        r2f = float(np.sum(w[~correct] * cs[~correct] ** 2))
        return _half_log_ratio(rt + rf + r2t - r2f, rt + rf - r2t + r2f)
    if rule == "csab":
        pos = y == 1
        wp, wn = float(w[pos].sum()), float(w[~pos].sum())
        b = float(w[pos & ~correct].sum())
        d = float(w[~pos & ~correct].sum())
        b = min(max(b, EPS_MIN * wp), (1 - EPS_MIN) * wp)
        d = min(max(d, EPS_MIN * wn), (1 - EPS_MIN) * wn)
        return csab_alpha_solve(b, d, c_fn, c_fp, wp, wn)
    raise ValueError(f"unknown alpha rule {rule!r}")


def _log_update(spec, alpha, y, correct, own, cs, fp, fn) -> np.ndarray:
    """Additive change of the log weights for one round."""
    yh = np.where(correct, 1.0, -1.0)  # y* h*
    rule = spec.update_rule
    if rule == "exp":
        return -alpha * yh
    if rule == "adacost":
        beta = np.where(correct, (1.0 - cs) / 2.0, (1.0 + cs) / 2.0)
        return -alpha * yh * beta
    if rule == "adaub":
        return -alpha * yh * np.where(y == 1, fn / fp, 1.0)
    if rule == "asym":
        return np.where(y == 1, 1.0, -1.0) * np.log(fn / fp) / (2.0 * spec.m) - alpha * yh
    if rule == "csb":
        aj = {0: 0.0, 1: 1.0, 2: alpha}[spec.j]
        return np.where(correct, -aj, np.log(own) + aj)
    if rule == "adac1":
        return -alpha * yh * cs
    if rule == "adac2":
        return np.log(own) - alpha * yh
    if rule == "adac3":
        return np.log(cs) - alpha * yh * cs
    if rule == "csab":
        return -alpha * yh * own
    raise ValueError(f"unknown update rule {rule!r}")


def boost_train(
    spec: BoostVariantSpec,
    base_config: TreeConfig = STUMP,
    data: Dataset | None = None,
    cost_model: CostModel | None = None,
    n_rounds: int = 100,
    sampler: SamplerSpec | None = None,
    seed: int = 0,
    member_threshold: str | None = None,
    validation: Dataset | None = None,
) -> BoostModel:
    """Train a boosted ensemble of weighted trees.

    Each round fits a weighted tree, measures the weighted error ``eps`` on
    the training set, derives ``alpha`` and reweights records. With a
    ``sampler`` every round trains on a resampled copy whose records carry
    the current weight of the record they came from (renormalized), while
    outcomes and ``eps`` are still taken on the original records. ``eps``
    is clamped to ``[1e-10, 1 - 1e-10]``; clamped rounds are noted in
    ``diagnostics``.
    """
    if data is None:
        raise ValueError("boost_train needs a training set")
    if n_rounds < 1:
        raise ValueError("n_rounds must be at least 1")
    if member_threshold not in (None, "tcs"):
        raise ValueError(f"unknown member threshold {member_threshold!r}")
    cm = cost_model if cost_model is not None else CostModel.class_dependent(1.0, 1.0)
    if spec.name == "csab" and not cm.is_class_dependent:
        raise ValueError("csab is defined for class-dependent costs only")
    y = data.y
    needs_both = spec.init_rule in ("sqrt_costs", "asym_root") or spec.update_rule in ("adaub", "asym") \
        or member_threshold == "tcs"
    fp, fn = cm.pairs(data, require="both" if needs_both else "own")
    own = np.where(y == 1, fn, fp)
    cs = own / own.max()
    c_fp, c_fn = cm.c_fp, cm.c_fn
    t_cs = fp / (fp + fn) if member_threshold == "tcs" else None

    logw = _init_log_weights(spec, y, own, fp, fn)
    trees, alphas, epsilons, diags = [], [], [], []
    for t in range(n_rounds):
        w = _weights(logw)
        if sampler is not None and sampler.kind != "none":
            rs = resample(sampler, data, cost_model, member_rng(seed, t))
            w_fit = w[rs.origin]
            tree = fit_tree(rs.data, w_fit / w_fit.sum(), base_config, cost_model,
                            member_rng(seed, t), validation)
        else:
            tree = fit_tree(data, w, base_config, cost_model, member_rng(seed, t), validation)
        leaves = tree.apply(data.X)
        if t_cs is not None:
            h = (weighted_leaf_probabilities(tree)[leaves] > t_cs).astype(np.int8)
        else:
            h = tree.label[leaves]
        correct = h == y
        raw = float(w[~correct].sum())
        eps = min(max(raw, EPS_MIN), 1.0 - EPS_MIN)
        if eps != raw:
            msg = f"round {t}: error {raw:.3g} clamped to {eps:.3g}"
            diags.append(msg)
            log.debug(msg)
        alpha = _alpha(spec, w, y, correct, own, cs, eps, c_fp, c_fn)
        logw = np.log(w) + _log_update(spec, alpha, y, correct, own, cs, fp, fn)
        trees.append(tree)
        alphas.append(alpha)
        epsilons.append(eps)
    return BoostModel(
        tuple(trees), np.array(alphas), np.array(epsilons), spec,
        c_fp, c_fn, member_threshold, sampler, ScoreCalibrator(), tuple(diags),
    )

"""Cost-sensitive resampling: under/over/hybrid sampling to the cost ratio, SMOTE, CPR."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .data import CostModel, Dataset, DatasetStats, concat

SAMPLER_KINDS = ("none", "under", "over_duplicate", "over_smote", "hybrid", "cpr")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def cs_ratio(stats: DatasetStats, cost_model: CostModel) -> float:
    """Cost-adjusted positive/negative ratio ``(|N+|/|N-|) * (C_FN/C_FP)``."""
    if not cost_model.is_class_dependent:
        raise ValueError("the cost ratio needs class-dependent costs; use CPR sampling for record costs")
    if stats.n_neg == 0:
        raise ValueError("the cost ratio is undefined without negative records")
    return stats.n_pos / stats.n_neg * cost_model.c_fn / cost_model.c_fp


@dataclass(frozen=True)
class SamplerSpec:
    """Named sampler. ``target_ratio=None`` means the cost ratio of the training set."""

    kind: str = "none"
    target_ratio: float | None = None
    smote_k: int = 5
    under_fraction: float = 0.5
    over_mode: str = "duplicate"
    out_size: int | None = None

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler {self.kind!r}")
        if self.target_ratio is not None and self.target_ratio <= 0:
            raise ValueError("target_ratio must be positive")
        if self.smote_k < 1:
            raise ValueError("smote_k must be at least 1")
        if not 0.0 <= self.under_fraction <= 1.0:
            raise ValueError("under_fraction must lie in [0, 1]")
        if self.over_mode not in ("duplicate", "smote"):
            raise ValueError(f"unknown oversampling mode {self.over_mode!r}")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "SamplerSpec":
        return cls(**d)


@dataclass(frozen=True, eq=False)
class Resampled:
    """Sampler output plus, for every output record, the input index it came from.

    Synthetic SMOTE records point at the positive record they were grown from.
    """

    data: Dataset
    origin: np.ndarray


def _under_idx(data: Dataset, target_ratio: float, rng) -> np.ndarray:
    pos = np.flatnonzero(data.y == 1)
    neg = np.flatnonzero(data.y == 0)
    keep = round_half_up(len(pos) / target_ratio)
    if keep > len(neg):
        raise ValueError(
            f"undersampling to ratio {target_ratio} would need {keep} negatives but only "
            f"{len(neg)} exist; use hybrid or oversampling"
        )
    chosen = np.sort(rng.choice(neg, keep, replace=False)) if keep < len(neg) else neg
    return np.sort(np.concatenate([pos, chosen]))


def undersample(data: Dataset, target_ratio: float, seed=None) -> Dataset:
    """Keep every positive and a uniform sample of ``round(|N+| / target_ratio)`` negatives."""
    return data.subset(_under_idx(data, target_ratio, _rng(seed)))


def _smote_records(data: Dataset, n_new: int, k: int, rng) -> tuple[Dataset, np.ndarray]:
    if any(data.categorical):
        raise ValueError("SMOTE needs numeric features only")
    pos = np.flatnonzero(data.y == 1)
    if len(pos) < k + 1:
        raise ValueError(f"SMOTE with k={k} needs at least {k + 1} positives, found {len(pos)}")
    Xp = data.X[pos]
    _, nbrs = cKDTree(Xp).query(Xp, k=k + 1)
    seeds = rng.integers(0, len(pos), n_new)
    picks = rng.integers(1, k + 1, n_new)
    gaps = rng.random((n_new, 1))
    seed_x = Xp[seeds]
    nb_x = Xp[nbrs[seeds, picks]]
    # seed minus a random fraction of the signed distance (seed - neighbour)
    X_new = seed_x - gaps * (seed_x - nb_x)
    origin = pos[seeds]
    take = lambda a: None if a is None else a[origin]
    start = int(data.ids.max()) + 1 if len(data) else 0
    synth = Dataset(
        X_new, np.ones(n_new, dtype=np.int8), take(data.fn_cost), take(data.fp_cost),
        np.arange(start, start + n_new), data.feature_names, data.categorical,
        data.categories, take(data.amount),
    )
    return synth, origin


def _over(data: Dataset, target_ratio: float, mode: str, k: int, rng) -> Resampled:
    pos = np.flatnonzero(data.y == 1)
    n_neg = int((data.y == 0).sum())
    want = round_half_up(target_ratio * n_neg)
    if want < len(pos):
        raise ValueError(
            f"oversampling to ratio {target_ratio} would need {want} positives but {len(pos)} "
            "already exist; use undersampling"
        )
    n_new = want - len(pos)
    base = np.arange(len(data))
    if n_new == 0:
        return Resampled(data, base)
    if mode == "duplicate":
        extra = rng.choice(pos, n_new, replace=True)
        origin = np.concatenate([base, extra])
        return Resampled(data.subset(origin), origin)
    if mode != "smote":
        raise ValueError(f"unknown oversampling mode {mode!r}")
    synth, origin = _smote_records(data, n_new, k, rng)
    return Resampled(concat([data, synth]), np.concatenate([base, origin]))


def oversample(data: Dataset, target_ratio: float, mode: str = "duplicate", smote_k: int = 5, seed=None) -> Dataset:
    """Add positives (copies or SMOTE syntheses) until ``round(target_ratio * |N-|)`` positives."""
    return _over(data, target_ratio, mode, smote_k, _rng(seed)).data


def smote(data: Dataset, n_new: int, k: int = 5, seed=None) -> Dataset:
    """``n_new`` synthetic positives, each on the segment from a positive toward one of its k nearest positives."""
    return _smote_records(data, n_new, k, _rng(seed))[0]


def _hybrid(data: Dataset, target_ratio: float, under_fraction: float, mode: str, k: int, rng) -> Resampled:
    n_pos = int(data.y.sum())
    n_neg = len(data) - n_pos
    if n_neg and n_pos / n_neg > target_ratio:
        raise ValueError("hybrid sampling only raises the positive/negative ratio")
    full_under = round_half_up(n_pos / target_ratio)
    n_remove = round_half_up(under_fraction * (n_neg - full_under))
    if n_remove > 0:
        idx = _under_idx(data, n_pos / (n_neg - n_remove), rng)
        data_u = data.subset(idx)
    else:
        idx = np.arange(len(data))
        data_u = data
    over = _over(data_u, target_ratio, mode, k, rng)
    return Resampled(over.data, idx[over.origin])


def hybrid_sample(data: Dataset, target_ratio: float, under_fraction: float = 0.5,
                  mode: str = "duplicate", smote_k: int = 5, seed=None) -> Dataset:
    """Remove negatives to close ``under_fraction`` of the gap to ``target_ratio``; oversample the rest."""
    return _hybrid(data, target_ratio, under_fraction, mode, smote_k, _rng(seed)).data


def acceptance_probabilities(data: Dataset, cost_model: CostModel) -> np.ndarray:
    c = cost_model.record_costs(data)
    return c / c.max()


def _cpr_idx(data: Dataset, cost_model: CostModel, out_size: int | None, rng) -> np.ndarray:
    acc = acceptance_probabilities(data, cost_model)
    n = len(data)
    if out_size is None:
        # one pass: a bootstrap of size n thinned by the acceptance probabilities
        draws = rng.integers(0, n, n)
        return draws[rng.random(n) < acc[draws]]
    out = []
    have = 0
    while have < out_size:
        batch = max(64, int(1.2 * (out_size - have) / max(acc.mean(), 1e-12)))
        draws = rng.integers(0, n, batch)
        kept = draws[rng.random(batch) < acc[draws]]
        out.append(kept)
        have += len(kept)
    return np.concatenate(out)[:out_size]


def cpr_sample(data: Dataset, cost_model: CostModel, out_size: int | None = None, seed=None) -> Dataset:
    """Cost-proportionate rejection sampling.

    Draws uniformly with replacement and accepts each draw with probability
    cost / max cost, until ``out_size`` acceptances. With ``out_size=None``
    a single bootstrap of ``len(data)`` draws is thinned instead, which
    makes equal costs reduce exactly to a bootstrap.
    """
    return data.subset(_cpr_idx(data, cost_model, out_size, _rng(seed)))


def resample(spec: SamplerSpec, data: Dataset, cost_model: CostModel | None, rng) -> Resampled:
    """Apply ``spec`` to ``data``."""
    rng = _rng(rng)
    if spec.kind == "none":
        return Resampled(data, np.arange(len(data)))
    if spec.kind == "cpr":
        idx = _cpr_idx(data, cost_model, spec.out_size, rng)
        return Resampled(data.subset(idx), idx)
    ratio = spec.target_ratio
    if ratio is None:
        if cost_model is None:
            raise ValueError("a cost model is needed to derive the sampling ratio")
        ratio = cs_ratio(data.stats(), cost_model)
    if spec.kind == "under":
        idx = _under_idx(data, ratio, rng)
        return Resampled(data.subset(idx), idx)
    if spec.kind in ("over_duplicate", "over_smote"):
        return _over(data, ratio, spec.kind.split("_")[1], spec.smote_k, rng)
    return _hybrid(data, ratio, spec.under_fraction, spec.over_mode, spec.smote_k, rng)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chi2_contingency

from csensemble.data import CostModel, DatasetStats
from csensemble.sampling import (
    SamplerSpec, acceptance_probabilities, cpr_sample, cs_ratio, hybrid_sample, oversample,
    resample, smote, undersample,
)

from conftest import make_data


def imbalanced(n_pos, n_neg, d=2, seed=0, **kw):
    rng = np.random.default_rng(seed)
    y = np.r_[np.ones(n_pos), np.zeros(n_neg)].astype(int)
    return make_data(rng.normal(size=(len(y), d)) + y[:, None], y, **kw)


def counts(d):
    return int(d.y.sum()), int((d.y == 0).sum())


# cs_ratio

def test_cs_ratio_examples():
    assert cs_ratio(DatasetStats(10, 90), CostModel.class_dependent(1, 9)) == pytest.approx(1.0)
    assert cs_ratio(DatasetStats(10, 90), CostModel.class_dependent(2, 2)) == pytest.approx(10 / 90)
    assert cs_ratio(DatasetStats(1, 99), CostModel.class_dependent(1, 20)) == pytest.approx(20 / 99)
    with pytest.raises(ValueError):
        cs_ratio(DatasetStats(1, 99), CostModel.record_dependent(1, 1))


# undersampling

def test_undersample_examples():
    d = imbalanced(10, 90)
    assert counts(undersample(d, 1.0, seed=0)) == (10, 10)
    same = undersample(d, 10 / 90, seed=0)
    assert sorted(same.ids.tolist()) == sorted(d.ids.tolist())


def test_undersample_deterministic():
    d = imbalanced(5, 97)
    a, b = undersample(d, 0.25, seed=3), undersample(d, 0.25, seed=3)
    assert counts(a) == (5, 20) and a.ids.tolist() == b.ids.tolist()


def test_undersample_too_far_rejected():
    with pytest.raises(ValueError, match="hybrid"):
        undersample(imbalanced(10, 20), 0.1)


# oversampling

def test_oversample_duplicate():
    d = imbalanced(10, 90)
    o = oversample(d, 1.0, seed=0)
    assert counts(o) == (90, 90)
    assert set(o.ids.tolist()) == set(d.ids.tolist())
    assert counts(oversample(d, 10 / 90, seed=0)) == (10, 90)


@given(st.integers(0, 10**6))
def test_smote_points_between_seed_and_neighbour(seed):
    d = imbalanced(12, 20, d=3, seed=seed)
    pos_X = d.X[d.y == 1]
    s = smote(d, 50, k=3, seed=seed)
    assert (s.y == 1).all()
    for x in s.X:
        # some positive pair brackets every attribute of the synthetic point
        lo = np.minimum(pos_X[:, None, :], pos_X[None, :, :])
        hi = np.maximum(pos_X[:, None, :], pos_X[None, :, :])
        assert ((lo <= x + 1e-12) & (x <= hi + 1e-12)).all(axis=2).any()


def test_smote_segment_property_with_origins():
    d = imbalanced(12, 20, d=3, seed=1)
    r = resample(SamplerSpec("over_smote", 1.0, smote_k=3), d, None, 5)
    synth = r.data.X[len(d):]
    seeds = d.X[r.origin[len(d):]]
    pos_X = d.X[d.y == 1]
    for x, s in zip(synth, seeds):
        # the point lies on a segment from its seed toward some positive
        ok = False
        for nb in pos_X:
            lo, hi = np.minimum(s, nb), np.maximum(s, nb)
            if ((lo - 1e-12 <= x) & (x <= hi + 1e-12)).all():
                ok = True
                break
        assert ok


def test_smote_inherits_costs():
    d = imbalanced(8, 8, fn_cost=np.arange(16.0), fp_cost=np.ones(16))
    r = resample(SamplerSpec("over_smote", 2.0, smote_k=2), d, None, 0)
    np.testing.assert_array_equal(r.data.fn_cost[len(d):], d.fn_cost[r.origin[len(d):]])


def test_smote_errors():
    with pytest.raises(ValueError):
        smote(imbalanced(3, 10), 5, k=5)
    cat = imbalanced(10, 10, categorical=(False, True))
    with pytest.raises(ValueError):
        smote(cat, 5, k=2)


# hybrid

def test_hybrid_degenerate_fractions():
    d = imbalanced(10, 90)
    assert counts(hybrid_sample(d, 1.0, 1.0, seed=4)) == counts(undersample(d, 1.0, seed=4))
    assert counts(hybrid_sample(d, 1.0, 0.0, seed=4)) == counts(oversample(d, 1.0, seed=4))


def test_hybrid_half():
    p, n = counts(hybrid_sample(imbalanced(10, 90), 1.0, 0.5, seed=0))
    assert 10 < p < 90 and 10 < n < 90 and abs(p - n) <= 1


# CPR

def test_cpr_acceptance_probabilities():
    d = imbalanced(2, 2)
    acc = acceptance_probabilities(d, CostModel.class_dependent(1, 4))
    assert acc.tolist() == [1.0, 1.0, 0.25, 0.25]


def test_cpr_equal_costs_is_bootstrap():
    d = imbalanced(10, 90)
    s = cpr_sample(d, CostModel.class_dependent(1, 1), seed=np.random.default_rng(5))
    boot = np.random.default_rng(5).integers(0, len(d), len(d))
    assert s.ids.tolist() == d.ids[boot].tolist()


def test_cpr_class_mix():
    d = imbalanced(10, 90)
    s = cpr_sample(d, CostModel.class_dependent(1, 9), out_size=100_000, seed=0)
    assert len(s) == 100_000
    assert abs(s.y.mean() - 0.5) <= 0.01


def test_cpr_record_costs_use_global_max():
    d = imbalanced(2, 2, fn_cost=np.array([4.0, 2.0, 0, 0]), fp_cost=np.array([0, 0, 1.0, 1.0]))
    acc = acceptance_probabilities(d, CostModel.record_dependent())
    assert acc.tolist() == [1.0, 0.5, 0.25, 0.25]


def test_cpr_equal_costs_class_mix_matches_bootstrap():
    # class counts of 20 CPR runs against 20 bootstraps, pooled in one contingency test
    d = imbalanced(10, 90)
    table = np.zeros((2, 2))
    for run in range(20):
        s = cpr_sample(d, CostModel.class_dependent(2, 2), out_size=2000, seed=run)
        b = d.y[np.random.default_rng(1000 + run).integers(0, len(d), 2000)]
        table[0] += [s.y.sum(), 2000 - s.y.sum()]
        table[1] += [b.sum(), 2000 - b.sum()]
    assert chi2_contingency(table).pvalue > 0.01


# determinism and spec handling

@pytest.mark.parametrize("kind", ["under", "over_duplicate", "over_smote", "hybrid", "cpr"])
def test_resample_deterministic_and_keeps_costs(kind):
    d = imbalanced(10, 60, fn_cost=np.full(70, 5.0), fp_cost=np.full(70, 1.0))
    cm = CostModel.class_dependent(1.0, 5.0)
    a = resample(SamplerSpec(kind), d, cm, 11)
    b = resample(SamplerSpec(kind), d, cm, 11)
    np.testing.assert_array_equal(a.data.X, b.data.X)
    np.testing.assert_array_equal(a.origin, b.origin)
    assert a.data.fn_cost is not None and a.data.fp_cost is not None


def test_default_ratio_is_cost_ratio():
    d = imbalanced(10, 90)
    r = resample(SamplerSpec("under"), d, CostModel.class_dependent(1, 9), 0)
    assert counts(r.data) == (10, 10)


def test_sampler_spec_validation():
    with pytest.raises(ValueError):
        SamplerSpec("bogus")
    with pytest.raises(ValueError):
        SamplerSpec("under", target_ratio=0)
    assert SamplerSpec.from_dict(SamplerSpec("cpr").to_dict()) == SamplerSpec("cpr")

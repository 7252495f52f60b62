import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from csensemble.data import CostModel
from csensemble.metrics import auc, evaluate

from conftest import make_data


def brute_auc(y, s):
    pos, neg = s[y == 1], s[y == 0]
    wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
    return wins / (len(pos) * len(neg))


def test_auc_perfect_and_reversed():
    y = np.array([0, 0, 1, 1])
    assert auc(y, [0.1, 0.2, 0.8, 0.9]) == 1.0
    assert auc(y, [0.9, 0.8, 0.2, 0.1]) == 0.0
    assert auc(y, [0.5] * 4) == 0.5


def test_auc_single_class_is_nan():
    assert np.isnan(auc([1, 1], [0.2, 0.3]))


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 5)), min_size=2, max_size=40))
def test_auc_matches_pair_count(pairs):
    y = np.array([p[0] for p in pairs])
    s = np.array([p[1] for p in pairs], dtype=float)
    if y.min() == y.max():
        return
    assert auc(y, s) == pytest.approx(brute_auc(y, s))
    # strictly monotone transforms leave it unchanged
    assert auc(y, np.exp(3 * s) - 7) == pytest.approx(auc(y, s))


def _data(y, **kw):
    return make_data(np.zeros((len(y), 1)), y, **kw)


def test_all_negative_predictor():
    y = np.array([1, 0, 1, 0, 0])
    fn = np.array([5.0, 0, 7.0, 0, 0])
    d = _data(y, fn_cost=fn, fp_cost=np.where(y == 0, 1.0, 0.0), amount=fn)
    r = evaluate(y, np.zeros(5, dtype=int), d, CostModel.record_dependent(), np.zeros(5),
                 ("tpr", "fpr", "auc", "total_cost", "totf_pct"))
    assert r.total_cost == 12.0 and r.totf_pct == 0.0 and r.tpr == 0.0 and r.fpr == 0.0


def test_all_correct_costs_nothing():
    y = np.array([1, 0, 0, 1])
    r = evaluate(y, y, _data(y), CostModel.class_dependent(1, 9), y.astype(float))
    assert r.total_cost == 0.0 and r.auc == 1.0


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
def test_metric_consistency(pairs):
    y = np.array([p[0] for p in pairs])
    pred = np.array([p[1] for p in pairs])
    r = evaluate(y, pred, _data(y), CostModel.class_dependent(2.0, 3.0), metrics=("tpr", "fpr", "total_cost"))
    assert r.tp + r.fp + r.tn + r.fn == r.n == len(y)
    assert round(r.tpr * (r.tp + r.fn)) == r.tp
    assert round(r.fpr * (r.fp + r.tn)) == r.fp
    assert r.total_cost == 2.0 * r.fp + 3.0 * r.fn >= 0


def test_roi_and_cost_pct():
    y = np.array([1, 1, 0, 0])
    amt = np.array([20.0, 5.0, 0.0, 0.0])
    d = _data(y, fn_cost=np.array([20.0, 5.0, 1.0, 1.0]), fp_cost=np.full(4, 1.0), amount=amt)
    pred = np.array([1, 0, 1, 0])
    r = evaluate(y, pred, d, CostModel.record_dependent(), metrics=("roi", "cost_pct"), contact_cost=2.0)
    assert r.profit == pytest.approx(20.0 - 4.0)
    assert r.roi == pytest.approx(16.0 / 4.0)
    # baseline cost 25; campaign pays 1 per contact plus the missed 5
    assert r.cost_pct == pytest.approx(100 * (25 - 7) / 25)


def test_evaluate_errors():
    y = np.array([1, 0])
    with pytest.raises(ValueError, match="AUC"):
        evaluate(y, y, _data(y), CostModel.class_dependent(1, 1))
    with pytest.raises(ValueError, match="ROI"):
        evaluate(y, y, _data(y), CostModel.class_dependent(1, 1), metrics=("roi",))
    with pytest.raises(ValueError):
        evaluate(y, y[:1], _data(y), CostModel.class_dependent(1, 1), metrics=())

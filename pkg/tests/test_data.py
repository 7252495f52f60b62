import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from csensemble.data import (
    CostModel, DataError, Dataset, initial_cost_weights, load_csv, normalize,
    reduce_cost_matrix, stratified_split,
)
from csensemble.decision import t_cs

from conftest import make_data


# reduce_cost_matrix: layout [[TP, FN], [FP, TN]]

@pytest.mark.parametrize("cm, fp, fn", [
    ([[0, 10], [1, 0]], 1, 10),
    ([[2, 12], [3, 1]], 2, 10),
    ([[0, 1], [1, 0]], 1, 1),
])
def test_reduce_cost_matrix_examples(cm, fp, fn):
    m = reduce_cost_matrix(cm)
    assert (m.c_fp, m.c_fn) == (fp, fn)


@pytest.mark.parametrize("cm", [[[1, 1], [1, 0]], [[0, 1], [2, 2]], [[3, 1], [1, 0]]])
def test_reduce_cost_matrix_rejects_degenerate(cm):
    with pytest.raises(ValueError, match="degenerate"):
        reduce_cost_matrix(cm)


@given(st.lists(st.floats(0, 100), min_size=4, max_size=4))
def test_reduction_preserves_decision(vals):
    c_tp, c_tn = vals[0], vals[1]
    c_fn, c_fp = c_tp + 1 + vals[2], c_tn + 1 + vals[3]
    m = reduce_cost_matrix([[c_tp, c_fn], [c_fp, c_tn]])
    for p in np.linspace(0.0, 1.0, 21):
        # expected-cost rule on the original matrix minus its diagonal
        rule = (c_fp - c_tn) * (1 - p) < (c_fn - c_tp) * p
        assert rule == (p > t_cs(m.c_fp, m.c_fn)) or np.isclose(p, t_cs(m.c_fp, m.c_fn))


def test_zero_reduced_cost_rejected():
    with pytest.raises(ValueError):
        CostModel.class_dependent(0.0, 1.0)


# initial_cost_weights

def test_initial_weights_class_costs():
    d = make_data(np.zeros((4, 1)), [1, 1, 0, 0])
    w = initial_cost_weights(d, CostModel.class_dependent(1.0, 4.0))
    np.testing.assert_allclose(w, [0.4, 0.4, 0.1, 0.1])


def test_initial_weights_equal_costs_uniform():
    d = make_data(np.zeros((5, 1)), [1, 0, 0, 0, 1])
    np.testing.assert_allclose(initial_cost_weights(d, CostModel.class_dependent(3.0, 3.0)), 0.2)


def test_initial_weights_record_costs():
    d = make_data(np.zeros((3, 1)), [1, 1, 0], fn_cost=[2, 6, 0], fp_cost=[0, 0, 2])
    w = initial_cost_weights(d, CostModel.record_dependent())
    np.testing.assert_allclose(w, [0.2, 0.6, 0.2])


def test_unresolvable_cost_names_record():
    d = make_data(np.zeros((2, 1)), [1, 0], fn_cost=[np.nan, 1.0], fp_cost=[1.0, 1.0], ids=[17, 18])
    with pytest.raises(DataError, match="17"):
        initial_cost_weights(d, CostModel.record_dependent())


@given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=50))
def test_normalize_idempotent(raw):
    w = normalize(raw)
    assert abs(w.sum() - 1) < 1e-12
    assert np.max(np.abs(normalize(w) - w)) <= 1e-15


# stratified_split

def test_split_exact_divisibility():
    y = np.r_[np.ones(10), np.zeros(90)].astype(int)
    s = stratified_split(make_data(np.zeros((100, 1)), y), (0.6, 0.2, 0.2), 0)
    assert [len(p) for p in s] == [60, 20, 20]
    assert [int(p.y.sum()) for p in s] == [6, 2, 2]


def test_split_identity():
    d = make_data(np.arange(10.0), [1, 0] * 5)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s = stratified_split(d, (1, 0, 0), 3)
    assert len(s.train) == 10 and len(s.valid) == 0 and len(s.test) == 0


def test_split_deterministic():
    y = np.r_[np.ones(5), np.zeros(92)].astype(int)
    d = make_data(np.arange(97.0), y)
    a = stratified_split(d, (0.5, 0.25, 0.25), 42)
    b = stratified_split(d, (0.5, 0.25, 0.25), 42)
    assert a.assignment.tobytes() == b.assignment.tobytes()


def test_split_warns_on_part_without_positives():
    d = make_data(np.arange(20.0), [1] + [0] * 19)
    with pytest.warns(UserWarning):
        s = stratified_split(d, (0.6, 0.2, 0.2), 0)
    assert s.warnings


@given(st.integers(0, 40), st.integers(1, 200), st.integers(0, 2**31))
def test_split_partition_properties(n_pos, n_neg, seed):
    y = np.r_[np.ones(n_pos), np.zeros(n_neg)].astype(int)
    d = make_data(np.arange(len(y), dtype=float), y)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s = stratified_split(d, (0.6, 0.2, 0.2), seed)
    ids = np.concatenate([p.ids for p in s])
    assert sorted(ids.tolist()) == list(range(len(y)))
    for p, f in zip(s, (0.6, 0.2, 0.2)):
        assert abs(p.y.sum() - f * n_pos) <= 1


def test_split_bad_fractions():
    with pytest.raises(ValueError):
        stratified_split(make_data(np.zeros((4, 1)), [0, 1, 0, 1]), (0.5, 0.5, 0.5))


# dataset and loader

def test_dataset_rejects_bad_labels():
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), np.array([0, 2]))


def test_dataset_rejects_negative_costs():
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), np.array([0, 1]), fn_cost=np.array([-1.0, 1.0]))


def test_stats(small_data):
    st_ = small_data.stats()
    assert st_.n_pos + st_.n_neg == len(small_data)
    assert 0 <= st_.base_rate <= 1


def test_load_csv(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("id,a,color,cls,fn\n5,1.5,red,yes,3\n6,2.5,blue,no,0\n7,0.5,red,no,0\n")
    d = load_csv(p, "cls", positive="yes", fn_cost="fn", id_column="id", categorical=["color"])
    assert d.y.tolist() == [1, 0, 0]
    assert d.ids.tolist() == [5, 6, 7]
    assert d.feature_names == ("a", "color")
    assert d.categorical == (False, True)
    assert d.fn_cost.tolist() == [3.0, 0.0, 0.0]
    # the schema pins category codes for later files
    q = tmp_path / "e.csv"
    q.write_text("id,a,color\n1,0.1,blue\n")
    e = load_csv(q, "cls", id_column="id", categorical=["color"], fn_cost=None,
                 schema=d.schema(), require_label=False)
    assert d.categories[1][int(e.X[0, 1])] == "blue"


def test_load_csv_errors(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b\n1,x\n")
    with pytest.raises(DataError):
        load_csv(p, "cls")
    with pytest.raises(DataError, match="non-numeric"):
        load_csv(p, "a", fn_cost="b")
    with pytest.raises(FileNotFoundError):
        load_csv(tmp_path / "missing.csv", "a")
    d = load_csv(p, "a")
    assert d.categorical == (True,)

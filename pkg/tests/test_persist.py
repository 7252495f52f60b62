import numpy as np
import pytest

from csensemble.data import CostModel, stratified_split
from csensemble.persist import ModelFormatError, dumps, load_model, loads, save_model
from csensemble.pipeline import train_pipeline
from csensemble.presets import preset
from csensemble.synthetic import make_imbalanced

CM = CostModel.class_dependent(1.0, 9.0)


@pytest.fixture(scope="module")
def forest():
    data = make_imbalanced(1000, seed=0)
    return train_pipeline(preset("rf", n_members=100), data, None, CM, seed=0), data


def test_forest_round_trip(forest, tmp_path):
    model, data = forest
    path = tmp_path / "m.json"
    save_model(model, path)
    back = load_model(path)
    np.testing.assert_array_equal(back.predict(data), model.predict(data))
    np.testing.assert_array_equal(back.score(data), model.score(data))
    assert dumps(back) == path.read_text()


def test_truncated_file_names_offset(forest, tmp_path):
    text = dumps(forest[0])
    path = tmp_path / "cut.json"
    path.write_text(text[:500])
    with pytest.raises(ModelFormatError, match="byte offset 500"):
        load_model(path)


def test_empty_and_missing_paths(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_model("")
    with pytest.raises(FileNotFoundError):
        load_model(tmp_path / "none.json")


def test_version_and_format_checks(forest):
    text = dumps(forest[0])
    with pytest.raises(ModelFormatError, match="version"):
        loads(text.replace('"version":1', '"version":99'))
    with pytest.raises(ModelFormatError, match="not a model"):
        loads('{"format":"other"}')
    with pytest.raises(ModelFormatError, match="schema"):
        loads('{"format":"csensemble-model","version":1,"model":{}}')


@pytest.mark.parametrize("name, policy", [
    ("ncsab", "default"), ("ab", "mta_tmthr"), ("cprbg", "dmecc_tcs"), ("wbg", "default"),
    ("dm-bg", "default"), ("csb1", "mec"),
])
def test_pipelines_round_trip(name, policy):
    data = make_imbalanced(600, seed=1)
    split = stratified_split(data, (0.6, 0.2, 0.2), 1)
    spec = preset(name, n_members=10, policy=policy)
    m = train_pipeline(spec, split.train, split.valid, CM, seed=1)
    back = loads(dumps(m))
    np.testing.assert_array_equal(back.predict(split.test), m.predict(split.test))
    assert dumps(back) == dumps(m)


def test_calibrated_boost_round_trip():
    data = make_imbalanced(600, seed=2)
    split = stratified_split(data, (0.6, 0.2, 0.2), 2)
    for cal in ("platt", "isotonic", "logistic_correction"):
        spec = preset("ab", n_members=10, score_calibrator=cal, policy="dmecc_tcs")
        m = train_pipeline(spec, split.train, split.valid, CM, seed=2)
        back = loads(dumps(m))
        np.testing.assert_array_equal(back.score(split.test), m.score(split.test))

import numpy as np
import pytest
from hypothesis import settings

from csensemble.data import Dataset

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")


def make_data(X, y, **kw) -> Dataset:
    return Dataset(np.asarray(X, dtype=float), np.asarray(y), **kw)


@pytest.fixture
def small_data():
    rng = np.random.default_rng(7)
    n = 200
    y = (rng.random(n) < 0.2).astype(int)
    X = rng.normal(size=(n, 3)) + y[:, None] * 1.5
    return make_data(X, y)

"""Synthetic imbalanced datasets for tests, benchmarks and demos."""
from __future__ import annotations

import numpy as np

from .data import Dataset


def make_imbalanced(
    n: int = 5000,
    pos_frac: float = 0.1,
    n_features: int = 5,
    n_informative: int = 3,
    separation: float = 1.5,
    seed: int = 0,
    amount: bool = False,
) -> Dataset:
    """Two Gaussian classes with unit covariance.

    Positives are shifted by ``separation`` along each informative feature
    divided by ``sqrt(n_informative)``, so the class means sit
    ``separation`` apart. The positive count is ``round(n * pos_frac)``.
    With ``amount`` each record also carries a log-normal amount
    (about 100 on average), used as record-dependent ``C_FN``.
    """
    if not 0 < pos_frac < 1:
        raise ValueError("pos_frac must lie in (0, 1)")
    if n_informative > n_features:
        raise ValueError("n_informative cannot exceed n_features")
    rng = np.random.default_rng(seed)
    n_pos = int(round(n * pos_frac))
    y = np.zeros(n, dtype=np.int8)
    y[rng.permutation(n)[:n_pos]] = 1
    X = rng.standard_normal((n, n_features))
    X[y == 1, :n_informative] += separation / np.sqrt(n_informative)
    amt = None
    if amount:
        amt = np.round(rng.lognormal(np.log(100.0) - 0.5, 1.0, n), 2)
    return Dataset(X, y, fn_cost=amt, amount=amt)

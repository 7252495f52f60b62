"""Evaluation metrics: confusion rates, AUC, total cost and savings measures."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import rankdata

from .data import CostModel, Dataset


def auc(y, scores) -> float:
    """Mann-Whitney AUC; tied scores count one half."""
    y = np.asarray(y)
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != y.shape:
        raise ValueError("need one score per record")
    n_pos = int((y == 1).sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    r = rankdata(s)
    u = r[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class MetricsReport:
    """Test-set metrics; savings measures are ``None`` when not requested."""

    n: int
    tp: int
    fp: int
    tn: int
    fn: int
    tpr: float
    fpr: float
    auc: float | None
    total_cost: float
    profit: float | None = None
    roi: float | None = None
    cost_pct: float | None = None
    totf_pct: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _rate(a: int, b: int) -> float:
    return a / (a + b) if a + b else 0.0


def evaluate(
    y,
    pred,
    data: Dataset,
    cost_model: CostModel,
    scores=None,
    metrics=("tpr", "fpr", "auc", "total_cost"),
    contact_cost: float | None = None,
) -> MetricsReport:
    """Score predictions ``pred`` of ``data`` (true labels ``y``).

    ``roi`` treats predicted positives as contacted: profit is the summed
    ``amount`` of contacted positives minus ``contact_cost`` per contact,
    and ROI is profit over total contact cost. ``cost_pct`` is the percent
    reduction of cost against predicting everyone negative, every predicted
    positive costing ``C_FP``. ``totf_pct`` is the percent of the positives'
    summed ``amount`` caught as true positives.
    """
    y = np.asarray(y)
    pred = np.asarray(pred)
    if y.shape != pred.shape or len(y) != len(data):
        raise ValueError("labels, predictions and dataset must align")
    tp = int(((pred == 1) & (y == 1)).sum())
    fp = int(((pred == 1) & (y == 0)).sum())
    tn = int(((pred == 0) & (y == 0)).sum())
    fn = int(((pred == 0) & (y == 1)).sum())
    c_fp, c_fn = cost_model.pairs(data, require="own")
    total = float(c_fp[(pred == 1) & (y == 0)].sum() + c_fn[(pred == 0) & (y == 1)].sum())
    a = None
    if "auc" in metrics:
        if scores is None:
            raise ValueError("AUC needs scores")
        a = auc(y, scores)
    profit = roi = cost_pct = totf = None
    if "roi" in metrics or "profit" in metrics:
        if data.amount is None or contact_cost is None:
            raise ValueError("ROI needs an amount column and a contact cost")
        contacted = pred == 1
        spend = contact_cost * int(contacted.sum())
        profit = float(data.amount[contacted & (y == 1)].sum() - spend)
        roi = profit / spend if spend else 0.0
    if "cost_pct" in metrics:
        fp_all, fn_all = cost_model.pairs(data, require="both")
        baseline = float(fn_all[y == 1].sum())
        campaign = float(fp_all[pred == 1].sum() + fn_all[(pred == 0) & (y == 1)].sum())
        cost_pct = 100.0 * (baseline - campaign) / baseline if baseline else 0.0
    if "totf_pct" in metrics:
        amt = data.amount if data.amount is not None else c_fn
        tot = float(amt[y == 1].sum())
        totf = 100.0 * float(amt[(pred == 1) & (y == 1)].sum()) / tot if tot else 0.0
    return MetricsReport(
        len(y), tp, fp, tn, fn, _rate(tp, fn), _rate(fp, tn), a, total,
        profit, roi, cost_pct, totf,
    )

"""Run many methods on shared splits and rank them."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import CostModel, Dataset, stratified_split
from .metrics import MetricsReport, evaluate
from .pipeline import MethodSpec, train_pipeline

_AVERAGED = ("tpr", "fpr", "auc", "total_cost", "profit", "roi", "cost_pct", "totf_pct")
_HIGHER_IS_BETTER = {"tpr", "auc", "profit", "roi", "cost_pct", "totf_pct"}


@dataclass(frozen=True)
class GridRow:
    method: str
    metrics: dict
    reports: tuple


def _label(spec: MethodSpec) -> str:
    parts = [spec.name or spec.ensemble]
    if spec.policy != "default":
        parts.append(spec.policy)
    if spec.vote_rule != "uniform":
        parts.append(spec.vote_rule)
    if spec.score_calibrator != "none":
        parts.append(spec.score_calibrator)
    if spec.metacost:
        parts.append("metacost")
    return "+".join(parts)


def _mean(values):
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def grid_run(
    methods: list[MethodSpec],
    data: Dataset,
    cost_model: CostModel,
    seeds=(0, 1, 2),
    fractions=(0.6, 0.2, 0.2),
    metrics=("tpr", "fpr", "auc", "total_cost"),
    sort_by: str = "total_cost",
    fpr_cap: float | None = None,
    workers: int = 1,
    contact_cost: float | None = None,
) -> list[GridRow]:
    """Train and evaluate every method on each split seed, average, rank.

    Each seed gives a different stratified split; metrics are averaged over
    seeds. Rows whose mean FPR exceeds ``fpr_cap`` are dropped. Results do
    not depend on ``workers``: ties in ``sort_by`` keep the listed order.
    """
    if not methods:
        raise ValueError("the grid needs at least one method")
    if sort_by not in _AVERAGED:
        raise ValueError(f"cannot sort by {sort_by!r}")
    splits = [stratified_split(data, fractions, seed) for seed in seeds]

    def run(job):
        i, s = job
        spec, split = methods[i], splits[s]
        model = train_pipeline(spec, split.train, split.valid, cost_model, seeds[s])
        test = split.test
        return evaluate(test.y, model.predict(test), test, cost_model,
                        model.score(test) if "auc" in metrics else None, metrics, contact_cost)

    jobs = [(i, s) for i in range(len(methods)) for s in range(len(splits))]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(run, jobs))
    else:
        reports = [run(j) for j in jobs]

    rows = []
    for i, spec in enumerate(methods):
        reps: list[MetricsReport] = reports[i * len(splits):(i + 1) * len(splits)]
        mean = {k: _mean(getattr(r, k) for r in reps) for k in _AVERAGED}
        rows.append(GridRow(_label(spec), mean, tuple(reps)))
    if fpr_cap is not None:
        rows = [r for r in rows if r.metrics["fpr"] <= fpr_cap]
    sign = -1.0 if sort_by in _HIGHER_IS_BETTER else 1.0
    key = lambda r: (r.metrics[sort_by] is None, sign * (r.metrics[sort_by] or 0.0))
    return sorted(rows, key=key)


def format_table(rows: list[GridRow], columns=("total_cost", "tpr", "fpr", "auc")) -> str:
    width = max([len("method")] + [len(r.method) for r in rows])
    head = f"{'method':<{width}}  " + "  ".join(f"{c:>12}" for c in columns)
    lines = [head]
    for r in rows:
        cells = []
        for c in columns:
            v = r.metrics.get(c)
            cells.append(f"{'-':>12}" if v is None else f"{v:>12.4f}")
        lines.append(f"{r.method:<{width}}  " + "  ".join(cells))
    return "\n".join(lines)

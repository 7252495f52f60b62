"""Datasets, cost models, cost weights and stratified splitting."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class DataError(ValueError):
    """Raised for malformed datasets or unresolvable record costs."""


def _frozen(a: np.ndarray | None) -> np.ndarray | None:
    if a is None:
        return None
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Binary-labelled records with optional per-record costs.

    Categorical columns hold integer token codes into ``categories[j]``;
    numeric columns hold float64 values. Label 1 is the positive (minority)
    class.
    """

    X: np.ndarray
    y: np.ndarray
    fn_cost: np.ndarray | None = None
    fp_cost: np.ndarray | None = None
    ids: np.ndarray | None = None
    feature_names: tuple[str, ...] = ()
    categorical: tuple[bool, ...] = ()
    categories: tuple[tuple[str, ...], ...] = ()
    amount: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DataError("X must be two-dimensional")
        n, d = X.shape
        y = np.asarray(self.y)
        if y.shape != (n,):
            raise DataError(f"expected {n} labels, got shape {y.shape}")
        if n and not np.isin(y, (0, 1)).all():
            raise DataError("labels must be 0 or 1")
        y = y.astype(np.int8)
        ids = np.arange(n, dtype=np.int64) if self.ids is None else np.asarray(self.ids, dtype=np.int64)
        if ids.shape != (n,):
            raise DataError("ids must have one entry per record")
        for name in ("fn_cost", "fp_cost", "amount"):
            v = getattr(self, name)
            if v is None:
                continue
            v = np.asarray(v, dtype=np.float64)
            if v.shape != (n,):
                raise DataError(f"{name} must have one entry per record")
            if name != "amount" and (v[~np.isnan(v)] < 0).any():
                raise DataError(f"{name} must be nonnegative")
            object.__setattr__(self, name, _frozen(v))
        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(d))
        cat = tuple(bool(c) for c in self.categorical) or (False,) * d
        cats = tuple(tuple(c) for c in self.categories) or ((),) * d
        if not (len(names) == len(cat) == len(cats) == d):
            raise DataError("schema length does not match feature count")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "ids", _frozen(ids))
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "categorical", cat)
        object.__setattr__(self, "categories", cats)

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        pick = lambda a: None if a is None else a[idx]
        return Dataset(
            self.X[idx], self.y[idx], pick(self.fn_cost), pick(self.fp_cost), self.ids[idx],
            self.feature_names, self.categorical, self.categories, pick(self.amount),
        )

    def with_labels(self, y) -> "Dataset":
        return Dataset(
            self.X, y, self.fn_cost, self.fp_cost, self.ids,
            self.feature_names, self.categorical, self.categories, self.amount,
        )

    def stats(self) -> "DatasetStats":
        n_pos = int(self.y.sum())
        return DatasetStats(n_pos, len(self) - n_pos)

    def schema(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "categorical": list(self.categorical),
            "categories": [list(c) for c in self.categories],
        }


def concat(parts: Sequence[Dataset]) -> Dataset:
    first = parts[0]
    opt = lambda name: (
        None if any(getattr(p, name) is None for p in parts)
        else np.concatenate([getattr(p, name) for p in parts])
    )
    return Dataset(
        np.vstack([p.X for p in parts]), np.concatenate([p.y for p in parts]),
        opt("fn_cost"), opt("fp_cost"), np.concatenate([p.ids for p in parts]),
        first.feature_names, first.categorical, first.categories, opt("amount"),
    )


@dataclass(frozen=True)
class DatasetStats:
    n_pos: int
    n_neg: int

    @property
    def n(self) -> int:
        return self.n_pos + self.n_neg

    @property
    def base_rate(self) -> float:
        return self.n_pos / self.n if self.n else 0.0


@dataclass(frozen=True)
class CostModel:
    """Misclassification costs, either one pair per class or one pair per record.

    A record-dependent model reads ``fn_cost``/``fp_cost`` from the dataset;
    ``c_fn``/``c_fp`` then act as fallbacks for a missing column, which covers
    mixed specifications such as a constant overhead ``C_FP`` with an
    amount-valued ``C_FN``.
    """

    kind: str = "class"
    c_fp: float | None = 1.0
    c_fn: float | None = 1.0

    def __post_init__(self):
        if self.kind not in ("class", "record"):
            raise ValueError(f"unknown cost model kind {self.kind!r}")
        for name in ("c_fp", "c_fn"):
            v = getattr(self, name)
            if v is None:
                if self.kind == "class":
                    raise ValueError(f"class-dependent costs need {name}")
                continue
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be strictly positive, got {v}")

    @classmethod
    def class_dependent(cls, c_fp: float, c_fn: float) -> "CostModel":
        return cls("class", float(c_fp), float(c_fn))

    @classmethod
    def record_dependent(cls, c_fp: float | None = None, c_fn: float | None = None) -> "CostModel":
        return cls("record", c_fp, c_fn)

    @property
    def is_class_dependent(self) -> bool:
        return self.kind == "class"

    def pairs(self, data: Dataset, require: str = "both") -> tuple[np.ndarray, np.ndarray]:
        """Resolve per-record ``(C_FP, C_FN)`` arrays.

        ``require`` selects which entries must be resolvable: ``"both"`` for
        every record, ``"own"`` only the cost of misclassifying each record
        (``C_FN`` for positives, ``C_FP`` for negatives).
        """
        n = len(data)
        if self.kind == "class":
            return np.full(n, self.c_fp), np.full(n, self.c_fn)
        fp = _column_or_default(data.fp_cost, self.c_fp, n)
        fn = _column_or_default(data.fn_cost, self.c_fn, n)
        pos = data.y == 1
        if require == "both":
            needed = np.ones(n, dtype=bool), np.ones(n, dtype=bool)
        else:
            needed = ~pos, pos
        for arr, mask, name in ((fp, needed[0], "fp_cost"), (fn, needed[1], "fn_cost")):
            bad = mask & ~(np.isfinite(arr) & (arr > 0))
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise DataError(
                    f"record id {int(data.ids[i])}: {name} is missing or not strictly positive"
                )
        return fp, fn

    def record_costs(self, data: Dataset) -> np.ndarray:
        """Cost of misclassifying each record: ``C_FN`` if positive, else ``C_FP``."""
        fp, fn = self.pairs(data, require="own")
        return np.where(data.y == 1, fn, fp)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "c_fp": self.c_fp, "c_fn": self.c_fn}

    @classmethod
    def from_dict(cls, d: dict) -> "CostModel":
        return cls(d["kind"], d.get("c_fp"), d.get("c_fn"))


def _column_or_default(col, default, n):
    if col is None:
        return np.full(n, np.nan if default is None else default)
    out = np.array(col, dtype=np.float64)
    if default is not None:
        out[np.isnan(out)] = default
    return out


def reduce_cost_matrix(cm) -> CostModel:
    """Reduce ``[[C_TP, C_FN], [C_FP, C_TN]]`` to misclassification costs only."""
    cm = np.asarray(cm, dtype=np.float64)
    if cm.shape != (2, 2):
        raise ValueError("cost matrix must be 2x2 laid out as [[TP, FN], [FP, TN]]")
    (c_tp, c_fn), (c_fp, c_tn) = cm
    if not (c_fn > c_tp and c_fp > c_tn):
        raise ValueError(
            "degenerate cost matrix: misclassification must cost strictly more than "
            f"correct classification (C_FN={c_fn} vs C_TP={c_tp}, C_FP={c_fp} vs C_TN={c_tn})"
        )
    return CostModel.class_dependent(c_fp - c_tn, c_fn - c_tp)


def normalize(w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if (w < 0).any():
        raise ValueError("weights must be nonnegative")
    s = w.sum()
    if s <= 0:
        raise ValueError("weights must have a positive sum")
    return w / s


def initial_cost_weights(data: Dataset, cost_model: CostModel) -> np.ndarray:
    """Cost-proportional record weights, ``C_FN`` for positives and ``C_FP`` for negatives, normalized."""
    return normalize(cost_model.record_costs(data))


@dataclass(frozen=True)
class Split:
    train: Dataset
    valid: Dataset
    test: Dataset
    assignment: np.ndarray
    warnings: tuple[str, ...] = ()

    def __iter__(self):
        return iter((self.train, self.valid, self.test))


def _allocate(n: int, fractions: np.ndarray) -> np.ndarray:
    # largest remainder; ties go to the earlier part
    raw = fractions * n
    counts = np.floor(raw).astype(int)
    rem = raw - counts
    order = sorted(range(len(fractions)), key=lambda k: (-rem[k], k))
    for k in order[: n - counts.sum()]:
        counts[k] += 1
    return counts


def stratified_split(data: Dataset, fractions=(0.6, 0.2, 0.2), seed: int = 0) -> Split:
    """Split into disjoint train/validation/test parts preserving the positive rate."""
    fr = np.asarray(fractions, dtype=np.float64)
    if fr.shape != (3,) or (fr < 0).any() or abs(fr.sum() - 1) > 1e-9:
        raise ValueError("fractions must be three nonnegative reals summing to 1")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(data), dtype=np.int8)
    for cls in (1, 0):
        idx = np.flatnonzero(data.y == cls)
        idx = idx[rng.permutation(len(idx))]
        counts = _allocate(len(idx), fr)
        start = 0
        for part, c in enumerate(counts):
            assignment[idx[start:start + c]] = part
            start += c
    notes = []
    n_pos = int(data.y.sum())
    parts = []
    for part, name in enumerate(("train", "valid", "test")):
        members = np.flatnonzero(assignment == part)
        parts.append(data.subset(members))
        if n_pos and fr[part] > 0 and members.size and not data.y[members].any():
            notes.append(f"{name} part received no positive records")
    for msg in notes:
        warnings.warn(msg, stacklevel=2)
    assignment.flags.writeable = False
    return Split(*parts, assignment=assignment, warnings=tuple(notes))


def _parse_float(s: str) -> float | None:
    try:
        return float(s)
    except ValueError:
        return None


def load_csv(
    path,
    label: str,
    positive: str = "1",
    fn_cost: str | None = None,
    fp_cost: str | None = None,
    amount: str | None = None,
    id_column: str | None = None,
    categorical: Sequence[str] = (),
    drop: Sequence[str] = (),
    schema: dict | None = None,
    require_label: bool = True,
) -> Dataset:
    """Read a headered CSV.

    ``positive`` names the label value mapped to class 1; every other value
    maps to 0. Columns that are not all-numeric, or listed in
    ``categorical``, become categorical. Passing the ``schema`` of a trained
    model reuses its feature order and category codes; tokens unseen at
    training time receive fresh codes. With ``require_label=False`` a
    missing label column yields all-zero labels (for prediction inputs).
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such data file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = [r for r in reader if r]
    for r_i, r in enumerate(rows):
        if len(r) != len(header):
            raise DataError(f"{path}: row {r_i + 2} has {len(r)} fields, expected {len(header)}")
    col = {h: j for j, h in enumerate(header)}
    if label not in col and not require_label:
        label = None
    for name in (label, fn_cost, fp_cost, amount, id_column):
        if name is not None and name not in col:
            raise DataError(f"{path}: missing column {name!r}")
    roles = {label, fn_cost, fp_cost, amount, id_column, *drop} - {None}
    values = lambda name: [r[col[name]].strip() for r in rows]

    if label is None:
        y = np.zeros(len(rows), dtype=np.int8)
    else:
        y = np.array([1 if v == str(positive) else 0 for v in values(label)], dtype=np.int8)

    def numeric(name):
        if name is None:
            return None
        out = []
        for v in values(name):
            f = _parse_float(v) if v != "" else math.nan
            if f is None:
                raise DataError(f"{path}: non-numeric value {v!r} in column {name!r}")
            out.append(f)
        return np.array(out)

    if schema is not None:
        names = list(schema["feature_names"])
        missing = [n for n in names if n not in col]
        if missing:
            raise DataError(f"{path}: missing feature columns {missing}")
        is_cat = list(schema["categorical"])
        vocab = [list(c) for c in schema["categories"]]
    else:
        names = [h for h in header if h not in roles]
        is_cat, vocab = [], []
        for name in names:
            raw = values(name)
            cat = name in categorical or any(_parse_float(v) is None for v in raw)
            is_cat.append(cat)
            vocab.append(sorted(set(raw)) if cat else [])
    X = np.empty((len(rows), len(names)))
    for j, name in enumerate(names):
        raw = values(name)
        if is_cat[j]:
            lookup = {tok: k for k, tok in enumerate(vocab[j])}
            for tok in raw:
                if tok not in lookup:
                    lookup[tok] = len(lookup)
            X[:, j] = [lookup[tok] for tok in raw]
        else:
            try:
                X[:, j] = [float(v) for v in raw]
            except ValueError as exc:
                raise DataError(f"{path}: column {name!r}: {exc}") from None
    ids = None
    if id_column is not None:
        ids_f = numeric(id_column)
        ids = ids_f.astype(np.int64)
    return Dataset(
        X, y, numeric(fn_cost), numeric(fp_cost), ids, tuple(names), tuple(is_cat),
        tuple(tuple(v) for v in vocab), numeric(amount),
    )

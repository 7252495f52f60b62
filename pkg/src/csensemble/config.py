"""Experiment configuration read from INI files."""
from __future__ import annotations

import configparser
from dataclasses import dataclass

from .data import CostModel
from .pipeline import MethodSpec
from .presets import preset
from .sampling import SamplerSpec
from .tree import TreeConfig


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class DataConfig:
    path: str = ""
    label: str = "label"
    positive: str = "1"
    fn_cost: str | None = None
    fp_cost: str | None = None
    amount: str | None = None
    id_column: str | None = None
    categorical: tuple[str, ...] = ()
    drop: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataConfig = DataConfig()
    costs: CostModel = CostModel.class_dependent(1.0, 1.0)
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2)
    seed: int = 0
    methods: tuple[MethodSpec, ...] = ()
    metrics: tuple[str, ...] = ("tpr", "fpr", "auc", "total_cost")
    contact_cost: float | None = None
    repeats: int = 3
    fpr_cap: float | None = None
    workers: int = 1
    sort_by: str = "total_cost"
    output: str | None = None


def _list(s: str | None) -> tuple[str, ...]:
    if not s:
        return ()
    return tuple(p.strip() for p in s.split(",") if p.strip())


def _opt(sec, key, conv=str):
    if sec is None or key not in sec or sec[key].strip() == "":
        return None
    try:
        return conv(sec[key].strip())
    except ValueError as e:
        raise ConfigError(f"[{sec.name}] {key}: {e}") from None


def _bool(s: str) -> bool:
    v = s.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def cost_model_from(c_fp=None, c_fn=None, fn_column=None, fp_column=None) -> CostModel:
    """Class costs when both constants are given and no cost column; record costs otherwise."""
    try:
        if fn_column or fp_column:
            if (fn_column is None and c_fn is None) or (fp_column is None and c_fp is None):
                raise ConfigError("record costs need a column or a constant for both C_FN and C_FP")
            return CostModel.record_dependent(c_fp, c_fn)
        if c_fp is None or c_fn is None:
            raise ConfigError("give c_fp and c_fn, or cost columns")
        return CostModel.class_dependent(c_fp, c_fn)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e)) from None


def build_method(name: str, sec=None, policy: str | None = None) -> MethodSpec:
    """Preset ``name`` with overrides read from an INI section."""
    overrides = {}
    if sec is not None:
        for key, conv in (
            ("output", str), ("vote_rule", str), ("leaf_estimator", str), ("m", int),
            ("score_calibrator", str), ("n_members", int), ("metacost", _bool),
            ("calibrate_on", str), ("member_dmecc", str), ("sqrt_init", _bool),
            ("policy", str),
        ):
            v = _opt(sec, key, conv)
            if v is not None:
                overrides[key] = v
        tree = {}
        for key, conv in (("max_depth", int), ("min_node_size", int), ("split_criterion", str),
                          ("prune", str), ("k", int), ("labeling", str)):
            v = _opt(sec, key, conv)
            if v is not None:
                tree[key] = v
        if tree:
            overrides["tree"] = TreeConfig(**tree)
        sampler_kind = _opt(sec, "sampler")
        if sampler_kind is not None:
            overrides["sampler"] = SamplerSpec(
                sampler_kind, _opt(sec, "target_ratio", float), _opt(sec, "smote_k", int) or 5,
            )
    if policy is not None:
        overrides["policy"] = policy
    try:
        return preset(name, **overrides)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"method {name!r}: {e}") from None


def load_config(path) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    try:
        with open(path) as f:
            cp.read_file(f)
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from None
    d = cp["data"] if cp.has_section("data") else None
    if d is None or _opt(d, "path") is None:
        raise ConfigError("[data] path is required")
    data = DataConfig(
        _opt(d, "path"), _opt(d, "label") or "label", _opt(d, "positive") or "1",
        _opt(d, "fn_cost_column"), _opt(d, "fp_cost_column"), _opt(d, "amount_column"),
        _opt(d, "id_column"), _list(_opt(d, "categorical")), _list(_opt(d, "drop")),
    )
    c = cp["costs"] if cp.has_section("costs") else None
    costs = cost_model_from(_opt(c, "c_fp", float), _opt(c, "c_fn", float), data.fn_cost, data.fp_cost)
    s = cp["split"] if cp.has_section("split") else None
    fractions = tuple(float(x) for x in _list(_opt(s, "fractions"))) or (0.6, 0.2, 0.2)
    if len(fractions) != 3:
        raise ConfigError("[split] fractions needs three values")
    seed = _opt(s, "seed", int) or 0

    m = cp["method"] if cp.has_section("method") else None
    g = cp["grid"] if cp.has_section("grid") else None
    methods = []
    if g is not None and _opt(g, "methods"):
        policies = _list(_opt(g, "policies")) or ("default",)
        for name in _list(_opt(g, "methods")):
            for pol in policies:
                methods.append(build_method(name, m, pol))
    elif m is not None:
        methods.append(build_method(_opt(m, "preset") or "bg", m))
    met = cp["metrics"] if cp.has_section("metrics") else None
    return ExperimentConfig(
        data, costs, fractions, seed, tuple(methods),
        _list(_opt(met, "metrics")) or ("tpr", "fpr", "auc", "total_cost"),
        _opt(met, "contact_cost", float),
        _opt(g, "repeats", int) or 3, _opt(g, "fpr_cap", float), _opt(g, "workers", int) or 1,
        _opt(g, "sort_by") or "total_cost", _opt(g, "output"),
    )


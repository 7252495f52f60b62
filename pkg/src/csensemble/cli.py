"""Command-line interface: train, predict, evaluate, grid, calibrate.

Exit codes: 0 success, 2 invalid configuration, 3 data or model-file error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace

from .calibration import fit_score_calibrator
from .boosting import BoostModel, boost_score
from .config import ConfigError, DataConfig, ExperimentConfig, build_method, cost_model_from, load_config
from .data import DataError, Dataset, load_csv, stratified_split
from .decision import DecisionPolicy, InvalidCombination, fit_majority_threshold, majority_share, thresholding_fit
from .grid import format_table, grid_run
from .metrics import evaluate
from .persist import ModelFormatError, load_model, save_model
from .pipeline import TrainedModel, train_pipeline

EXIT_CONFIG = 2
EXIT_DATA = 3
log = logging.getLogger("csensemble")


def _fractions(s: str):
    try:
        parts = tuple(float(x) for x in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fractions {s!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("fractions need three comma-separated values")
    return parts


def _add_data_args(p, required=True):
    p.add_argument("--data", required=required, help="CSV file with a header row")
    p.add_argument("--label", default=None, help="label column (default: label)")
    p.add_argument("--positive", default=None, help="label value of the positive class (default: 1)")
    p.add_argument("--fn-cost-column")
    p.add_argument("--fp-cost-column")
    p.add_argument("--amount-column")
    p.add_argument("--id-column")
    p.add_argument("--categorical", default="", help="comma-separated categorical columns")
    p.add_argument("--drop", default="", help="comma-separated columns to ignore")


def _split_args(p):
    p.add_argument("--fractions", type=_fractions, default=None, help="train,valid,test (default 0.6,0.2,0.2)")
    p.add_argument("--seed", type=int, default=None)


def _cost_args(p):
    p.add_argument("--c-fp", type=float)
    p.add_argument("--c-fn", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="csensemble", description="Cost-sensitive tree ensembles.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on the training part of a split")
    p.add_argument("--config", help="INI experiment file; flags override it")
    _add_data_args(p, required=False)
    _cost_args(p)
    _split_args(p)
    p.add_argument("--preset", help="method name, e.g. bg, rf, ncsab, dm-bg")
    p.add_argument("--policy", help="default, dmecc_tcs, dmecc_tthr, mec, mta_tcs, mta_tmthr")
    p.add_argument("--vote-rule", help="uniform, log-odds, linear, exp, squared")
    p.add_argument("--leaf-estimator")
    p.add_argument("--score-calibrator")
    p.add_argument("--n-members", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--min-node-size", type=int)
    p.add_argument("--metacost", action="store_true")
    p.add_argument("--out", required=True, help="model file to write")

    p = sub.add_parser("predict", help="write id,score,label for every record")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", help="output CSV (default: stdout)")

    p = sub.add_parser("evaluate", help="metrics of a model on a dataset or on a split part")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--part", choices=("all", "train", "valid", "test"), default="all")
    _split_args(p)
    _cost_args(p)
    p.add_argument("--metrics", default="tpr,fpr,auc,total_cost")
    p.add_argument("--contact-cost", type=float)

    p = sub.add_parser("grid", help="train and rank many methods")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="write the ranked rows as JSON")

    p = sub.add_parser("calibrate", help="refit a score calibrator or threshold on new data")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--train-data", help="CSV supplying threshold candidates (default: --data)")
    p.add_argument("--kind", required=True,
                   choices=("logistic_correction", "platt", "isotonic", "dmecc_tthr", "mta_tmthr"))
    p.add_argument("--out", required=True)
    return ap


def _csv_list(s):
    return tuple(x.strip() for x in (s or "").split(",") if x.strip())


def _data_config(args, base: DataConfig) -> DataConfig:
    return DataConfig(
        args.data or base.path, args.label or base.label, args.positive or base.positive,
        args.fn_cost_column or base.fn_cost, args.fp_cost_column or base.fp_cost,
        args.amount_column or base.amount, args.id_column or base.id_column,
        _csv_list(args.categorical) or base.categorical, _csv_list(args.drop) or base.drop,
    )


def _read(dc: DataConfig, schema=None, require_label=True) -> Dataset:
    return load_csv(dc.path, dc.label, dc.positive, dc.fn_cost, dc.fp_cost, dc.amount,
                    dc.id_column, dc.categorical, dc.drop, schema, require_label)


def _model_data(model: TrainedModel, path: str, require_label=True) -> Dataset:
    cols = model.schema.get("columns", {})
    dc = DataConfig(path, cols.get("label", "label"), cols.get("positive", "1"), cols.get("fn_cost"),
                    cols.get("fp_cost"), cols.get("amount"), cols.get("id_column"),
                    tuple(cols.get("categorical", ())), tuple(cols.get("drop", ())))
    return _read(dc, model.schema, require_label)


def cmd_train(args) -> int:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    dc = _data_config(args, cfg.data)
    if not dc.path:
        raise ConfigError("no data file given (--data or [data] path)")
    if args.c_fp is not None or args.c_fn is not None or args.fn_cost_column or args.fp_cost_column:
        costs = cost_model_from(args.c_fp, args.c_fn, dc.fn_cost, dc.fp_cost)
    elif args.config:
        costs = cfg.costs
    else:
        raise ConfigError("give costs with --c-fp/--c-fn or cost columns")
    base = cfg.methods[0] if cfg.methods else None
    name = args.preset or (base.name if base else "bg")
    spec = build_method(name) if base is None or args.preset else base
    overrides = {
        "policy": args.policy, "vote_rule": args.vote_rule, "leaf_estimator": args.leaf_estimator,
        "score_calibrator": args.score_calibrator, "n_members": args.n_members,
        "metacost": True if args.metacost else None,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.max_depth is not None or args.min_node_size is not None:
        tree = spec.base_config(0)
        overrides["tree"] = replace(
            tree, max_depth=args.max_depth if args.max_depth is not None else tree.max_depth,
            min_node_size=args.min_node_size or tree.min_node_size,
            attribute_mode="all",
        )
    try:
        spec = spec.with_(**overrides)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    fractions = args.fractions or cfg.fractions
    seed = args.seed if args.seed is not None else cfg.seed
    data = _read(dc)
    split = stratified_split(data, fractions, seed)
    model = train_pipeline(spec, split.train, split.valid, costs, seed)
    schema = dict(model.schema, columns={
        "label": dc.label, "positive": dc.positive, "fn_cost": dc.fn_cost, "fp_cost": dc.fp_cost,
        "amount": dc.amount, "id_column": dc.id_column, "categorical": list(dc.categorical),
        "drop": list(dc.drop), "fractions": list(fractions), "seed": seed,
    })
    save_model(replace(model, schema=schema), args.out)
    print(f"trained {spec.name or spec.ensemble} on {len(split.train)} records -> {args.out}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    data = _model_data(model, args.data, require_label=False)
    score = model.score(data)
    label = model.predict(data)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["id", "score", "label"])
        for i, s, l in zip(data.ids, score, label):
            w.writerow([int(i), repr(float(s)), int(l)])
    finally:
        if args.out:
            out.close()
    return 0


def _part(model: TrainedModel, data: Dataset, args) -> Dataset:
    if args.part == "all":
        return data
    cols = model.schema.get("columns", {})
    fractions = args.fractions or tuple(cols.get("fractions", (0.6, 0.2, 0.2)))
    seed = args.seed if args.seed is not None else cols.get("seed", 0)
    return getattr(stratified_split(data, fractions, seed), args.part)


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    data = _part(model, _model_data(model, args.data), args)
    costs = model.cost_model
    if args.c_fp is not None or args.c_fn is not None:
        cols = model.schema.get("columns", {})
        costs = cost_model_from(args.c_fp, args.c_fn, cols.get("fn_cost"), cols.get("fp_cost"))
    metrics = _csv_list(args.metrics)
    report = evaluate(data.y, model.predict(data), data, costs,
                      model.score(data) if "auc" in metrics else None, metrics, args.contact_cost)
    print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
    return 0


def cmd_grid(args) -> int:
    cfg = load_config(args.config)
    if not cfg.methods:
        raise ConfigError("[grid] methods is empty")
    data = _read(cfg.data)
    seeds = tuple(cfg.seed + r for r in range(cfg.repeats))
    rows = grid_run(list(cfg.methods), data, cfg.costs, seeds, cfg.fractions, cfg.metrics,
                    cfg.sort_by, cfg.fpr_cap, cfg.workers, cfg.contact_cost)
    cols = tuple(dict.fromkeys((cfg.sort_by, "total_cost", "tpr", "fpr", "auc")))
    print(format_table(rows, cols))
    out = args.out or cfg.output
    if out:
        with open(out, "w") as f:
            json.dump([{"method": r.method, **r.metrics} for r in rows], f, sort_keys=True, indent=2)
    return 0


def cmd_calibrate(args) -> int:
    model = load_model(args.model)
    data = _model_data(model, args.data)
    kind = args.kind
    if kind in ("logistic_correction", "platt", "isotonic"):
        if not isinstance(model.model, BoostModel):
            raise ConfigError("score calibrators apply to boosted models only")
        try:
            spec = model.spec.with_(score_calibrator=kind)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        costs = model.costs(data) if model._needs_costs() else None
        S = boost_score(model.model, data.X, costs)[0]
        cal = fit_score_calibrator(kind, S, data.y)
        model = replace(model, spec=spec, model=model.model.with_(calibrator=cal))
    elif kind == "dmecc_tthr":
        train = _model_data(model, args.train_data) if args.train_data else data
        spec = model.spec.with_(policy=kind)
        model = replace(model, spec=spec)
        t = thresholding_fit(model.score(train), model.score(data), data, model.cost_model)
        model = replace(model, policy=DecisionPolicy(kind, t))
    else:
        spec = model.spec.with_(policy=kind)
        model = replace(model, spec=spec)
        out = model.outputs(data)
        t = fit_majority_threshold(majority_share(out.votes, out.weights), data, model.cost_model)
        model = replace(model, policy=DecisionPolicy(kind, t))
    save_model(model, args.out)
    print(f"calibrated ({kind}) -> {args.out}")
    return 0


COMMANDS = {"train": cmd_train, "predict": cmd_predict, "evaluate": cmd_evaluate,
            "grid": cmd_grid, "calibrate": cmd_calibrate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InvalidCombination) as e:
        print(f"error: invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError, ModelFormatError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        # remaining rejections come from option values that do not fit together
        print(f"error: invalid configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

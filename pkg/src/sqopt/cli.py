"""Command line interface: batch experiment runner and metric emitter.

Four subcommands: ``eval`` (quantile/superquantile of a sample), ``fit``
(mean-loss baseline vs smoothed tail-risk model on a CSV dataset),
``experiment`` (the named studies), and ``sweep-nu`` (smoothing-strength
sweep at a fixed model).  Output is JSON reports plus CSV data files; no
plotting here, figures are made from the CSVs by external tooling.

Exit codes: 0 on success (a reported optimizer failure still counts as a
run), 2 on usage or data errors.  With a fixed seed every written artifact is
byte-identical across runs on one platform; wall time goes to stderr only.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys
import time
from pathlib import Path

import numpy as np

from .core import quantile, superquantile_dual, superquantile_integral, superquantile_variational
from .data import load_csv
from .experiments import (
    FitSettings,
    default_nu_grid,
    fit_models,
    run_abalone,
    run_convergence,
    run_credit,
    run_fairness,
    run_federated,
    run_sweep,
    run_toyreg,
    synthetic_credit,
)
from .models import ModelSpec, pointwise_loss_map
from .smoothing import SmoothingSpec, smoothed_superquantile

EXPERIMENTS = ("toyreg", "federated", "fairness", "abalone", "credit", "convergence")

__all__ = ["main", "entry"]


def _tail_level(text: str) -> float:
    value = float(text)
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"p must be in [0, 1), got {text}")
    return value


def _parse_model(text: str) -> tuple[str, int]:
    if text == "linear":
        return "linear", 1
    match = re.fullmatch(r"poly(\d+)", text)
    if match:
        return "polynomial", int(match.group(1))
    raise argparse.ArgumentTypeError(f"model must be 'linear' or 'polyK', got {text!r}")


def _read_values(args) -> np.ndarray:
    if args.values is not None:
        return np.array([float(v) for v in args.values.split(",") if v.strip() != ""])
    cells = []
    with open(args.input, newline="", encoding="utf-8") as handle:
        for row in csv.reader(handle):
            cells.extend(float(c) for c in row if c.strip() != "")
    return np.array(cells)


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_csv(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        if not rows:
            return
        writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def _print_wall_time(started: float) -> None:
    print(f"wall time: {time.perf_counter() - started:.2f}s", file=sys.stderr)


def cmd_eval(args) -> int:
    values = _read_values(args)
    p = args.p
    print(f"n: {values.size}")
    print(f"p: {p!r}")
    print(f"quantile: {quantile(values, p)!r}")
    print(f"superquantile_integral: {superquantile_integral(values, p)!r}")
    dual_value, weights = superquantile_dual(values, p)
    print(f"superquantile_dual: {dual_value!r}")
    var_value, eta = superquantile_variational(values, p)
    print(f"superquantile_variational: {var_value!r} (threshold {eta!r})")
    if args.nu is not None:
        spec = SmoothingSpec(args.smoothing, args.nu)
        smoothed, smooth_weights = smoothed_superquantile(values, spec, p)
        print(f"smoothed ({spec.kind}, nu={spec.nu!r}): {smoothed!r}")
        print(f"smoothed weights: min={float(smooth_weights.min())!r} "
              f"max={float(smooth_weights.max())!r} sum={float(smooth_weights.sum())!r} "
              f"nonzero={int((smooth_weights > 0).sum())}")
    return 0


def cmd_fit(args) -> int:
    started = time.perf_counter()
    task = "classification" if args.loss == "logistic" else "regression"
    dataset = load_csv(args.data, task=task)
    kind, degree = args.model
    settings = FitSettings(loss=args.loss, model_kind=kind, degree=degree, p=args.p,
                           nu=args.nu, smoothing=args.smoothing, reg=args.reg,
                           train_fraction=args.split, seed=args.seed)
    report, predictions = fit_models(dataset, settings)
    out = Path(args.out)
    _write_json(out / "report.json", report)
    _write_csv(out / "predictions.csv", predictions)
    weight_rows = [{"model": name, "index": i, "value": v}
                   for name, entry in report["models"].items()
                   for i, v in enumerate(entry["optim"]["weights"])]
    _write_csv(out / "weights.csv", weight_rows)
    for name, entry in report["models"].items():
        print(f"{name}: status={entry['optim']['status']} test={entry['metrics']['test']}")
    _print_wall_time(started)
    return 0


def cmd_experiment(args) -> int:
    started = time.perf_counter()
    name = args.name
    if name in ("abalone", "credit"):
        data_path = args.data
        if data_path is None:
            # fall back to the default data directory, then (credit only,
            # when asked) to the synthetic stand-in
            data_dir = os.environ.get("SQOPT_DATA_DIR")
            candidate = None
            if data_dir:
                filename = "abalone.csv" if name == "abalone" else "australian.csv"
                candidate = Path(data_dir) / filename
            if candidate is not None and candidate.exists():
                data_path = str(candidate)
        if data_path is None:
            if name == "credit" and args.synthetic:
                dataset = synthetic_credit(seed=args.seed)
            else:
                print(f"error: experiment {name!r} needs --data (or SQOPT_DATA_DIR) pointing "
                      "to a local CSV (see scripts/fetch_datasets.py)", file=sys.stderr)
                return 2
        else:
            task = "classification" if name == "credit" else "regression"
            dataset = load_csv(data_path, task=task)
        if name == "abalone":
            report, rows = run_abalone(dataset, seed=args.seed)
        else:
            report, rows = run_credit(dataset, seed=args.seed)
    elif name == "toyreg":
        report, rows = run_toyreg(seed=args.seed)
    elif name == "federated":
        report, rows = run_federated(seed=args.seed)
    elif name == "fairness":
        report, rows = run_fairness(seed=args.seed)
    else:
        report, rows = run_convergence(seed=args.seed)

    out = Path(args.out)
    _write_json(out / "report.json", report)
    _write_csv(out / "predictions.csv", rows)
    summary = {k: v for k, v in report.items() if k in
               ("experiment", "median_gaps", "strictly_decreasing", "subgroup_gap",
                "worst_subgroup_loss", "summary")}
    if "models" in report:
        summary["models"] = {
            name: entry["metrics"]["test"] if "metrics" in entry else entry.get("subgroup_losses")
            for name, entry in report["models"].items()
        }
    print(json.dumps(summary, indent=2, sort_keys=True))
    _print_wall_time(started)
    return 0


def cmd_sweep_nu(args) -> int:
    started = time.perf_counter()
    if args.values is not None or args.input is not None:
        values = _read_values(args)
    else:
        if args.data is None:
            print("error: sweep-nu needs --values/--input or --data with --weights/--fit-first",
                  file=sys.stderr)
            return 2
        task = "classification" if args.loss == "logistic" else "regression"
        dataset = load_csv(args.data, task=task)
        kind, degree = args.model
        model = ModelSpec(kind=kind, degree=degree, loss=args.loss)
        loss_map = pointwise_loss_map(dataset, model)
        if args.weights is not None:
            with open(args.weights, encoding="utf-8") as handle:
                w = np.array([float(line) for line in handle.read().split() if line.strip()])
        elif args.fit_first:
            settings = FitSettings(loss=args.loss, model_kind=kind, degree=degree, p=args.p,
                                   nu=args.nu, smoothing=args.smoothing, seed=args.seed)
            report, _ = fit_models(dataset, settings)
            w = np.array(report["models"]["superquantile"]["optim"]["weights"])
        else:
            print("error: provide --weights FILE or --fit-first with --data", file=sys.stderr)
            return 2
        values = loss_map.eval(w)

    grid = None
    if args.grid is not None:
        grid = np.array([float(v) for v in args.grid.split(",") if v.strip() != ""])
    else:
        grid = default_nu_grid(np.asarray(values))
    report, rows, weight_rows = run_sweep(values, args.p, kind=args.smoothing, grid=grid)
    out = Path(args.out)
    _write_json(out / "report.json", report)
    _write_csv(out / "sweep.csv", rows)
    _write_csv(out / "weights_by_nu.csv", weight_rows)
    print(json.dumps(report["endpoints"], indent=2, sort_keys=True))
    _print_wall_time(started)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sqopt",
                                     description="Superquantile optimization experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="quantile and superquantile of a sample")
    src = p_eval.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV file of loss values")
    src.add_argument("--values", help="comma-separated loss values")
    p_eval.add_argument("--p", type=_tail_level, required=True)
    p_eval.add_argument("--nu", type=float, default=None, help="also report the smoothed value")
    p_eval.add_argument("--smoothing", choices=("euclidean", "kl"), default="euclidean")
    p_eval.set_defaults(func=cmd_eval)

    p_fit = sub.add_parser("fit", help="train mean-loss and tail-risk models on a CSV")
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--loss", choices=("squared", "logistic"), default="squared")
    p_fit.add_argument("--model", type=_parse_model, default=("linear", 1))
    p_fit.add_argument("--p", type=_tail_level, default=0.9)
    p_fit.add_argument("--nu", type=float, default=0.1)
    p_fit.add_argument("--smoothing", choices=("euclidean", "kl"), default="euclidean")
    p_fit.add_argument("--reg", type=float, default=0.0)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--split", type=float, default=0.8, help="train fraction")
    p_fit.add_argument("--out", required=True)
    p_fit.set_defaults(func=cmd_fit)

    p_exp = sub.add_parser("experiment", help="run a named study")
    p_exp.add_argument("name", choices=EXPERIMENTS)
    p_exp.add_argument("--seed", type=int, default=0)
    p_exp.add_argument("--out", required=True)
    p_exp.add_argument("--data", default=None, help="dataset CSV for abalone/credit")
    p_exp.add_argument("--synthetic", action="store_true",
                       help="credit only: use the bundled synthetic stand-in dataset")
    p_exp.set_defaults(func=cmd_experiment)

    p_sweep = sub.add_parser("sweep-nu", help="smoothed value across smoothing strengths")
    p_sweep.add_argument("--values", default=None, help="comma-separated loss values")
    p_sweep.add_argument("--input", default=None, help="CSV file of loss values")
    p_sweep.add_argument("--data", default=None, help="dataset CSV (model mode)")
    p_sweep.add_argument("--loss", choices=("squared", "logistic"), default="squared")
    p_sweep.add_argument("--model", type=_parse_model, default=("linear", 1))
    p_sweep.add_argument("--w", "--weights", dest="weights", default=None,
                         help="file of fixed model weights")
    p_sweep.add_argument("--fit-first", action="store_true",
                         help="fit the tail-risk model first, sweep at its solution")
    p_sweep.add_argument("--p", type=_tail_level, required=True)
    p_sweep.add_argument("--nu", type=float, default=0.1, help="strength used by --fit-first")
    p_sweep.add_argument("--smoothing", choices=("euclidean", "kl"), default="euclidean")
    p_sweep.add_argument("--grid", default=None, help="comma-separated nu grid")
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep_nu)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

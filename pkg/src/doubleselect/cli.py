"""Command-line interface: ``doubleselect fit | simulate | diagnose``.

Exit codes: 0 success, 2 argument error, 3 data error, 4 estimation
error, 5 capacity error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .data import ingest_csv, read_columns
from .diagnostics import DEFAULT_CAP, gram_matrix, sparse_eigenvalues
from .errors import ArgumentError, CapacityError, DataError, EstimationError
from .numerics import RngStream
from .penalty import SELECTORS, PenaltyConfig
from .selection import post_double_selection, post_double_selection_ridge
from .simulation import ESTIMATORS, FULL_GRID, run_grid

EXIT_OK, EXIT_ARGUMENT, EXIT_DATA, EXIT_ESTIMATION, EXIT_CAPACITY = 0, 2, 3, 4, 5
SCHEMA_VERSION = 1
INTERCEPT_NAME = "(intercept)"
RIDGE_NAME = "(ridge-fit)"
TABLE_COLUMNS = ("design", "r2_y", "r2_d", "estimator", "rmse", "bias", "std",
                 "rejection_rate", "reps", "exclusions")


def load_schema(name: str) -> dict:
    """Shipped JSON schema: ``estimation_report``, ``simulation_report`` or ``sparse_eig_report``."""
    text = resources.files("doubleselect").joinpath("schemas", f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)


def _names(text):
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _write_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _resolve_seed(seed):
    if seed is not None:
        return seed
    seed = int(np.random.SeedSequence().entropy % (2**63))
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def estimation_report(est, names, config, args, seed, rows_dropped):
    sets = est.selection
    pick = lambda idx: [names[j] for j in idx]  # noqa: E731
    return {
        "schema_version": SCHEMA_VERSION,
        "alpha_hat": est.alpha_hat,
        "se_plugin": est.se_plugin,
        "sigma_n": est.sigma_n,
        "se_jackknife": est.se_jackknife,
        "ci_plugin": list(est.ci_plugin),
        "ci_jackknife": list(est.ci_jackknife),
        "selected_for_treatment": pick(sets.treatment),
        "selected_for_outcome": pick(sets.outcome),
        "amelioration": pick(sets.amelioration),
        "union": pick(sets.union),
        "union_size": len(sets.union),
        "n_used": est.n,
        "rows_dropped": rows_dropped,
        "config": {
            "c": config.c,
            "gamma": config.gamma,
            "selector": config.selector,
            "level": args.level,
            "seed": seed,
            "intercept": not args.no_intercept,
            "with_ridge": args.with_ridge,
        },
    }


def cmd_fit(args) -> int:
    if args.controls is None and not args.controls_all_others:
        raise ArgumentError("give --controls NAME,... or --controls-all-others")
    controls = None if args.controls_all_others else _names(args.controls)
    data = ingest_csv(args.data, args.outcome, args.treatment, controls, _names(args.amelioration))
    config = PenaltyConfig(c=args.c, gamma=args.gamma, selector=args.selector)
    names = list(data.controls)
    X = data.X
    amel = [names.index(a) for a in data.amelioration]
    if not args.no_intercept:
        X = np.column_stack([np.ones(data.rows), X])
        names = [INTERCEPT_NAME, *names]
        amel = [0, *[j + 1 for j in amel]]
    seed = _resolve_seed(args.seed)
    try:
        if args.with_ridge:
            est = post_double_selection_ridge(data.y, data.d, X, amel, config, args.level,
                                              stream=RngStream(seed))
            names = [*names, RIDGE_NAME]
        else:
            est = post_double_selection(data.y, data.d, X, amel, config, args.level)
    except EstimationError as exc:
        raise EstimationError(f"{exc} (outcome {data.outcome!r}, treatment {data.treatment!r})") from exc
    report = estimation_report(est, names, config, args, seed, data.rows_dropped)
    _write_json(report, args.out)
    if args.out is not None:
        lo, hi = est.ci_plugin
        print(f"alpha_hat = {est.alpha_hat:.6g}  se = {est.se_plugin:.4g} (plug-in), "
              f"{est.se_jackknife:.4g} (jackknife)  {args.level:.0%} CI [{lo:.4g}, {hi:.4g}]  "
              f"controls used: {len(est.selection.union)}")
    return EXIT_OK


def parse_grid(text):
    if text.strip().lower() == "full":
        return list(FULL_GRID)
    grid = []
    for chunk in text.split(";"):
        parts = [p.strip() for p in chunk.split(",") if p.strip()]
        if len(parts) % 2:
            raise ArgumentError(f"--r2-grid needs (r2_y, r2_d) pairs or 'full', got {text!r}")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise ArgumentError(f"--r2-grid values must be numbers, got {text!r}") from None
        grid.extend(zip(vals[0::2], vals[1::2]))
    if not grid:
        raise ArgumentError("--r2-grid is empty")
    return grid


def cmd_simulate(args) -> int:
    grid = parse_grid(args.r2_grid)
    estimators = _names(args.estimators)
    bad = [e for e in estimators if e not in ESTIMATORS]
    if bad or not estimators:
        raise ArgumentError(f"unknown estimator(s) {bad}; valid options: {', '.join(ESTIMATORS)}")
    seed = _resolve_seed(args.seed)
    reports = run_grid(args.design, grid, args.reps, estimators, seed, n=args.n, p=args.p,
                       alpha0=args.alpha0, random_tail=args.random_tail, n_jobs=args.jobs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for rep in reports:
        tag = f"design{rep.design}_ry{rep.r2_y:g}_rd{rep.r2_d:g}"
        _write_json(rep.to_dict(), out / f"report_{tag}.json")
        for name, s in rep.estimators.items():
            rows.append([rep.design, rep.r2_y, rep.r2_d, name, s.rmse, s.bias, s.std,
                         s.rejection_rate, rep.reps, s.exclusions])
        if args.emit_studentized:
            with open(out / f"studentized_{tag}.csv", "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["replication", "estimator", "statistic"])
                for name, s in rep.estimators.items():
                    t = (s.estimates - rep.alpha0) / s.std_errors
                    for r, val in enumerate(t):
                        writer.writerow([r, name, repr(float(val))])
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_COLUMNS)
        writer.writerows([[repr(v) if isinstance(v, float) else v for v in row] for row in rows])
    print(f"wrote {len(reports)} report(s) and summary.csv to {out}")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    columns = None if args.controls is None else _names(args.controls)
    _, values, _ = read_columns(args.data, columns)
    report = sparse_eigenvalues(gram_matrix(values), args.m, args.cap)
    _write_json(report.to_dict(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="doubleselect", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="post-double-selection estimate from a CSV file")
    fit.add_argument("--data", required=True)
    fit.add_argument("--outcome", required=True)
    fit.add_argument("--treatment", required=True)
    fit.add_argument("--controls")
    fit.add_argument("--controls-all-others", action="store_true")
    fit.add_argument("--amelioration", default="")
    fit.add_argument("--selector", choices=SELECTORS, default="iterated-lasso")
    fit.add_argument("--c", type=float, default=1.1)
    fit.add_argument("--gamma", type=float, default=0.05)
    fit.add_argument("--level", type=float, default=0.95)
    fit.add_argument("--no-intercept", action="store_true")
    fit.add_argument("--with-ridge", action="store_true")
    fit.add_argument("--seed", type=int)
    fit.add_argument("--out")
    fit.set_defaults(func=cmd_fit)

    sim = sub.add_parser("simulate", help="Monte Carlo study over an R^2 grid")
    sim.add_argument("--design", type=int, choices=(1, 2, 3), required=True)
    sim.add_argument("--r2-grid", default="full", help="'full' or pairs 'ry,rd;ry,rd'")
    sim.add_argument("--reps", type=int, required=True)
    sim.add_argument("--estimators", default=",".join(ESTIMATORS))
    sim.add_argument("--seed", type=int)
    sim.add_argument("--n", type=int, default=100)
    sim.add_argument("--p", type=int, default=200)
    sim.add_argument("--alpha0", type=float, default=0.5)
    sim.add_argument("--random-tail", choices=("all", "95"), default="all")
    sim.add_argument("--jobs", type=int, default=1)
    sim.add_argument("--out", default="simulation-output")
    sim.add_argument("--emit-studentized", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    diag = sub.add_parser("diagnose", help="m-sparse eigenvalues of the control Gram matrix")
    diag.add_argument("--data", required=True)
    diag.add_argument("--controls", help="comma-separated names; default: every column")
    diag.add_argument("--m", type=int, required=True)
    diag.add_argument("--cap", type=int, default=DEFAULT_CAP)
    diag.add_argument("--out")
    diag.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGUMENT
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EstimationError as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())

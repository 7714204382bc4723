"""Command-line front end: differentiation, prediction, experiment reproduction, goldens.

Every experiment run writes a manifest (config hash, package version, seed)
alongside its artifacts so results can be reproduced byte-for-byte.
"""

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .aise import AiseFilter, benchmark_config
from .baselines import AbgFilter, BdbDifferentiator
from .harness import ExperimentConfig, load_config, normalize_method, run_experiment
from .oracles import compute_goldens
from .prediction import DerivativeEstimate, predict
from .scenarios import format_csv_row, read_positions_csv, read_timeseries_csv


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aisepred",
        description="Real-time differentiation of noisy position streams and trajectory prediction",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_diff = sub.add_parser("differentiate", help="estimate a derivative of each CSV column")
    p_diff.add_argument("csv_in", help="input CSV with header t,<col>[,...] at a uniform rate")
    p_diff.add_argument("--order", type=int, default=1, choices=(1, 2, 3),
                        help="derivative order (default 1)")
    p_diff.add_argument("--config", help="JSON file of estimator parameter overrides")
    p_diff.add_argument("--out", help="output CSV path (default: stdout)")
    p_diff.set_defaults(func=_cmd_differentiate)

    p_pred = sub.add_parser("predict", help="predict ahead from the last row of a position CSV")
    p_pred.add_argument("csv_in", help="input CSV with header t,x,y,z at a uniform rate")
    p_pred.add_argument("--method", default="aise-fs",
                        help="aise-va, aise-fs, bdb-va, or abg-va (default aise-fs)")
    p_pred.add_argument("--horizon", type=int, default=100, help="steps ahead (default 100)")
    p_pred.add_argument("--tracking-index", type=float, default=0.6)
    p_pred.add_argument("--out", help="output CSV path (default: stdout)")
    p_pred.set_defaults(func=_cmd_predict)

    p_exp = sub.add_parser("experiment", help="run a benchmark scenario and report RMSE")
    p_exp.add_argument("--config", help="JSON experiment config (flags override its values)")
    p_exp.add_argument("--scenario", help="parabolic, helical, or csv:<path>")
    p_exp.add_argument("--seed", type=int)
    p_exp.add_argument("--sigma", type=float, help="measurement noise std dev, meters")
    p_exp.add_argument("--horizon", type=int)
    p_exp.add_argument("--n-steps", type=int)
    p_exp.add_argument("--k0", type=int)
    p_exp.add_argument("--methods", help="comma-separated method list, e.g. aise-va,aise-fs")
    p_exp.add_argument("--rmse-form", choices=("standard", "literal"))
    p_exp.add_argument("--out-dir", help="directory for report.json/trace.csv/predictions.csv")
    p_exp.add_argument("--truth-derivatives", action="store_true",
                       help="bypass estimators and inject exact derivatives")
    p_exp.set_defaults(func=_cmd_experiment)

    p_gold = sub.add_parser("goldens", help="regenerate derived reference values")
    p_gold.add_argument("--out", default="goldens.json", help="output path (default goldens.json)")
    p_gold.set_defaults(func=_cmd_goldens)
    return parser


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def _cmd_differentiate(args):
    t, cols = read_timeseries_csv(args.csv_in)
    t_s = float(t[1] - t[0])
    overrides = {}
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)
    overrides.pop("order", None)
    overrides.pop("t_s", None)
    if overrides:
        base = benchmark_config(args.order, t_s)
        config = replace(base, **overrides)
    else:
        config = benchmark_config(args.order, t_s)
    filters = {name: AiseFilter(config) for name in cols}
    out = _open_out(args.out)
    try:
        out.write("t," + ",".join(f"d{name}" for name in cols) + "\n")
        for i in range(len(t)):
            row = [t[i]] + [filters[name].step(cols[name][i]) for name in cols]
            out.write(format_csv_row(row) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_predict(args):
    method = normalize_method(args.method)
    t, P = read_positions_csv(args.csv_in)
    t_s = float(t[1] - t[0])
    n = len(P)
    if method.startswith("AISE/"):
        orders = (1, 2, 3) if method == "AISE/FS" else (1, 2)
        bank = {o: [AiseFilter(benchmark_config(o, t_s)) for _ in range(3)] for o in orders}
        v = np.zeros(3)
        a = np.zeros(3)
        j = np.zeros(3)
        for k in range(n):
            for ax in range(3):
                v[ax] = bank[1][ax].step(P[k, ax])
                a[ax] = bank[2][ax].step(P[k, ax])
                if 3 in bank:
                    j[ax] = bank[3][ax].step(P[k, ax])
        estimates = DerivativeEstimate(v=v, a=a, j=j if method == "AISE/FS" else None)
    elif method == "BDB/va":
        bank = [BdbDifferentiator(t_s) for _ in range(3)]
        v = np.zeros(3)
        a = np.zeros(3)
        for k in range(n):
            for ax in range(3):
                v[ax], a[ax] = bank[ax].step(P[k, ax])
        estimates = DerivativeEstimate(v=v, a=a)
    else:
        bank = [AbgFilter(args.tracking_index, t_s) for _ in range(3)]
        v = np.zeros(3)
        a = np.zeros(3)
        for k in range(n):
            for ax in range(3):
                _, v[ax], a[ax] = bank[ax].step(P[k, ax])
        estimates = DerivativeEstimate(v=v, a=a)
    trace = predict(method, P[-1], estimates, args.horizon, t_s, anchor_step=n - 1)
    out = _open_out(args.out)
    try:
        out.write("l,x,y,z\n")
        for l in range(1, trace.horizon + 1):
            out.write(f"{l}," + format_csv_row(trace.positions[l - 1]) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_experiment(args):
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.scenario is not None:
        overrides["scenario"] = args.scenario
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.sigma is not None:
        overrides["sigma"] = args.sigma
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if args.n_steps is not None:
        overrides["n_steps"] = args.n_steps
    if args.k0 is not None:
        overrides["k0"] = args.k0
    if args.methods is not None:
        overrides["methods"] = tuple(
            normalize_method(m) for m in args.methods.split(",") if m.strip()
        )
    if args.rmse_form is not None:
        overrides["rmse_form"] = args.rmse_form
    if args.truth_derivatives:
        overrides["truth_derivatives"] = True
    if overrides:
        config = replace(config, **overrides)
    report = run_experiment(config, out_dir=args.out_dir)
    print(f"scenario={config.scenario} n_steps={config.n_steps} k0={config.k0} "
          f"horizon={config.horizon} sigma={report.config['sigma']} seed={config.seed} "
          f"n_tilde={report.n_tilde}")
    for method, values in report.methods.items():
        print(f"{method:8s} RMSE_x={values[0]:.4f} RMSE_y={values[1]:.4f} "
              f"RMSE_z={values[2]:.4f}")
    print(f"runtime: {report.runtime_s:.2f} s")
    return 0


def _cmd_goldens(args):
    goldens = compute_goldens()
    with open(args.out, "w") as fh:
        json.dump(goldens, fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.out}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

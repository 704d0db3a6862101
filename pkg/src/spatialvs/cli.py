"""Command line entry point: ``spatialvs {simulate,select,tune,experiment,report}``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import harness
from .datafiles import read_dataset_csv, write_dataset_csv
from .selection import PERMUTED_INDEX, POSITION, PenaltyConfig, select_variables
from .simulator import DEFAULT_B, SimulationConfig, generate_dataset
from .tuning import TuningGrid, optimize_tuning, write_cv_table


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _folds(text):
    return "loo" if text == "loo" else int(text)


def cmd_simulate(args):
    cfg = SimulationConfig(n=args.n, a=args.a, kappa2=args.kappa2,
                           B=np.array([_floats(args.B)]), seed=args.seed)
    write_dataset_csv(generate_dataset(cfg), args.out)
    print(f"wrote {cfg.n * cfg.n} sites to {args.out}")


def cmd_select(args):
    sample = read_dataset_csv(args.data)
    pen = PenaltyConfig(args.gamma, args.beta, dim_penalty_arg=args.dim_penalty_arg)
    result = select_variables(sample, pen).to_dict()
    result.update(gamma=args.gamma, beta=args.beta, dim_penalty_arg=args.dim_penalty_arg)
    text = json.dumps(result, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_tune(args):
    sample = read_dataset_csv(args.data)
    grid = TuningGrid(_floats(args.gamma_values), _floats(args.beta_values),
                      _folds(args.folds) if args.folds else None)
    pen = PenaltyConfig(dim_penalty_arg=args.dim_penalty_arg)
    gamma, beta, table = optimize_tuning(sample, grid, pen)
    write_cv_table(table, args.out)
    print(f"gamma_opt={gamma!r} beta_opt={beta!r}; table written to {args.out}")


def cmd_experiment(args):
    cfg = harness.load_config(args.config)
    out = args.out or cfg.output_path
    rows = harness.run_replications(cfg, workers=args.workers)
    harness.write_raw_csv(rows, out)
    failed = sum(r.failed for r in rows)
    print(f"wrote {len(rows)} rows to {out} ({failed} flagged)")


def cmd_report(args):
    raw = harness.read_raw_csv(args.raw)
    true_set = tuple(int(v) for v in args.true_set.split(","))
    metrics = harness.compute_metrics(raw, true_set)
    paths = harness.emit_report(metrics, args.out_prefix)
    print(harness.format_tables(metrics))
    print("wrote " + ", ".join(paths))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spatialvs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one dataset to CSV")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--a", type=float, default=25.0)
    p.add_argument("--kappa2", type=float, default=1.0)
    p.add_argument("--B", default=",".join(str(b) for b in DEFAULT_B),
                   help="comma-separated coefficients (single response)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    def penalty_args(p, rates=True):
        if rates:
            p.add_argument("--gamma", type=float, default=0.25)
            p.add_argument("--beta", type=float, default=0.25)
        p.add_argument("--dim-penalty-arg", choices=[POSITION, PERMUTED_INDEX],
                       default=POSITION)

    p = sub.add_parser("select", help="run variable selection on a dataset CSV")
    p.add_argument("data")
    penalty_args(p)
    p.add_argument("--out", help="JSON output path (default: stdout)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("tune", help="cross-validate (gamma, beta) and write the CV table")
    p.add_argument("data")
    p.add_argument("--gamma-values", default="0.05,0.15,0.25,0.35,0.45")
    p.add_argument("--beta-values", default="0.05,0.15,0.25,0.35,0.45")
    p.add_argument("--folds", help="'loo' or a fold count (default depends on grid size)")
    penalty_args(p, rates=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a config file")
    p.add_argument("config")
    p.add_argument("--out", help="raw CSV path (default: output_path from the config)")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("report", help="aggregate a raw results CSV into metric tables")
    p.add_argument("raw")
    p.add_argument("--true-set", default="1,2,3,4")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"spatialvs {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

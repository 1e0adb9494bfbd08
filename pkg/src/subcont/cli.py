"""Command-line entry point.

  subcont run    --experiment monotone_nqp --n 100 --m 50 --K 50 --seeds 20 --out results/
  subcont check  --function nonmonotone_nqp --property submodular --trials 500 --seed 0
  subcont oracle --function nonmonotone_nqp --n 4 --grid 51 --seed 0

The environment variable SUBCONT_SEED overrides the base seed; per-instance
seeds are base + index so sweeps stay independently reproducible.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .harness import ExperimentConfig, _function_or_path, grid_brute_force, run_experiment
from .properties import CHECKERS

DEFAULT_BASE_SEED = 0


def _base_seed(explicit: int | None) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("SUBCONT_SEED")
    return int(env) if env else DEFAULT_BASE_SEED


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subcont",
                                     description="benchmark harness for submodular "
                                                 "continuous maximization")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment sweep")
    run.add_argument("--experiment", required=True)
    run.add_argument("--n", type=int, default=4)
    run.add_argument("--m", type=int, default=2)
    run.add_argument("--K", type=int, default=50)
    run.add_argument("--gamma", type=float, default=None)
    run.add_argument("--delta", type=float, default=0.0)
    run.add_argument("--seeds", type=int, default=1, help="number of instance seeds")
    run.add_argument("--seed-base", type=int, default=None)
    run.add_argument("--ks", type=int, default=1000)
    run.add_argument("--steps", type=str, default="1e-4,1e-3,1e-2",
                     help="comma-separated ProjGrad step sizes")
    run.add_argument("--sweep", type=str, default=None,
                     help="comma-separated sweep values")
    run.add_argument("--methods", type=str, default=None,
                     help="comma-separated method names")
    run.add_argument("--grid-oracle", action="store_true")
    run.add_argument("--grid", type=int, default=51, help="grid points per dimension")
    run.add_argument("--data", type=str, default=None)
    run.add_argument("--out", type=str, default="results")
    run.add_argument("--function", type=str, default=None)
    run.add_argument("--property", dest="prop", type=str, default=None)
    run.add_argument("--trials", type=int, default=500)

    check = sub.add_parser("check", help="run a sampled property certificate")
    check.add_argument("--function", required=True,
                       help="zoo family name or a TSV edge-list path")
    check.add_argument("--property", dest="prop", required=True,
                       choices=sorted(CHECKERS))
    check.add_argument("--n", type=int, default=4)
    check.add_argument("--trials", type=int, default=500)
    check.add_argument("--seed", type=int, default=None)
    check.add_argument("--tol", type=float, default=1e-9)

    oracle = sub.add_parser("oracle", help="grid brute-force maximization")
    oracle.add_argument("--function", required=True)
    oracle.add_argument("--n", type=int, default=4)
    oracle.add_argument("--grid", type=int, default=51)
    oracle.add_argument("--seed", type=int, default=None)
    return parser


def _cmd_run(args) -> int:
    base = _base_seed(args.seed_base)
    cfg = ExperimentConfig(
        experiment=args.experiment,
        n=args.n, m=args.m, K=args.K, gamma=args.gamma, delta=args.delta,
        seeds=[base + i for i in range(args.seeds)],
        k_s=args.ks,
        steps=[float(s) for s in args.steps.split(",") if s],
        data_path=args.data,
        output_dir=args.out,
        grid_oracle=args.grid_oracle,
        grid_points=args.grid,
        function=args.function,
        prop=args.prop,
        trials=args.trials,
    )
    if args.sweep:
        cfg.sweep = [float(s) for s in args.sweep.split(",") if s]
    if args.methods:
        cfg.methods = [m for m in args.methods.split(",") if m]
    records = run_experiment(cfg)
    print(f"wrote {len(records)} result records to {cfg.output_dir}")
    return 0


def _cmd_check(args) -> int:
    seed = _base_seed(args.seed)
    handle, box = _function_or_path(args.function, args.n, seed)
    report = CHECKERS[args.prop](handle, box, args.trials, args.tol, seed=seed)
    print(json.dumps({"function": args.function, "property": args.prop,
                      "seed": seed, "report": report.to_dict()},
                     indent=2, sort_keys=True))
    return 0 if report.ok else 1


def _cmd_oracle(args) -> int:
    seed = _base_seed(args.seed)
    handle, box = _function_or_path(args.function, args.n, seed)
    x_star, f_star = grid_brute_force(handle, box, args.grid)
    print(json.dumps({"function": args.function, "seed": seed,
                      "points_per_dim": args.grid,
                      "x_star": x_star.tolist(), "f_star": f_star},
                     indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "check":
            return _cmd_check(args)
        return _cmd_oracle(args)
    except (ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

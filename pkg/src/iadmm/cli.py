"""Command line entry point: ``iadmm {run,param-table,verify}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from . import bench, verify
from .admm import ConfigurationError


def _floats(text):
    return tuple(float(x) for x in text.split(","))


def _ints(text):
    return tuple(int(x) for x in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iadmm",
        description="Inertial ADMM solvers and RPCP benchmarks.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark sweep and write a CSV")
    run.add_argument("--config", help="TOML sweep description")
    run.add_argument("--m", type=_ints, help="matrix orders, comma separated")
    run.add_argument("--rank-fraction", type=_floats, help="r / m values")
    run.add_argument("--sparsity-fraction", type=_floats, help="nnz / m^2 values")
    run.add_argument("--epsilon", type=_floats, help="stopping tolerances")
    run.add_argument("--gamma", type=float, help="penalty parameter (default 0.01)")
    run.add_argument("--seed", type=_ints, help="data seeds, comma separated")
    run.add_argument("--max-iter", type=int)
    run.add_argument("--output", "-o", help="CSV path (default results.csv)")
    run.add_argument("--trace-dir", help="write one per-iteration trace CSV per run here")
    run.add_argument("--paper-scale", action="store_true",
                     help="use m = 500, 800, 1000 unless --m is given")
    run.add_argument("--timing", action="store_true",
                     help="record wall time (makes the CSV non-reproducible)")
    run.add_argument("--workers", type=int, help="parallel worker processes")
    solver = run.add_argument_group("single solver (replaces the configured solver list)")
    solver.add_argument("--solver", choices=sorted(bench.PRESETS) + ["classical", "algorithm1"],
                        help="preset name or variant")
    solver.add_argument("--alpha", type=float, help="constant inertia")
    solver.add_argument("--lam", type=float, help="relaxation parameter")
    solver.add_argument("--alpha-rule", choices=("constant", "summable"))
    solver.add_argument("--cap", type=float, help="cap of the summable inertia rule")
    solver.add_argument("--name", help="solver label in the CSV")

    table = sub.add_parser("param-table", help="print alpha, delta, lambda rows")
    table.add_argument("--alphas", type=_floats, default=(0.05, 0.1, 0.2, 0.3))
    table.add_argument("--sigma", type=float, default=0.01)

    sub.add_parser("verify", help="run the equivalence and analytic self-checks")
    return parser


def _solver_from_args(args):
    if args.solver in bench.PRESETS:
        spec = bench.PRESETS[args.solver]
    else:
        spec = bench.SolverSpec(args.solver, args.solver)
    updates = {
        "lam": args.lam, "alpha": args.alpha, "alpha_rule": args.alpha_rule,
        "cap": args.cap, "name": args.name,
    }
    return replace(spec, **{k: v for k, v in updates.items() if v is not None})


def config_from_args(args) -> bench.ExperimentConfig:
    config = bench.load_config(args.config) if args.config else bench.ExperimentConfig()
    orders = args.m
    if orders is None and args.paper_scale:
        orders = bench.PAPER_ORDERS
    config = bench.with_overrides(
        config,
        orders=orders,
        rank_fractions=args.rank_fraction,
        sparsity_fractions=args.sparsity_fraction,
        epsilons=args.epsilon,
        gamma=args.gamma,
        seeds=args.seed,
        max_iter=args.max_iter,
        output=args.output,
        trace_dir=args.trace_dir,
        workers=args.workers,
    )
    if args.timing:
        config = replace(config, timing=True)
    if config.output is None:
        config = replace(config, output="results.csv")
    if args.solver is not None:
        config = replace(config, solvers=(_solver_from_args(args),))
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "param-table":
        bad = [a for a in args.alphas if not 0 <= a < 1]
        if bad:
            print(f"alphas must lie in [0, 1): {bad}", file=sys.stderr)
            return 2
        bench.print_param_table(args.alphas, args.sigma)
        return 0
    if args.command == "verify":
        return 0 if verify.run_all() else 1
    try:
        config = config_from_args(args)
        rows = bench.run_experiment(config, echo=print)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(rows)} rows to {config.output}")
    return 0

"""Command-line entry point.

Exit codes: 0 on success, 2 for configuration or file problems, 3 for
numerical failures inside the solver pipeline.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .blockenc import AmplificationWindowError
from .experiments import (BACKEND_CHOICES, ConfigError, ExperimentConfig,
                          run_experiment)
from .pipeline import DimensionGuardError

_COMMANDS = (
    ("solve", "run one system, classical or quantum backend"),
    ("converge", "convergence study: empirical mean error vs. bound"),
    ("equiv", "quantum-vs-classical trace comparison"),
    ("resources", "cost ledger, complexity estimates, iteration bounds"),
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkacz",
        description="Kaczmarz solver simulator and experiment harness")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in _COMMANDS:
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=True, metavar="PATH",
                         help="JSON experiment configuration")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the config seed")
        cmd.add_argument("--backend", choices=BACKEND_CHOICES, default=None,
                         help="override the config backend")
        cmd.add_argument("--out", default=None, metavar="DIR",
                         help="override the output directory")
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.backend is not None:
        overrides["backend"] = args.backend
    if args.out is not None:
        overrides["output_dir"] = args.out
    return replace(cfg, **overrides) if overrides else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
    except ConfigError as exc:
        print(f"qkacz: {exc}", file=sys.stderr)
        return 2

    try:
        summary = run_experiment(cfg, command=args.command)
    except (ConfigError, OSError) as exc:
        print(f"qkacz: {exc}", file=sys.stderr)
        return 2
    except (AmplificationWindowError, DimensionGuardError, ValueError,
            ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"qkacz: numerical failure: {exc}", file=sys.stderr)
        return 3

    _report(args.command, cfg, summary)
    return 0


def _report(command, cfg, summary):
    backend = summary.get("backend", cfg.backend)
    print(f"{command}: T={summary['T']}, backend={backend}, "
          f"output={cfg.output_dir}")
    results = summary.get("results")
    if results:
        print(f"  final mean error^2      {results['final_mean_error_sq']:.6g}")
        print(f"  final mean success prob "
              f"{results['final_mean_success_prob']:.6g}")
        if "max_deviation" in results:
            print(f"  max deviation           {results['max_deviation']:.6g}")
    if command == "resources":
        print(f"  final ledger cost       {summary['final_cost']}")
    files = ["manifest.json", "summary.json"]
    files += (["resources.csv"] if command == "resources"
              else ["trials.csv", "aggregate.csv"])
    print("  files: " + ", ".join(files))


if __name__ == "__main__":
    raise SystemExit(main())

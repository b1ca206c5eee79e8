"""Command-line front end.

Usage:
    chstep <experiment> --config <path> [--seed S] [--out DIR] [--grid M]
           [--energy-safe]

where <experiment> is one of accuracy, compare, adaptive, coarsen, certify.
Command-line flags override values from the config file.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ChstepError
from .experiments import RUNNERS, ExperimentConfig, load_config, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chstep",
        description="Variable-step time integrators for the periodic Cahn-Hilliard equation.",
    )
    parser.add_argument("experiment", choices=sorted(RUNNERS),
                        help="which experiment to run")
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--grid", type=int, help="override the spatial grid size M")
    parser.add_argument("--energy-safe", action="store_true",
                        help="clamp adaptive steps to the dissipation-safe range")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    cfg.kind = args.experiment
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    if args.grid is not None:
        cfg.M = args.grid
    if args.energy_safe:
        cfg.energy_safe = True

    try:
        result = run_experiment(cfg)
    except ChstepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.experiment == "certify":
        print(json.dumps(result, indent=2))
        return 0 if result.get("pass") else 1
    if args.experiment == "accuracy":
        print(f"{'N':>6} {'tau':>12} {'e(N)':>12} {'order':>8} {'max r':>8} {'N1':>5}")
        for row in result:
            print(f"{row['N']:>6} {row['tau']:>12.4e} {row['e']:>12.4e} "
                  f"{row['order']:>8.3f} {row['max_ratio']:>8.3f} {row['N1']:>5}")
    else:
        print(json.dumps(result, indent=2, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())

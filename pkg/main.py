#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Noncritical Squeezing Toolkit
Main entry point: runs configured experiments and compares result tables
"""

import argparse
import logging
import sys
from typing import List, Optional

from errors import ConfigError, SqueezingError
from experiments import ExperimentRunner
from models.experiment_model import EXPERIMENT_DEFAULTS, ExperimentConfig
from utils.file_handlers import compare_tables, parse_tolerances, read_config_file, read_csv

logger = logging.getLogger(__name__)


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Send timestamped diagnostics to standard error"""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stderr)
        ],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncsq",
        description="Simulate and verify noncritical squeezing from spontaneous symmetry breaking.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write its CSV")
    run.add_argument("experiment", choices=sorted(EXPERIMENT_DEFAULTS))
    run.add_argument("pairs", nargs="*", metavar="key=value", help="parameter overrides")
    run.add_argument("--config", help="file of key=value lines, overridden by the command line")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--output", help="CSV path (default: $NCSQ_OUTPUT_DIR/<experiment>_seed<S>.csv)")

    compare = sub.add_parser("compare", help="compare result tables column by column")
    compare.add_argument("csv_a")
    compare.add_argument("csv_b", nargs="?", help="second table; the first one when omitted")
    compare.add_argument("--tol", help="tolerance, or per-column col=tol,...")
    compare.add_argument("--columns", help="column pairs a:b,c:d to compare")
    return parser


def run_command(args: argparse.Namespace) -> int:
    overrides = read_config_file(args.config) if args.config else {}
    cli = ExperimentConfig.from_pairs(args.experiment, args.pairs).overrides
    overrides.update(cli)
    config = ExperimentConfig(args.experiment, overrides=overrides, seed=args.seed, output=args.output)
    runner = ExperimentRunner()
    path = runner.run(config)
    for extra in [path] + runner.extra_outputs:
        print(extra)
    return 0


def compare_command(args: argparse.Namespace) -> int:
    a = read_csv(args.csv_a)
    b = read_csv(args.csv_b) if args.csv_b else a
    tol, per_column = parse_tolerances(args.tol)
    pairs = None
    if args.columns:
        pairs = []
        for item in args.columns.split(","):
            col_a, sep, col_b = item.partition(":")
            if not sep:
                raise ConfigError(f"Expected column pair a:b, got '{item}'")
            pairs.append((col_a.strip(), col_b.strip()))
    report = compare_tables(a, b, tol, per_column, pairs)
    for row in report:
        status = "PASS" if row["passed"] else "FAIL"
        print(f"{status} {row['column']}: max_dev={row['max_dev']:.6g} tol={row['tol']:.3g}")
    return 0 if all(r["passed"] for r in report) else 1


def main(argv: Optional[List[str]] = None) -> int:
    """Parse the command line, dispatch, and map failures to exit codes"""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        if args.command == "run":
            return run_command(args)
        return compare_command(args)
    except SqueezingError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())

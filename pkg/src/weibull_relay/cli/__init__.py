"""Command line front end: ``weibull-relay run | report | selftest``."""

from __future__ import annotations

import argparse
import os
import sys
from importlib import resources

from .config import ConfigParseError, ConfigValidationError, load_scenario
from .report import ReportError, report_directory
from .runner import RunError, run_scenario
from .selftest import run_selftest

__all__ = ["main", "build_parser", "bundled_scenarios", "EXIT_OK", "EXIT_FAIL", "EXIT_PARSE",
           "EXIT_VALIDATION", "EXIT_NONCONVERGENCE"]

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NONCONVERGENCE = 4

PASS_RATE = 0.99


def bundled_scenarios():
    """Map of bundled scenario name to its path."""
    root = resources.files(__package__) / "scenarios"
    return {p.name[:-5]: str(p) for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".toml")}


def _scenario_path(arg):
    if os.path.exists(arg):
        return arg
    bundled = bundled_scenarios()
    if arg in bundled:
        return bundled[arg]
    return arg  # let the loader report the missing file


def _methods(text):
    items = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in items if m not in ("exact", "asymptotic", "mc")]
    if not items or bad:
        raise argparse.ArgumentTypeError("methods must be a comma list of exact, asymptotic, mc")
    return tuple(items)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="weibull-relay",
                                     description="Multihop Weibull relay performance sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a scenario file and write CSVs")
    run.add_argument("scenario", help="TOML file, or the name of a bundled scenario")
    run.add_argument("--out", default="results", help="output directory (default: results)")
    run.add_argument("--seed", type=int, help="override the Monte-Carlo seed")
    run.add_argument("--methods", type=_methods, help="comma list of exact,asymptotic,mc")
    run.add_argument("--trials", type=_positive_int, help="override the Monte-Carlo trial count")
    run.add_argument("--workers", type=_positive_int, default=1,
                     help="process count for sweep points (default: 1)")

    rep = sub.add_parser("report", help="compare exact and mc columns of CSVs in a directory")
    rep.add_argument("directory")

    sub.add_parser("selftest", help="check special functions against reference values")
    sub.add_parser("list", help="list bundled scenarios")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "run":
        try:
            scenario = load_scenario(_scenario_path(args.scenario))
        except ConfigParseError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PARSE
        except ConfigValidationError as exc:
            print(f"error: invalid scenario: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        try:
            run_scenario(scenario, args.out, seed=args.seed, methods=args.methods,
                         trials=args.trials, workers=args.workers, log=print)
        except ConfigValidationError as exc:
            print(f"error: invalid scenario: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        except RunError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NONCONVERGENCE
        return EXIT_OK
    if args.command == "report":
        try:
            text, rate, _ = report_directory(args.directory)
        except (ReportError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAIL
        print(text)
        return EXIT_OK if rate >= PASS_RATE else EXIT_FAIL
    if args.command == "list":
        for name, path in bundled_scenarios().items():
            print(f"{name}\t{path}")
        return EXIT_OK
    return EXIT_OK if run_selftest() else EXIT_FAIL

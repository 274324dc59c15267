"""Command-line entry point: ``tanakasim list-scenarios`` and ``tanakasim run``.

Exit codes: 0 all verdicts pass, 1 a statistical verdict failed, 2 invalid
parameters or config, 3 unknown scenario, 4 importance weights collapsed.
"""

from __future__ import annotations

import argparse
import sys

from .. import __version__
from ..girsanov import EssCollapseError
from ..parallel import THREADS_ENV, default_threads
from .config import ConfigError
from .scenarios import UnknownScenarioError, list_scenarios, resolve_config, run_scenario

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_UNKNOWN = 3
EXIT_ESS = 4


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tanakasim", description="Monte Carlo checks for the one-sided Tanaka equation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list-scenarios", help="print the scenario registry")
    run = sub.add_parser("run", help="run one scenario",
                         epilog=f"{THREADS_ENV} sets the worker thread count (default: all CPUs).")
    run.add_argument("scenario")
    run.add_argument("--config", metavar="FILE", help="INI file with a section per scenario")
    run.add_argument("--seed", type=int)
    run.add_argument("--paths", type=_positive_int, dest="n_paths")
    run.add_argument("--dt", type=_positive_float)
    run.add_argument("--horizon", type=_positive_float)
    run.add_argument("--out", metavar="FILE", help="write the JSON report here instead of stdout")
    run.add_argument("--csv", metavar="FILE", help="write per-path summaries as CSV")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name, desc, claim in list_scenarios():
            print(f"{name}\t{desc}\t[{claim}]")
        return EXIT_PASS

    try:
        cfg = resolve_config(args.scenario, args.config, seed=args.seed, n_paths=args.n_paths,
                             dt=args.dt, horizon=args.horizon)
        threads = default_threads()
        report = run_scenario(cfg, threads)
    except UnknownScenarioError:
        print(f"unknown scenario {args.scenario!r}; see 'tanakasim list-scenarios'", file=sys.stderr)
        return EXIT_UNKNOWN
    except (ConfigError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EssCollapseError as exc:
        print(f"importance weights collapsed: {exc}", file=sys.stderr)
        return EXIT_ESS

    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.csv:
        try:
            report.write_csv(args.csv)
        except ValueError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_CONFIG
    return EXIT_PASS if report.passed else EXIT_FAIL

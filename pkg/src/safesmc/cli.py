"""Command-line interface for safesmc."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

from safesmc.checks import check_theorem2, check_theorem3, compare_filters
from safesmc.config import load_config
from safesmc.constants import DEFAULT_SWEEPS
from safesmc.exceptions import SafeSmcError
from safesmc.oracle import run_oracle_suite
from safesmc.simulation import run_ensemble, run_scenario, write_run
from safesmc.trajectory import compute_metrics, load_log, load_metrics

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="safesmc",
        description="Safe sliding-mode control of a 3-DOF vessel: simulate, check, benchmark.",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Simulate one scenario and write its logs")
    run.add_argument("config", help="Config name (without .json) or path to a config file")
    run.add_argument("--out", required=True, help="Output directory for the run artifacts")
    run.add_argument("--seed", type=int, default=None, help="Override the scenario seed")

    ens = sub.add_parser("ensemble", help="Run a seeded ensemble and print its metrics")
    ens.add_argument("config")
    ens.add_argument("--runs", type=int, required=True, help="Number of ensemble members")
    ens.add_argument("--workers", type=int, default=1, help="Parallel worker processes")
    ens.add_argument("--out", default=None, help="Write each member into <out>/run_NNN")

    for name, text, runs in (
        ("check-t2", "Ultimate boundedness check on an obstacle-free scenario", 10),
        ("check-t3", "Safety and boundedness check on an obstacle scenario", 10),
    ):
        check = sub.add_parser(name, help=text)
        check.add_argument("config")
        check.add_argument("--runs", type=int, default=runs, help="Ensemble size")
        check.add_argument("--workers", type=int, default=1, help="Parallel worker processes")

    cmp_ = sub.add_parser("compare", help="Projection filter vs exact QP in the loop")
    cmp_.add_argument("config")
    cmp_.add_argument("--runs", type=int, default=3, help="Number of paired runs")

    suite = sub.add_parser("oracle-suite", help="Projection vs exact QP on random instances")
    suite.add_argument("--instances", type=int, default=1000, help="Number of instances")
    suite.add_argument("--seed", type=int, default=0, help="Instance generator seed")
    suite.add_argument("--sweeps", type=int, default=DEFAULT_SWEEPS, help="Projection sweeps")

    replay = sub.add_parser("replay", help="Recompute metrics from a saved run directory")
    replay.add_argument("run_dir", help="Directory written by `safesmc run`")

    return parser


def _validate_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    for option in ("runs", "workers", "instances", "sweeps"):
        value = getattr(args, option, None)
        if value is not None and value < 1:
            parser.error(f"--{option} must be >= 1.")
    seed = getattr(args, "seed", None)
    if seed is not None and seed < 0:
        parser.error("--seed must be >= 0.")


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)


def _print_json(data: dict[str, Any] | list[Any]) -> None:
    print(json.dumps(data, indent=2))


def _replay(run_dir: Path) -> int:
    recomputed = json.loads(json.dumps(compute_metrics(load_log(run_dir)).to_dict()))
    saved = load_metrics(run_dir)
    mismatched = sorted(k for k in recomputed.keys() | saved.keys()
                        if recomputed.get(k) != saved.get(k))
    if mismatched:
        _print_json({"mismatched": mismatched, "saved": saved, "recomputed": recomputed})
        return 1
    print(f"Replay matches: {run_dir}")
    return 0


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "run":
        config = load_config(args.config)
        if args.seed is not None:
            config = config.with_seed(args.seed)
        log, metrics = run_scenario(config)
        out = write_run(Path(args.out), config, log, metrics)
        print(f"Run complete: {out}")
        return 0
    if args.command == "ensemble":
        config = load_config(args.config)
        members = run_ensemble(config, args.runs, args.workers)
        if args.out:
            for member in members:
                write_run(Path(args.out) / f"run_{member.index:03d}",
                          config.with_seed(member.seed), member.log, member.metrics)
        _print_json([
            {"index": m.index, "seed": m.seed, "metrics": m.metrics.to_dict()} for m in members
        ])
        return 0
    if args.command == "check-t2":
        t2_report = check_theorem2(load_config(args.config), args.runs, args.workers)
        _print_json(t2_report.to_dict())
        return 0 if t2_report.passed else 1
    if args.command == "check-t3":
        t3_report = check_theorem3(load_config(args.config), args.runs, args.workers)
        _print_json(t3_report.to_dict())
        return 0 if t3_report.passed else 1
    if args.command == "compare":
        cmp_report = compare_filters(load_config(args.config), args.runs)
        _print_json(cmp_report.to_dict())
        return 0 if cmp_report.passed else 1
    if args.command == "oracle-suite":
        suite = run_oracle_suite(args.instances, args.seed, sweeps=args.sweeps)
        _print_json(suite.to_dict())
        return 0 if suite.passed else 1
    return _replay(Path(args.run_dir))


def main() -> None:
    """CLI entry point."""
    parser = _build_parser()
    args = parser.parse_args()
    _validate_args(parser, args)
    _configure_logging(args.verbose)

    try:
        code = _dispatch(args)
    except SafeSmcError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        sys.exit(1)
    if code:
        sys.exit(code)

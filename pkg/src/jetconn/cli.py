"""Command-line entry point: ``verify <suite> [options]``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .harness import SUITES, Scenario, ScenarioError, emit_report, run_suite

SEED_ENV = "JETCONN_SEED"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="verify", description="Run seeded verification suites.")
    p.add_argument("suite", help=f"one of: {', '.join(SUITES + ('all',))}")
    p.add_argument("--seed", type=int, help=f"64-bit seed (default: ${SEED_ENV})")
    p.add_argument("--order", type=int, help="truncation order T")
    p.add_argument("--dim", type=int, help="projective dimension n")
    p.add_argument("--trials", type=int, help="randomized trials per check")
    p.add_argument("--mode", choices=("exact", "float"), help="scalar mode")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--scenario", help="JSON scenario file; flags override its values")
    return p


def scenario_from_args(args) -> Scenario:
    data = {}
    if args.scenario:
        with open(args.scenario, encoding="utf-8") as fh:
            data = json.load(fh)
    data["suite"] = args.suite
    for key in ("seed", "order", "dim", "trials", "mode"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if "seed" not in data:
        env = os.environ.get(SEED_ENV)
        if env is None:
            raise ScenarioError(f"a seed is required (--seed, the scenario file, or ${SEED_ENV})")
        try:
            data["seed"] = int(env)
        except ValueError as exc:
            raise ScenarioError(f"${SEED_ENV} is not an integer") from exc
    return Scenario.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = scenario_from_args(args)
    except (ScenarioError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"verify: {exc}", file=sys.stderr)
        return 2
    report = run_suite(scenario)
    try:
        text = emit_report(report, args.format, args.out)
    except OSError as exc:
        print(f"verify: cannot write report: {exc}", file=sys.stderr)
        return 2
    if args.out is None:
        sys.stdout.write(text)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())

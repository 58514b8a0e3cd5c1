"""Command-line runner for the built-in scenario suite.

    affinekit list
    affinekit run <scenario|all> --out DIR [--seed N] [--steps K] [--grid G]
                  [--config FILE]
    affinekit report --merge DIR

``run`` exits nonzero when any suite assertion fails.  A JSON config file
may override per-scenario parameters, keyed by scenario name.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .scenarios import build_scenario, catalog, list_scenarios, merge_reports, run_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affinekit",
        description="geodesics, holonomy, invariant norms, affinity scenarios",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run one scenario or all of them")
    runp.add_argument("scenario", help="scenario name or 'all'")
    runp.add_argument("--out", required=True, help="output directory for reports")
    runp.add_argument("--seed", type=int, default=0, help="base random seed")
    runp.add_argument("--steps", type=int, default=None,
                      help="integrator step override")
    runp.add_argument("--grid", type=int, default=None,
                      help="direction-count override for coverage tests")
    runp.add_argument("--config", default=None,
                      help="JSON file with per-scenario parameter overrides")

    sub.add_parser("list", help="print the scenario catalog")

    repp = sub.add_parser("report", help="combine reports from a directory")
    repp.add_argument("--merge", required=True, help="directory of scenario reports")
    return parser


def _load_config(path):
    if path is None:
        return {}
    return json.loads(Path(path).read_text())


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "list":
        for line in list_scenarios():
            print(line)
        return 0

    if args.command == "report":
        merged = merge_reports(args.merge)
        for name, entry in sorted(merged["scenarios"].items()):
            status = "PASS" if entry["passed"] else "FAIL"
            print(f"[{status}] {name}: {entry['n_checks']} checks, "
                  f"{entry['n_failed']} failed ({entry['report']})")
        print(f"merged report written to {Path(args.merge) / 'merged.json'}")
        return 0 if merged["passed"] else 1

    config = _load_config(args.config)
    names = list(catalog()) if args.scenario == "all" else [args.scenario]
    failures = 0
    for name in names:
        overrides = dict(config.get(name, {}))
        if args.steps is not None:
            overrides.setdefault("steps", args.steps)
        if args.grid is not None:
            overrides.setdefault("grid", args.grid)
        started = time.perf_counter()
        try:
            scenario = build_scenario(name, seed=args.seed, overrides=overrides)
        except KeyError as err:
            print(err.args[0], file=sys.stderr)
            return 2
        result = run_scenario(scenario, args.out)
        elapsed = time.perf_counter() - started
        status = "PASS" if result.passed else "FAIL"
        print(f"[{status}] {name} ({elapsed:.1f}s) -> {result.report_path}")
        if not result.passed:
            failures += 1
            for step in result.report["steps"]:
                for check in step["checks"]:
                    if not check["passed"]:
                        print(
                            f"    failed: {step['op']}/{check['name']} = "
                            f"{check['value']} (want {check['bound']})"
                        )
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())

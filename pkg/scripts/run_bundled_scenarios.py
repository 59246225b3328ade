#!/usr/bin/env python3
"""Run every bundled scenario and summarize the outcome.

Simulation scenarios go through the simulate pipeline, the planning scenario
through plan --validate. Outputs land under --out (one directory per
scenario); the summary table shows the exit status of each.

Usage: python scripts/run_bundled_scenarios.py [--out DIR]
"""

import argparse
import os
import sys

from flydrive import cli
from flydrive.scenario import load_scenario


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="scenario_runs")
    args = ap.parse_args(argv)

    results = {}
    for name, path in cli.bundled_scenarios().items():
        out_dir = os.path.join(args.out, name)
        scenario = load_scenario(path)
        if scenario.is_planning:
            argv_run = ["plan", path, "--validate", "--out", out_dir]
        else:
            argv_run = ["simulate", path, "--out", out_dir]
        print(f"=== {name} ===")
        results[name] = cli.main(argv_run)
        print()

    width = max(len(n) for n in results)
    print("summary:")
    failures = 0
    for name, code in results.items():
        verdict = "ok" if code == 0 else f"exit {code}"
        print(f"  {name:<{width}}  {verdict}")
        failures += code != 0
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

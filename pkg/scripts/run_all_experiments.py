#!/usr/bin/env python3
"""Run every registered experiment and write the JSON reports.

Usage:
    python scripts/run_all_experiments.py [--out-dir reports] [--seed 7]

Exit status is 0 only if every experiment passes.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from projderiv.experiments import (
    experiment_ids,
    report_to_json,
    resolve_config,
    run_experiment,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="reports")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    overrides = {"seed": args.seed} if args.seed is not None else {}

    failures = []
    for name in experiment_ids():
        started = time.time()
        config = resolve_config(name, overrides=overrides)
        report = run_experiment(config)
        path = out_dir / f"{name}_report.json"
        path.write_text(report_to_json(report))
        status = "PASS" if report.passed else "FAIL"
        print(f"{status}  {name:32s} {time.time() - started:6.2f}s  -> {path}")
        if not report.passed:
            failures.append(name)
    if failures:
        print(f"failing experiments: {', '.join(failures)}", file=sys.stderr)
        return 1
    print(f"all {len(experiment_ids())} experiments passed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
"""
Run every shipped experiment configuration and summarise the verdicts.

Usage:
    python scripts/run_experiment.py                   # all configs, default seeds
    python scripts/run_experiment.py --only theorem2   # one config
    python scripts/run_experiment.py --runs 2000 --out results/quick

Reports go to <out>/<config name>/<command>/.
"""

import argparse
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from fading_brw.exceptions import FadingBRWError, HypothesisViolation
from fading_brw.harness import load_config, run_command, write_report
from fading_brw.utils import setup_logging
from fading_brw.utils.logging_utils import get_logger

CONFIG_DIR = Path(__file__).parent.parent / "configs"

# config file stem -> command
EXPERIMENTS = {
    "enumeration": "simulate",
    "theorem1": "verify-theorem1",
    "theorem2": "verify-theorem2",
    "theorem2_independent": "verify-theorem2",
    "theorem3": "verify-theorem3",
    "moments": "moments",
    "example2": "example2",
    "supercritical": "supercritical-demo",
    "class_check": "class-check",
}

setup_logging()
logger = get_logger(__name__)


def run_one(name: str, runs: int | None, out: str | None, workers: int | None) -> str:
    """Run one configuration; returns its verdict."""
    config = load_config(CONFIG_DIR / f"{name}.json").with_overrides(
        n_runs=runs, output=out, workers=workers
    )
    command = EXPERIMENTS[name]
    try:
        report = run_command(command, config)
    except HypothesisViolation as e:
        logger.warning(f"{name}: outside hypotheses ({e})")
        return "outside hypotheses"
    write_report(report, Path(config.output) / name)
    return report.verdict


def main():
    """Main entry point."""
    parser = argparse.ArgumentParser(description="Run the shipped experiment configurations")
    parser.add_argument("--only", choices=sorted(EXPERIMENTS), help="Run a single configuration")
    parser.add_argument("--runs", type=int, help="Override replications per level")
    parser.add_argument("--out", type=str, help="Override the output directory")
    parser.add_argument("--workers", type=int, help="Worker processes")
    args = parser.parse_args()

    names = [args.only] if args.only else list(EXPERIMENTS)
    verdicts = {}
    try:
        for name in names:
            verdicts[name] = run_one(name, args.runs, args.out, args.workers)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        sys.exit(1)
    except FadingBRWError as e:
        logger.error(f"Experiment failed: {e}", exc_info=True)
        sys.exit(1)

    logger.info("=" * 60)
    for name, verdict in verdicts.items():
        logger.info(f"{name:<15} {verdict}")
    sys.exit(3 if "fail" in verdicts.values() else 0)


if __name__ == "__main__":
    main()

"""
Command-line entry point.

Usage:
    fading-brw simulate --config configs/enumeration.json --seed 42
    fading-brw verify-theorem2 --config configs/theorem2.json --runs 20000 --workers 4
    fading-brw moments --config configs/moments.json --format json

Exit codes: 0 on pass or complete, 2 when the configuration violates the
hypotheses of the suite, 3 when the verdict is fail, 1 on any other error.
"""

import argparse
import sys
from typing import Optional

from .exceptions import FadingBRWError, HypothesisViolation
from .harness.config import ExperimentConfig, load_config
from .harness.constants import EXIT_HYPOTHESIS, EXIT_OK, EXIT_VERDICT, FAIL
from .harness.report import FORMATS, write_report
from .harness.suites import COMMANDS, run_command
from .settings import load_settings
from .utils.logging_utils import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_ERROR = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fading-brw",
        description="Simulate fading branching random walks and check their tail asymptotics",
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="Experiment to run")
    parser.add_argument("--config", type=str, help="JSON experiment configuration")
    parser.add_argument("--seed", type=int, help="Master seed (fresh entropy if omitted)")
    parser.add_argument("--runs", type=int, help="Replications per level")
    parser.add_argument("--out", type=str, help="Output directory")
    parser.add_argument("--format", choices=FORMATS, default="csv", help="Table format")
    parser.add_argument("--workers", type=int, help="Worker processes")
    parser.add_argument("--log-level", type=str, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--progress", action="store_true", help="Show batch progress bars")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Parse arguments, run one command, write its report and return the exit code."""
    args = build_parser().parse_args(argv)
    settings = load_settings()
    setup_logging(level=args.log_level or settings.log_level, log_file=settings.log_file)

    try:
        config = load_config(args.config) if args.config else ExperimentConfig()
        config = config.with_overrides(
            seed=args.seed,
            n_runs=args.runs,
            output=args.out or (None if args.config else settings.output_dir),
            workers=args.workers,
        )
        report = run_command(args.command, config, progress=args.progress)
    except HypothesisViolation as e:
        logger.error(f"{args.command}: outside hypotheses: {e}")
        return EXIT_HYPOTHESIS
    except FadingBRWError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_ERROR

    paths = write_report(report, config.output, args.format)
    logger.info(f"{args.command}: verdict {report.verdict}, seed {report.seed}, {len(paths)} files")
    return EXIT_VERDICT if report.verdict == FAIL else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

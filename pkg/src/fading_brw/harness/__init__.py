"""Experiment configuration, verification suites and report emission."""

from .config import ExperimentConfig, load_config
from .constants import (
    COMPLETE,
    EXIT_HYPOTHESIS,
    EXIT_OK,
    EXIT_VERDICT,
    FAIL,
    OUTSIDE_HYPOTHESES,
    PASS,
    thresholds,
)
from .report import SuiteReport, write_report
from .suites import (
    COMMANDS,
    battery_verdict,
    cmd_class_check,
    cmd_example2,
    cmd_moments,
    cmd_simulate,
    cmd_supercritical_demo,
    cmd_verify_theorem1,
    cmd_verify_theorem2,
    cmd_verify_theorem3,
    fitted_slope,
    run_command,
    trend_verdict,
)

__all__ = [
    "ExperimentConfig",
    "load_config",
    "SuiteReport",
    "write_report",
    "COMMANDS",
    "run_command",
    "cmd_simulate",
    "cmd_verify_theorem1",
    "cmd_verify_theorem2",
    "cmd_verify_theorem3",
    "cmd_supercritical_demo",
    "cmd_moments",
    "cmd_example2",
    "cmd_class_check",
    "trend_verdict",
    "battery_verdict",
    "fitted_slope",
    "thresholds",
    "PASS",
    "FAIL",
    "COMPLETE",
    "OUTSIDE_HYPOTHESES",
    "EXIT_OK",
    "EXIT_HYPOTHESIS",
    "EXIT_VERDICT",
]

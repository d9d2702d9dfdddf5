"""Suite reports and their files.

A report is written as ``<out>/<command>/<table>.csv`` (or ``.json`` records)
per table plus ``<out>/<command>/report.json`` with the resolved configuration,
seed, thresholds, verdict, notes and all rows.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import pandas as pd

from ..utils.file_io import ensure_directory, save_json, save_table
from ..utils.logging_utils import get_logger
from .constants import thresholds

logger = get_logger(__name__)

FORMATS = ("csv", "json")


@dataclass
class SuiteReport:
    """
    Outcome of one command.

    Attributes:
        command: CLI command name
        tables: Named result tables
        verdict: pass, fail, complete or "outside hypotheses"
        notes: Human-readable remarks (hypothesis checks, fallbacks)
        config: Resolved configuration
        seed: Master seed actually used
    """

    command: str
    tables: dict[str, pd.DataFrame] = field(default_factory=dict)
    verdict: str = "complete"
    notes: list[str] = field(default_factory=list)
    config: dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None

    def note(self, message: str) -> None:
        logger.info(f"[{self.command}] {message}")
        self.notes.append(message)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "verdict": self.verdict,
            "seed": self.seed,
            "thresholds": thresholds(),
            "notes": self.notes,
            "config": self.config,
            "tables": {name: df.to_dict(orient="records") for name, df in self.tables.items()},
        }


def write_report(report: SuiteReport, out_dir: Union[str, Path], fmt: str = "csv") -> list[Path]:
    """
    Write every table and the JSON summary of ``report``.

    Returns:
        Paths written, summary last
    """
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    base = ensure_directory(Path(out_dir) / report.command)
    paths = []
    for name, df in report.tables.items():
        if fmt == "csv":
            paths.append(save_table(df, base / f"{name}.csv"))
        else:
            paths.append(save_json(df.to_dict(orient="records"), base / f"{name}.json"))
    paths.append(save_json(report.to_dict(), base / "report.json"))
    logger.info(f"{report.command}: wrote {len(paths)} files to {base}")
    return paths

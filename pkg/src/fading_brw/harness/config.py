"""Experiment configuration files.

A configuration is a JSON document with four spec blocks and run settings:

    {
        "law": {"family": "pareto", "beta": 2.0},
        "environment": {"prefix": [{"2": 1}], "tail": {"rule": "degenerate"}},
        "boundary": {"slope": 1.0},
        "stopping": {"kind": "fading_time", "class": "HM"},
        "x_grid": [10, 20, 40, 80],
        "n_runs": 20000,
        "mode": "auto",
        "seed": 12345,
        "output": "results",
        "options": {}
    }

``options`` holds command-specific settings (battery size, horizons, ...).
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Union

from ..branching.environment import Environment, environment_from_spec
from ..distributions.increments import IncrementLaw, law_from_spec
from ..exceptions import ConfigError
from ..montecarlo.estimators import MODES
from ..utils.file_io import load_json
from ..walk.boundaries import Boundary, boundary_from_spec
from ..walk.engine import DEFAULT_HORIZON_CAP
from ..walk.stopping import StoppingRule, stopping_from_spec

KNOWN_KEYS = {
    "law",
    "environment",
    "boundary",
    "stopping",
    "x_grid",
    "n_runs",
    "mode",
    "seed",
    "workers",
    "horizon_cap",
    "population_cap",
    "output",
    "options",
}


@dataclass
class ExperimentConfig:
    """
    One experiment: model blocks plus run settings.

    Attributes:
        law: Increment law block
        environment: Environment block
        boundary: Boundary block
        stopping: Stopping rule block (with optional declared "class")
        x_grid: Increasing levels
        n_runs: Replications per level
        mode: crude, big-jump or auto
        seed: Master seed
        workers: Worker processes (settings default when None)
        horizon_cap: Generations simulated at most
        population_cap: Optional abort threshold on Z_n
        output: Output directory
        options: Command-specific settings
    """

    law: dict[str, Any] = field(default_factory=lambda: {"family": "pareto", "beta": 2.0})
    environment: dict[str, Any] = field(default_factory=dict)
    boundary: dict[str, Any] = field(default_factory=lambda: {"slope": 1.0})
    stopping: dict[str, Any] = field(default_factory=lambda: {"kind": "fixed", "n": 1})
    x_grid: list[float] = field(default_factory=lambda: [10.0, 20.0, 40.0])
    n_runs: int = 10000
    mode: str = "auto"
    seed: Optional[int] = None
    workers: Optional[int] = None
    horizon_cap: int = DEFAULT_HORIZON_CAP
    population_cap: Optional[int] = None
    output: str = "results"
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_runs < 0:
            raise ConfigError(f"n_runs must be non-negative, got {self.n_runs}")
        grid = [float(x) for x in self.x_grid]
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"x_grid must be increasing, got {grid}")
        self.x_grid = grid

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"Configuration must be a JSON object, got {type(data).__name__}")
        unknown = set(data) - KNOWN_KEYS
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {sorted(unknown)}")
        return cls(**data)

    def with_overrides(
        self,
        seed: Optional[int] = None,
        n_runs: Optional[int] = None,
        output: Optional[str] = None,
        workers: Optional[int] = None,
    ) -> "ExperimentConfig":
        """Copy with command-line values applied (None keeps the file value)."""
        given = {"seed": seed, "n_runs": n_runs, "output": output, "workers": workers}
        changes = {k: v for k, v in given.items() if v is not None}
        return replace(self, **changes)

    # ------------------------------------------------------------------ builders

    def build_law(self) -> IncrementLaw:
        return law_from_spec(self.law)

    def build_environment(self) -> Environment:
        return environment_from_spec(self.environment)

    def build_boundary(self) -> Boundary:
        return boundary_from_spec(self.boundary)

    def build_stopping(self) -> StoppingRule:
        """Stopping rule, checked against its declared independence class."""
        return stopping_from_spec(self.stopping)

    def option(self, name: str, default: Any = None) -> Any:
        return self.options.get(name, default)

    def resolved(self) -> dict[str, Any]:
        """Configuration with every block rebuilt through its ``to_spec``."""
        return {
            "law": self.build_law().to_spec(),
            "environment": self.build_environment().to_spec(),
            "boundary": self.build_boundary().to_spec(),
            "stopping": self.build_stopping().to_spec(),
            "x_grid": self.x_grid,
            "n_runs": self.n_runs,
            "mode": self.mode,
            "seed": self.seed,
            "workers": self.workers,
            "horizon_cap": self.horizon_cap,
            "population_cap": self.population_cap,
            "output": self.output,
            "options": self.options,
        }


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Read an experiment configuration file.

    Raises:
        ConfigError: If the file is missing, not JSON or malformed
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Configuration file not found: {path}")
    try:
        data = load_json(path)
    except ValueError as e:
        raise ConfigError(f"Configuration {path} is not valid JSON: {e}") from e
    return ExperimentConfig.from_dict(data)

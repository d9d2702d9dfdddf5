"""Environment-driven settings.

Values come from the process environment, optionally seeded from a ``.env``
file in the working directory. Command-line flags override them.
"""

import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()


@dataclass(frozen=True)
class Settings:
    """Runtime defaults shared by the CLI and the Monte Carlo runner."""

    workers: int = 1
    log_level: str = "INFO"
    output_dir: str = "results"
    batch_size: int = 2000
    log_file: str = "logs/fading_brw.log"


def _int_from_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError as e:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from e
    if value < 1:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def load_settings() -> Settings:
    """
    Build settings from ``FADING_BRW_*`` environment variables.

    Returns:
        Settings with environment overrides applied

    Example:
        >>> settings = load_settings()
        >>> settings.batch_size
        2000
    """
    return Settings(
        workers=_int_from_env("FADING_BRW_WORKERS", Settings.workers),
        log_level=os.getenv("FADING_BRW_LOG_LEVEL", Settings.log_level),
        output_dir=os.getenv("FADING_BRW_OUTPUT_DIR", Settings.output_dir),
        batch_size=_int_from_env("FADING_BRW_BATCH_SIZE", Settings.batch_size),
        log_file=os.getenv("FADING_BRW_LOG_FILE", Settings.log_file),
    )

"""Logging configuration shared by the CLI, the suites and the samplers.

Every stateful component owns ``self.logger = get_logger(self.__class__.__name__)``;
module-level helpers use ``get_logger(__name__)``.
"""

import logging
import sys
import time
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(
    level: str = "INFO",
    log_file: Optional[str] = "logs/fading_brw.log",
    console_output: bool = True,
    format_string: Optional[str] = None,
) -> None:
    """
    Configure the root logger for a simulation run.

    Creates the log directory if needed. Calling it twice replaces the previous
    handlers, so the CLI can reconfigure after reading ``--log-level``.

    Args:
        level: Logging level name (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Path to the log file. If None, only console logging is used.
        console_output: Whether to also log to stdout (default: True)
        format_string: Custom format string. If None, uses DEFAULT_FORMAT.

    Example:
        >>> setup_logging(level="DEBUG", log_file=None)
        >>> get_logger("demo").debug("Logging configured")
    """
    numeric_level = getattr(logging, level.upper(), logging.INFO)
    formatter = logging.Formatter(format_string or DEFAULT_FORMAT)

    handlers: list[logging.Handler] = []
    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(path))
    if console_output:
        handlers.append(logging.StreamHandler(sys.stdout))
    for handler in handlers:
        handler.setLevel(numeric_level)
        handler.setFormatter(formatter)

    logging.basicConfig(level=numeric_level, handlers=handlers, force=True)
    get_logger(__name__).debug(f"Logging configured: level={level}, file={log_file}")


def get_logger(name: str, level: Optional[str] = None) -> logging.Logger:
    """
    Get a named logger with an optional level override.

    Args:
        name: Logger name (class name or __name__)
        level: Optional logging level override

    Returns:
        Logger instance
    """
    logger = logging.getLogger(name)

    if level:
        logger.setLevel(getattr(logging, level.upper(), logging.INFO))

    return logger


@contextmanager
def log_elapsed(logger: logging.Logger, label: str) -> Iterator[None]:
    """
    Log the wall-clock duration of a block at INFO level.

    Example:
        >>> with log_elapsed(get_logger(__name__), "crossing estimate"):
        ...     pass
    """
    start = time.perf_counter()
    try:
        yield
    finally:
        logger.info(f"{label} finished in {time.perf_counter() - start:.2f}s")

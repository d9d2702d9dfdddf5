"""Utility modules for the fading BRW toolkit."""

from .file_io import ensure_directory, load_json, save_json, save_table
from .logging_utils import get_logger, log_elapsed, setup_logging

__all__ = [
    "save_json",
    "load_json",
    "save_table",
    "ensure_directory",
    "setup_logging",
    "get_logger",
    "log_elapsed",
]

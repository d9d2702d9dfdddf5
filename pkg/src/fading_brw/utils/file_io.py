"""Report and table persistence.

JSON documents carry the resolved configuration of an experiment, CSV tables
carry its rows. Both writers create parent directories on demand.
"""

import json
import math
from pathlib import Path
from typing import Any, Union

import numpy as np
import pandas as pd


def _to_builtin(value: Any) -> Any:
    """Convert numpy scalars and non-finite floats into JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_to_builtin(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def save_json(
    data: Union[dict[str, Any], list], filepath: Union[str, Path], indent: int = 2
) -> Path:
    """
    Save data to a JSON file with pretty formatting.

    numpy scalars are converted to Python numbers; infinities are written as the
    strings ``"inf"`` / ``"-inf"`` and NaN as ``null``.

    Args:
        data: Dictionary or list to save
        filepath: Destination path
        indent: Number of spaces for indentation (default: 2)

    Returns:
        Path object of the saved file

    Example:
        >>> save_json({"estimate": 0.012}, "results/simulate/report.json")
        PosixPath('results/simulate/report.json')
    """
    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)

    with open(filepath, "w", encoding="utf-8") as f:
        json.dump(_to_builtin(data), f, indent=indent, ensure_ascii=False, sort_keys=False)

    return filepath


def load_json(filepath: Union[str, Path]) -> Union[dict[str, Any], list]:
    """
    Load a JSON file.

    Raises:
        FileNotFoundError: If the file doesn't exist
        json.JSONDecodeError: If the file is not valid JSON
    """
    with open(Path(filepath), encoding="utf-8") as f:
        return json.load(f)


def save_table(df: pd.DataFrame, filepath: Union[str, Path]) -> Path:
    """
    Write a table as CSV without the index.

    Floats are written with ``repr`` precision so that reruns with the same seed
    produce byte-identical files.

    Args:
        df: Table to write
        filepath: Destination path

    Returns:
        Path object of the saved file
    """
    filepath = Path(filepath)
    filepath.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(filepath, index=False, float_format="%.17g")
    return filepath


def ensure_directory(dirpath: Union[str, Path]) -> Path:
    """Ensure a directory exists and return it as a Path."""
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    return dirpath

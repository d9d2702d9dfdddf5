"""Receding boundaries g with g(0) = 0.

A boundary is either linear, g(n) = c n, or a table g(1), ..., g(k) continued
linearly with a tail slope. An optional offset a gives g + a for n >= 1.
"""

from dataclasses import dataclass
from typing import Any, Optional, Union

import numpy as np

from ..exceptions import ConfigError, ParameterOutOfRange

CLASS_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ClassCheck:
    """Outcome of a G_c membership check."""

    passed: bool
    first_violation: Optional[int] = None

    def __bool__(self) -> bool:
        return self.passed


class Boundary:
    """
    Boundary g evaluated on generations n >= 0.

    Args:
        slope: Slope of the linear part (used beyond the table, or everywhere
            when there is no table)
        table: Values g(1), ..., g(k); None for a purely linear boundary
        tail_slope: Increment per generation after the table. Defaults to the last
            table increment, or g(1) for a one-entry table.
        offset: Constant a added for every n >= 1

    Example:
        >>> Boundary.linear(1.0)(7)
        7.0
        >>> Boundary.tabulated([1, 3, 6]).validate_class(1.0, 10).passed
        True
    """

    def __init__(
        self,
        slope: float = 0.0,
        table: Optional[list[float]] = None,
        tail_slope: Optional[float] = None,
        offset: float = 0.0,
    ):
        self.table = None if table is None else np.asarray(table, dtype=float)
        if self.table is not None and self.table.size == 0:
            raise ParameterOutOfRange("Boundary table must not be empty")
        if self.table is not None and tail_slope is None:
            if self.table.size > 1:
                tail_slope = float(self.table[-1] - self.table[-2])
            else:
                tail_slope = float(self.table[0])
        self.slope = float(slope)
        self.tail_slope = float(tail_slope) if tail_slope is not None else self.slope
        self.offset = float(offset)

    @classmethod
    def linear(cls, c: float) -> "Boundary":
        return cls(slope=c)

    @classmethod
    def tabulated(cls, values: list[float], tail_slope: Optional[float] = None) -> "Boundary":
        return cls(slope=tail_slope or 0.0, table=list(values), tail_slope=tail_slope)

    @property
    def kind(self) -> str:
        if self.table is None:
            return "linear"
        return "affine_plus_table" if self.offset else "tabulated"

    def shifted(self, a: float) -> "Boundary":
        """g + a for n >= 1 (g(0) stays 0)."""
        table = None if self.table is None else self.table.tolist()
        return Boundary(self.slope, table, self.tail_slope, self.offset + a)

    def __call__(self, n: Union[int, np.ndarray]) -> Union[float, np.ndarray]:
        arr = np.asarray(n)
        if np.any(arr < 0):
            raise ParameterOutOfRange(f"Generation must be non-negative, got {n}")
        nf = arr.astype(float)
        if self.table is None:
            values = self.slope * nf
        else:
            k = self.table.size
            idx = np.clip(arr.astype(np.int64) - 1, 0, k - 1)
            values = np.where(
                arr <= k, self.table[idx], self.table[-1] + self.tail_slope * (nf - k)
            )
        values = np.where(arr >= 1, values + self.offset, 0.0)
        return float(values) if arr.ndim == 0 else values

    def increments(self, n_max: int) -> np.ndarray:
        """g(n) - g(n-1) for n = 1..n_max."""
        return np.diff(self(np.arange(n_max + 1)))

    def class_slope(self) -> float:
        """Largest c with g(1) >= c and g(n+1) - g(n) >= c on the table and beyond."""
        n_check = 2 if self.table is None else self.table.size + 2
        return float(np.min(self.increments(n_check)))

    def validate_class(self, c: float, n_max: int) -> ClassCheck:
        """
        Check g(n) >= 0, g(1) >= c and g(n+1) >= g(n) + c for n < n_max.

        Returns:
            ClassCheck(passed, first violating n)
        """
        if n_max < 1:
            raise ParameterOutOfRange(f"n_max must be at least 1, got {n_max}")
        values = self(np.arange(n_max + 1))
        for n in range(1, n_max + 1):
            if values[n] < -CLASS_TOLERANCE or values[n] - values[n - 1] < c - CLASS_TOLERANCE:
                return ClassCheck(False, n)
        return ClassCheck(True)

    def to_spec(self) -> dict[str, Any]:
        spec: dict[str, Any] = {"slope": self.slope}
        if self.table is not None:
            spec["table"] = self.table.tolist()
            spec["tail_slope"] = self.tail_slope
        if self.offset:
            spec["offset"] = self.offset
        return spec

    def __repr__(self) -> str:
        return f"Boundary(kind={self.kind}, slope={self.slope}, offset={self.offset})"


def eval_boundary(boundary: Boundary, n: int) -> float:
    """g(n), with g(0) = 0."""
    return boundary(n)


def boundary_from_spec(spec: dict[str, Any]) -> Boundary:
    """
    Build a boundary from its config block.

    Example:
        >>> boundary_from_spec({"slope": 1.0})
        Boundary(kind=linear, slope=1.0, offset=0.0)
    """
    if not isinstance(spec, dict):
        raise ConfigError(f"Boundary spec must be a mapping, got {spec!r}")
    unknown = set(spec) - {"slope", "table", "tail_slope", "offset"}
    if unknown:
        raise ConfigError(f"Unknown boundary keys: {sorted(unknown)}")
    return Boundary(
        slope=float(spec.get("slope", 0.0)),
        table=spec.get("table"),
        tail_slope=spec.get("tail_slope"),
        offset=float(spec.get("offset", 0.0)),
    )

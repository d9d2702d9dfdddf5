"""Numeric diagnostics for the long-tailed, subexponential and S* classes.

These checks evaluate the defining ratios on a grid of levels and report
whether the ratios settle near their limits. They are diagnostics, not proofs.
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from scipy import integrate

from ..exceptions import ParameterOutOfRange, UnboundedPositiveMean
from ..utils.logging_utils import get_logger
from .increments import IncrementLaw

logger = get_logger(__name__)

CLASS_LIMITS = {"L": 1.0, "S": 2.0, "S*": 1.0}
RELATIVE_TOLERANCE = 0.10
DEVIATION_FLOOR = 1e-6
QUAD_EPSREL = 1e-9
PARTITION_POINTS = 32

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"
INCONCLUSIVE = "inconclusive"


@dataclass
class ClassReport:
    """Ratio diagnostics of one class check."""

    law_family: str
    class_name: str
    limit: float
    x_grid: list[float] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)
    verdict: str = INCONCLUSIVE
    x_range: tuple[float, float] = (float("nan"), float("nan"))

    @property
    def deviations(self) -> list[float]:
        return [abs(r - self.limit) / self.limit for r in self.ratios]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "class": self.class_name,
                "x": self.x_grid,
                "ratio": self.ratios,
                "limit": self.limit,
                "deviation": self.deviations,
            }
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "law": self.law_family,
            "class": self.class_name,
            "limit": self.limit,
            "x_grid": self.x_grid,
            "ratios": self.ratios,
            "verdict": self.verdict,
            "x_range": list(self.x_range),
        }


def _log_partition(lo: float, hi: float, n: int = PARTITION_POINTS) -> np.ndarray:
    """Breakpoints on [lo, hi] that are geometric in the distance from lo."""
    width = hi - lo
    if width <= 0:
        return np.array([lo, hi])
    offsets = np.geomspace(min(1e-6, width / 10.0), width, n)
    return np.concatenate(([lo], lo + offsets))


def _piecewise_quad(func, edges: np.ndarray) -> float:
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            value, _ = integrate.quad(func, a, b, epsrel=QUAD_EPSREL, epsabs=0.0, limit=200)
            total += value
    return total


def convolution_tail(law: IncrementLaw, x: float) -> float:
    """
    P(xi_1 + xi_2 > x) for two independent increments.

    For continuous laws with support [a, inf) this evaluates
    ``2 * int_a^{x/2} f(y) F̄(x - y) dy + F̄(x/2)^2`` on a log-spaced partition.
    Lattice laws are convolved exactly.

    Args:
        law: Increment law
        x: Level

    Returns:
        Tail probability of the two-fold convolution
    """
    if law.is_lattice:
        total = sum(
            p * q for v, p in law.atoms for w, q in law.atoms if float(v + w) > x
        )
        return float(total)
    lo = law.lower
    half = x / 2.0
    if not np.isfinite(lo):
        raise ParameterOutOfRange(f"{law.family} law must have a finite left support end")
    if half <= lo:
        return 1.0
    integral = _piecewise_quad(
        lambda y: float(law.density(y)) * float(law.tail(x - y)), _log_partition(lo, half)
    )
    return min(1.0, 2.0 * integral + float(law.tail(half)) ** 2)


def strong_subexponential_integral(law: IncrementLaw, x: float) -> float:
    """int_0^x F̄(x - y) F̄(y) dy, using the symmetry about x/2."""
    if x <= 0:
        return 0.0
    half = x / 2.0
    if law.is_lattice:
        breaks = {0.0, half}
        for v, _ in law.atoms:
            for point in (float(v), x - float(v)):
                if 0.0 < point < half:
                    breaks.add(point)
        edges = np.array(sorted(breaks))
        mids = 0.5 * (edges[:-1] + edges[1:])
        heights = law.tail(x - mids) * law.tail(mids)
        return float(2.0 * np.sum(heights * np.diff(edges)))
    integral = _piecewise_quad(
        lambda y: float(law.tail(x - y)) * float(law.tail(y)), _log_partition(0.0, half)
    )
    return 2.0 * integral


def is_heavy_tailed(law: IncrementLaw) -> bool:
    return law.is_heavy_tailed()


def _ratio(law: IncrementLaw, class_name: str, x: float) -> float:
    tail_x = float(law.tail(x))
    if tail_x <= 0.0:
        return float("nan")
    if class_name == "L":
        return float(law.tail(x + 1.0)) / tail_x
    if class_name == "S":
        return convolution_tail(law, x) / tail_x
    return strong_subexponential_integral(law, x) / (2.0 * law.positive_mean() * tail_x)


def decide_verdict(ratios: list[float], limit: float) -> str:
    """
    Verdict from the trailing ratios.

    Consistent when the last ratio is within 10% of the limit and the relative
    deviation did not grow over the last three points. Deviations below
    ``DEVIATION_FLOOR`` count as converged.
    """
    if len(ratios) < 3:
        return INCONCLUSIVE
    devs = [abs(r - limit) / limit for r in ratios[-3:]]
    shrinking = all(
        later <= earlier or later < DEVIATION_FLOOR for earlier, later in zip(devs, devs[1:])
    )
    if devs[-1] <= RELATIVE_TOLERANCE and shrinking:
        return CONSISTENT
    return INCONSISTENT


def check_class_membership(law: IncrementLaw, class_name: str, x_grid: list[float]) -> ClassReport:
    """
    Evaluate the defining ratio of class L, S or S* on a grid of levels.

    L reports F̄(x+1)/F̄(x) (limit 1), S reports the convolution tail over F̄(x)
    (limit 2), S* reports int_0^x F̄(x-y)F̄(y)dy / (2 m_{G+} F̄(x)) (limit 1).
    Grid points where F̄(x) vanishes are dropped; fewer than three remaining
    points give an inconclusive verdict.

    Args:
        law: Increment law
        class_name: "L", "S" or "S*"
        x_grid: Increasing positive levels

    Returns:
        ClassReport with ratios and verdict

    Raises:
        UnboundedPositiveMean: For S* when m_{G+} is infinite

    Example:
        >>> report = check_class_membership(ParetoLaw(2.0), "S*", [1e2, 1e3, 1e4, 1e5])
        >>> report.verdict
        'consistent'
    """
    if class_name not in CLASS_LIMITS:
        raise ParameterOutOfRange(f"Class must be one of {sorted(CLASS_LIMITS)}, got {class_name}")
    grid = [float(x) for x in x_grid]
    if any(x <= 0 for x in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParameterOutOfRange(f"x_grid must be positive and increasing, got {x_grid}")
    if class_name == "S*" and not np.isfinite(law.positive_mean()):
        raise UnboundedPositiveMean(f"{law.family} law has infinite positive mean")

    limit = CLASS_LIMITS[class_name]
    report = ClassReport(law_family=law.family, class_name=class_name, limit=limit)
    for x in grid:
        ratio = _ratio(law, class_name, x)
        if np.isfinite(ratio) and ratio > 0:
            report.x_grid.append(x)
            report.ratios.append(float(ratio))
        else:
            logger.debug(f"{class_name} ratio undefined at x={x} for {law.family}; dropped")

    report.verdict = decide_verdict(report.ratios, limit)
    if report.x_grid:
        tail_start = report.x_grid[-3] if len(report.x_grid) >= 3 else report.x_grid[0]
        report.x_range = (tail_start, report.x_grid[-1])
    logger.info(f"{class_name} check for {law!r}: verdict={report.verdict}")
    return report

"""Offspring laws on {1, 2, 3, ...}."""

from fractions import Fraction
from typing import Any, Optional, Union

import numpy as np

from ..exceptions import ParameterOutOfRange

Mass = Union[int, float, str, Fraction]


def _exact(value: Mass) -> Fraction:
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


class OffspringLaw:
    """
    Finitely supported offspring law with every individual leaving at least one child.

    Masses are kept exactly as fractions (floats are rationalised) so the
    enumeration oracle can use them; sampling uses float copies.

    Args:
        masses: Mapping offspring count (>= 1) -> probability

    Example:
        >>> law = OffspringLaw({1: 0.75, 2: 0.25})
        >>> law.mean, law.q
        (1.25, 0.25)
    """

    def __init__(self, masses: dict[Any, Mass]):
        if not masses:
            raise ParameterOutOfRange("Offspring law needs at least one support point")
        exact: dict[int, Fraction] = {}
        for k, p in masses.items():
            count = int(k)
            if count != float(k) or count < 1:
                raise ParameterOutOfRange(f"Offspring counts must be integers >= 1, got {k}")
            prob = _exact(p)
            if prob < 0:
                raise ParameterOutOfRange(f"Offspring mass must be non-negative, got {p} at {k}")
            if prob > 0:
                exact[count] = exact.get(count, Fraction(0)) + prob
        total = sum(exact.values())
        if abs(float(total) - 1.0) > 1e-9:
            raise ParameterOutOfRange(f"Offspring masses must sum to 1, got {float(total)}")
        if total != 1:
            exact = {k: p / total for k, p in exact.items()}
        self.exact = dict(sorted(exact.items()))
        self.support = np.array(list(self.exact), dtype=np.int64)
        self.probs = np.array([float(p) for p in self.exact.values()])
        self.mean = float(sum(k * p for k, p in self.exact.items()))
        self.q = float(1 - self.exact.get(1, Fraction(0)))
        self.max_count = int(self.support[-1])

        non_unit = {k: p for k, p in self.exact.items() if k != 1}
        mass = sum(non_unit.values())
        self._non_unit_support = np.array(list(non_unit), dtype=np.int64)
        self._non_unit_probs = (
            np.array([float(p / mass) for p in non_unit.values()]) if mass > 0 else np.array([])
        )

    @classmethod
    def from_split(cls, q: float, split: dict[int, float]) -> "OffspringLaw":
        """Law with P(1) = 1 - q and P(k) = q * split[k] for k >= 2."""
        if not 0 <= q <= 1:
            raise ParameterOutOfRange(f"Non-unit probability must lie in [0, 1], got {q}")
        masses: dict[int, Mass] = {1: 1.0 - q} if q < 1 else {}
        for k, w in split.items():
            masses[int(k)] = masses.get(int(k), 0.0) + q * w
        return cls(masses)

    @property
    def is_degenerate(self) -> bool:
        return self.q == 0.0

    def moment(self, s: float) -> float:
        """E zeta^s."""
        return float(np.sum(self.probs * self.support.astype(float) ** s))

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        return self.support[rng.choice(len(self.support), size=size, p=self.probs)]

    def sample_non_unit(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw from the law conditioned on zeta != 1."""
        if self.q == 0:
            raise ParameterOutOfRange("Degenerate law has no non-unit outcomes")
        idx = rng.choice(len(self._non_unit_support), size=size, p=self._non_unit_probs)
        return self._non_unit_support[idx]

    def to_spec(self) -> dict[str, str]:
        return {str(k): str(p) for k, p in self.exact.items()}

    def __repr__(self) -> str:
        return f"OffspringLaw(mean={self.mean:.6g}, q={self.q:.6g})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, OffspringLaw) and self.exact == other.exact

    def __hash__(self) -> int:
        return hash(tuple(self.exact.items()))


DEGENERATE = OffspringLaw({1: 1})

"""Weights w_n = E[Z_n 1(mu >= n)] of the H-series.

Every weight object knows an envelope (w_n <= envelope for all n) and a bound on
the tail mass sum_{n > N} w_n, which is what the truncation of the series needs.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from ..branching.environment import Environment
from ..exceptions import NonFadingEnvironment, ParameterOutOfRange
from ..walk.stopping import StoppingRule

# decades integrated piecewise before the final (edge, inf) call
TAIL_DECADES = 12


def _integrate_to_infinity(f, start: float) -> tuple[float, float]:
    """Integral of f over (start, inf) and its error estimate, one quad call per decade."""
    edges = max(start, 1.0) * 10.0 ** np.arange(TAIL_DECADES + 1)
    pieces = [integrate.quad(f, a, b, limit=200) for a, b in zip(edges[:-1], edges[1:])]
    pieces.append(integrate.quad(f, edges[-1], math.inf, limit=200))
    if start < edges[0]:
        pieces.append(integrate.quad(f, start, edges[0], limit=200))
    return float(sum(v for v, _ in pieces)), float(sum(e for _, e in pieces))


class Weights(ABC):
    """Base class for H-series weights."""

    #: Last n with w_n > 0, when mu is bounded
    bound: Optional[int] = None

    @property
    @abstractmethod
    def envelope(self) -> float:
        """Uniform bound on w_n."""

    @abstractmethod
    def values(self, start: int, stop: int) -> np.ndarray:
        """w_n for start <= n < stop."""

    @abstractmethod
    def tail_mass(self, n_terms: int) -> float:
        """Upper bound on sum_{n > n_terms} w_n (inf if unknown)."""

    def errors(self, start: int, stop: int) -> np.ndarray:
        """Standard errors of w_n (zero for analytic weights)."""
        return np.zeros(max(0, stop - start))

    def tail_integral(self, n_terms: int, level) -> Optional[tuple[float, float]]:
        """
        Bounds on sum_{n > n_terms} w_n * level(n) for a non-increasing ``level``.

        Returns:
            (lower, upper), or None when the weights have no continuous form
        """
        return None


class IndependentWeights(Weights):
    """
    w_n = E Z_n * P(mu >= n) for a stopping time independent of the tree.

    Args:
        env: Fading environment
        stop: Tree-independent stopping rule (Fixed or IndependentLaw)
    """

    TOTAL_MAX_TERMS = 1 << 20

    def __init__(self, env: Environment, stop: StoppingRule):
        if not stop.tree_independent:
            raise ParameterOutOfRange(f"{stop.kind} rule depends on the tree; estimate weights")
        self.big_l = env.fading_product()
        if not math.isfinite(self.big_l):
            raise NonFadingEnvironment("Analytic weights need a fading environment")
        self.env = env
        self.stop = stop
        self.bound = stop.bound

    @property
    def envelope(self) -> float:
        return self.big_l

    def values(self, start: int, stop: int) -> np.ndarray:
        if stop <= start:
            return np.empty(0)
        populations = self.env.expected_populations(stop - 1)[start - 1 :]
        return populations * np.asarray(self.stop.survival(np.arange(start, stop)), dtype=float)

    def tail_mass(self, n_terms: int) -> float:
        mass = self.stop.tail_mass(n_terms)
        return math.inf if mass is None else self.big_l * mass

    def tail_integral(self, n_terms: int, level) -> Optional[tuple[float, float]]:
        """
        Sandwich with E Z_{N+1} <= E Z_n <= L and a non-increasing P(mu >= t).

        sum_{n > N} s(n) level(n) lies between the integrals of s * level over
        (N+1, inf) and (N, inf). Quadrature error estimates widen both ends.
        """
        def f(t: float) -> float:
            return float(self.stop.survival(np.asarray(t))) * float(level(t))

        upper, upper_err = _integrate_to_infinity(f, float(n_terms))
        lower, lower_err = _integrate_to_infinity(f, float(n_terms + 1))
        low_weight = self.env.expected_population(n_terms + 1)
        return low_weight * max(lower - lower_err, 0.0), self.big_l * (upper + upper_err)

    def total(self, rel_tol: float = 1e-10) -> float:
        """E eta_mu = sum_n E Z_n P(mu >= n); ``math.inf`` when it diverges."""
        if self.bound is not None:
            return float(np.sum(self.values(1, self.bound + 1)))
        n_terms = 1024
        while True:
            head = float(np.sum(self.values(1, n_terms + 1)))
            mass = self.stop.tail_mass(n_terms)
            if mass is None or math.isinf(mass):
                return math.inf
            low = self.env.expected_population(n_terms + 1) * mass
            high = self.big_l * mass
            if high - low <= rel_tol * (head + low) or n_terms >= self.TOTAL_MAX_TERMS:
                return head + 0.5 * (low + high)
            n_terms *= 2


@dataclass
class EmpiricalWeights(Weights):
    """
    Weights estimated by simulation.

    Attributes:
        estimates: w_1, ..., w_N
        standard_errors: Their standard errors
        big_l: Envelope L
        remainder_mass: Bound on sum_{n > N} w_n
    """

    estimates: np.ndarray
    standard_errors: np.ndarray
    big_l: float
    remainder_mass: float

    def __post_init__(self):
        self.estimates = np.asarray(self.estimates, dtype=float)
        self.standard_errors = np.asarray(self.standard_errors, dtype=float)
        if self.estimates.shape != self.standard_errors.shape:
            raise ParameterOutOfRange("estimates and standard_errors must have the same length")
        if self.remainder_mass == 0:
            nonzero = np.flatnonzero(self.estimates > 0)
            self.bound = int(nonzero[-1]) + 1 if nonzero.size else 0

    @property
    def envelope(self) -> float:
        return self.big_l

    @property
    def n_estimated(self) -> int:
        return len(self.estimates)

    def values(self, start: int, stop: int) -> np.ndarray:
        out = np.zeros(max(0, stop - start))
        hi = min(stop, self.n_estimated + 1)
        if hi > start:
            out[: hi - start] = self.estimates[start - 1 : hi - 1]
        return out

    def errors(self, start: int, stop: int) -> np.ndarray:
        out = np.zeros(max(0, stop - start))
        hi = min(stop, self.n_estimated + 1)
        if hi > start:
            out[: hi - start] = self.standard_errors[start - 1 : hi - 1]
        return out

    def tail_mass(self, n_terms: int) -> float:
        if n_terms >= self.n_estimated:
            return self.remainder_mass
        return self.remainder_mass + float(np.sum(self.estimates[n_terms:]))

    def total(self) -> float:
        return float(np.sum(self.estimates)) + self.remainder_mass


def weights_for(env: Environment, stop: StoppingRule) -> IndependentWeights:
    """Analytic weights; raises for rules that need simulation."""
    return IndependentWeights(env, stop)

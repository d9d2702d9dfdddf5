"""Closed-form tail asymptotics of the stopped maximum R_mu^g.

    H-series        sum_n w_n F̄(x + g(n)),  w_n = E[Z_n 1(mu >= n)]
    fading limit    (L / c) F̄_I(x)          (infinite horizon, linear drift c > 0)
    random time     E eta_mu F̄(x)           (E(mu Z_mu) finite)
    power example   C x^(1 - alpha - beta)  (Pareto increments, power-law mu)
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from ..branching.environment import Environment
from ..branching.trajectory import TrajectorySampler
from ..distributions.increments import IncrementLaw
from ..exceptions import NonSummable, ParameterOutOfRange
from ..utils.logging_utils import get_logger
from ..walk.boundaries import Boundary
from ..walk.stopping import FadingTime, StoppingRule
from .weights import IndependentWeights, Weights

logger = get_logger(__name__)

DEFAULT_TOLERANCE = 1e-4
BLOCK_SIZE = 1024
MAX_TERMS = 1 << 20


@dataclass
class HSeriesSpec:
    """
    Ingredients of an H-series.

    Attributes:
        weights: w_n, analytic or estimated
        boundary: Boundary g
        law: Increment law F
        tolerance: Relative truncation tolerance
    """

    weights: Weights
    boundary: Boundary
    law: IncrementLaw
    tolerance: float = DEFAULT_TOLERANCE


@dataclass(frozen=True)
class HSeriesResult:
    """
    Value of an H-series with its error budget.

    Attributes:
        value: Partial sum plus any integral tail correction
        error_bound: Rigorous bound on the truncation error
        n_terms: Number of explicit terms
        stat_error: Propagated standard error of estimated weights
        method: "finite", "truncated" or "integral_tail"
    """

    value: float
    error_bound: float
    n_terms: int
    stat_error: float = 0.0
    method: str = "truncated"


def _remainder(spec: HSeriesSpec, x: float, n_terms: int, slope: float) -> float:
    """Bound on sum_{n > N} w_n F̄(x + g(n))."""
    bounds = []
    if slope > 0:
        excess = float(spec.law.excess_mean(x + spec.boundary(n_terms)))
        bounds.append(spec.weights.envelope * excess / slope)
    mass = spec.weights.tail_mass(n_terms)
    if math.isfinite(mass):
        level = float(spec.law.tail(x + spec.boundary(n_terms + 1))) if slope >= 0 else 1.0
        bounds.append(mass * level)
    return min(bounds, default=math.inf)


def h_series(spec: HSeriesSpec, x: float) -> HSeriesResult:
    """
    Evaluate H_mu^g(x; P) = sum_n E[Z_n 1(mu >= n)] F̄(x + g(n)).

    Bounded mu gives a finite sum. Otherwise terms are added in growing blocks
    until the remainder bound drops below ``tolerance`` times the partial sum;
    if that does not happen within 2^20 terms the weights' integral form closes
    the series with a sandwich bound.

    Raises:
        NonSummable: If c <= 0 and the weights have infinite mass
    """
    weights, boundary, law = spec.weights, spec.boundary, spec.law
    slope = boundary.class_slope()

    if weights.bound is not None:
        n = np.arange(1, weights.bound + 1)
        levels = np.asarray(law.tail(x + boundary(n)), dtype=float) if n.size else np.empty(0)
        value = float(np.sum(weights.values(1, weights.bound + 1) * levels))
        stat = float(np.sum(weights.errors(1, weights.bound + 1) * levels))
        return HSeriesResult(value, 0.0, int(weights.bound), stat, "finite")

    if slope <= 0 and not math.isfinite(weights.tail_mass(0)):
        raise NonSummable(f"weights are not summable and the boundary slope is {slope}")

    value = stat = 0.0
    n_terms, block = 0, BLOCK_SIZE
    remainder = math.inf
    while n_terms < MAX_TERMS:
        n = np.arange(n_terms + 1, n_terms + block + 1)
        levels = np.asarray(law.tail(x + boundary(n)), dtype=float)
        value += float(np.sum(weights.values(n_terms + 1, n_terms + block + 1) * levels))
        stat += float(np.sum(weights.errors(n_terms + 1, n_terms + block + 1) * levels))
        n_terms += block
        remainder = _remainder(spec, x, n_terms, slope)
        if remainder <= spec.tolerance * value:
            return HSeriesResult(value, remainder, n_terms, stat, "truncated")
        block = min(2 * block, MAX_TERMS - n_terms) or block

    sandwich = weights.tail_integral(n_terms, lambda t: law.tail(x + boundary(np.asarray(t))))
    if sandwich is not None:
        lower, upper = sandwich
        return HSeriesResult(
            value + 0.5 * (lower + upper), 0.5 * (upper - lower), n_terms, stat, "integral_tail"
        )
    if math.isinf(remainder):
        raise NonSummable(f"no remainder bound after {n_terms} terms")
    logger.warning(f"H-series at x={x:g}: remainder {remainder:.3g} above tolerance")
    return HSeriesResult(value, remainder, n_terms, stat, "truncated")


def veraverbeke_limit(big_l: float, c: float, law: IncrementLaw, x: float) -> float:
    """
    (L / c) F̄_I(x), the tail of sup_n R_n^c for a fading environment.

    Example:
        >>> veraverbeke_limit(2.0, 1.0, ParetoLaw(2.0), 10.0)
    """
    if c <= 0:
        raise ParameterOutOfRange(f"Drift c must be positive, got {c}")
    if not 0 < big_l < math.inf:
        raise ParameterOutOfRange(f"L must be positive and finite, got {big_l}")
    return big_l / c * float(law.integrated_tail(x))


def theorem2_limit(expected_eta: float, law: IncrementLaw, x: float) -> float:
    """E eta_mu * F̄(x)."""
    if expected_eta < 0:
        raise ParameterOutOfRange(f"E eta must be non-negative, got {expected_eta}")
    return expected_eta * float(law.tail(x))


def beta_function(a: float, b: float) -> float:
    """B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)."""
    if a <= 0 or b <= 0:
        raise ParameterOutOfRange(f"Beta function needs a, b > 0; got {a}, {b}")
    return float(special.beta(a, b))


def example2_constant(
    alpha: float, beta: float, c: float, k1: float = 1.0, k2: float = 1.0
) -> tuple[float, float]:
    """
    Constant and exponent of sum_n K2 n^-alpha * K1 (x + c n)^-beta ~ C x^(1-alpha-beta).

    The constant is that of a single path, K1 K2 c^(alpha-1) B(1-alpha, beta+alpha-1);
    the tail of the branching walk is E Z times it.

    Returns:
        (C, 1 - alpha - beta)
    """
    if not 0 < alpha < 1:
        raise ParameterOutOfRange(f"alpha must lie in (0, 1), got {alpha}")
    if beta <= 1:
        raise ParameterOutOfRange(f"beta must exceed 1, got {beta}")
    if c <= 0 or k1 <= 0 or k2 <= 0:
        raise ParameterOutOfRange(f"c, K1, K2 must be positive; got {c}, {k1}, {k2}")
    constant = k1 * k2 * c ** (alpha - 1.0) * beta_function(1.0 - alpha, beta + alpha - 1.0)
    return constant, 1.0 - alpha - beta


def example2_integral(alpha: float, beta: float, c: float, x: float) -> float:
    """Integral of t^-alpha (x + c t)^-beta over (0, inf), by quadrature."""
    if x <= 0:
        raise ParameterOutOfRange(f"x must be positive, got {x}")
    example2_constant(alpha, beta, c)

    def smooth(t: float) -> float:
        return (x + c * t) ** (-beta)

    head, _ = integrate.quad(smooth, 0.0, 1.0, weight="alg", wvar=(-alpha, 0.0))
    tail, _ = integrate.quad(
        lambda t: t ** (-alpha) * smooth(t), 1.0, math.inf, epsabs=0.0, epsrel=1e-10, limit=200
    )
    return head + tail


@dataclass(frozen=True)
class EtaEstimate:
    """E eta_mu with its standard error (zero when analytic)."""

    value: float
    se: float
    method: str
    n_runs: int = 0


def expected_eta(
    env: Environment,
    stop: StoppingRule,
    n_runs: int = 20000,
    rng: Optional[np.random.Generator] = None,
) -> EtaEstimate:
    """
    E eta_mu = E sum_{n <= mu} Z_n.

    Analytic (sum_n E Z_n P(mu >= n)) when mu ignores the tree; simulated from
    trajectories for mu = nu.

    Raises:
        ParameterOutOfRange: For rules that look at the increments
    """
    if stop.tree_independent:
        return EtaEstimate(IndependentWeights(env, stop).total(), 0.0, "analytic")
    if not isinstance(stop, FadingTime):
        raise ParameterOutOfRange(f"E eta for {stop.kind} needs walk simulation (estimate_weights)")
    rng = rng if rng is not None else np.random.default_rng()
    sampler = TrajectorySampler(env)
    etas = np.empty(n_runs)
    for i in range(n_runs):
        traj = sampler.sample(rng)
        etas[i] = traj.eta(int(stop.apply_cap(traj.nu)))
    se = float(np.std(etas, ddof=1) / math.sqrt(n_runs)) if n_runs > 1 else 0.0
    logger.info(f"E eta over {n_runs} trajectories: {etas.mean():.5g} (se {se:.2g})")
    return EtaEstimate(float(etas.mean()), se, "simulated", n_runs)

"""Exact crossing probabilities by enumerating every tree and increment outcome.

Only small instances are feasible: a lattice increment law, a few generations
and small offspring counts. The state after generation n is the multiset of
node values together with the fronts r_1^g, ..., r_n^g and the last generation
that branched; outcomes sharing a state are merged, and all probabilities are
kept as ``Fraction``.
"""

from collections import defaultdict
from fractions import Fraction
from typing import Optional

import numpy as np

from ..branching.environment import DegenerateTail, Environment
from ..distributions.increments import IncrementLaw, LatticeLaw
from ..exceptions import NotRealizedWithinCap, ParameterOutOfRange
from ..utils.logging_utils import get_logger
from .boundaries import Boundary
from .stopping import FadingTime, FirstPassageBelow, IndependentLaw, StoppingRule, realize_stop

logger = get_logger(__name__)

MAX_HORIZON = 4
MAX_STATES = 200_000

# (sorted node values, fronts r_1..r_n, last branching generation or -1)
State = tuple[tuple[Fraction, ...], tuple[Fraction, ...], int]


def _require_lattice(law: IncrementLaw) -> LatticeLaw:
    if not isinstance(law, LatticeLaw):
        raise ParameterOutOfRange(f"Enumeration needs a lattice law, got {law!r}")
    return law


def _children(
    values: tuple[Fraction, ...],
    offspring: dict[int, Fraction],
    atoms: list[tuple[Fraction, Fraction]],
    step: Fraction,
) -> dict[tuple[tuple[Fraction, ...], bool], Fraction]:
    """Distribution of (next generation multiset, any parent branched)."""
    dist: dict[tuple[tuple[Fraction, ...], bool], Fraction] = {((), False): Fraction(1)}
    for v in values:
        nxt: dict[tuple[tuple[Fraction, ...], bool], Fraction] = defaultdict(Fraction)
        for (partial, branched), p in dist.items():
            for k, pk in offspring.items():
                if pk == 0:
                    continue
                litter: dict[tuple[Fraction, ...], Fraction] = {(): pk}
                for _ in range(k):
                    grown: dict[tuple[Fraction, ...], Fraction] = defaultdict(Fraction)
                    for kids, pl in litter.items():
                        for a, pa in atoms:
                            grown[tuple(sorted((*kids, v + a - step)))] += pl * pa
                    litter = grown
                for kids, pl in litter.items():
                    merged = tuple(sorted(partial + kids))
                    nxt[(merged, branched or k != 1)] += p * pl
        dist = nxt
    return dist


def enumerate_generations(
    env: Environment, law: IncrementLaw, boundary: Boundary, horizon: int
) -> dict[State, Fraction]:
    """
    Exact joint law of the walk after ``horizon`` generations.

    Returns:
        Mapping from state to probability; probabilities sum to 1
    """
    lattice = _require_lattice(law)
    if not 0 <= horizon <= MAX_HORIZON:
        raise ParameterOutOfRange(f"Enumeration horizon must lie in [0, {MAX_HORIZON}]")
    states: dict[State, Fraction] = {((Fraction(0),), (), -1): Fraction(1)}
    for n in range(horizon):
        offspring = env.law(n).exact
        step = Fraction(boundary(n + 1)) - Fraction(boundary(n))
        nxt: dict[State, Fraction] = defaultdict(Fraction)
        for (values, fronts, last), p in states.items():
            for (kids, branched), pk in _children(values, offspring, lattice.atoms, step).items():
                nxt[(kids, fronts + (kids[-1],), n if branched else last)] += p * pk
        states = nxt
        if len(states) > MAX_STATES:
            raise ParameterOutOfRange(f"Enumeration exceeded {MAX_STATES} states at generation {n}")
        logger.debug(f"generation {n + 1}: {len(states)} states")
    return states


def _mu_pmf(stop: IndependentLaw) -> dict[int, Fraction]:
    bound = stop.bound
    if bound is None:
        raise ParameterOutOfRange("Enumeration needs an independent mu with bounded support")
    survival = [Fraction(float(s)) for s in stop.survival(np.arange(bound + 2))]
    survival[0] = Fraction(1)
    return {n: survival[n] - survival[n + 1] for n in range(bound + 1)}


def _horizon(env: Environment, stop: StoppingRule) -> int:
    if isinstance(stop, FadingTime):
        if not isinstance(env.tail, DegenerateTail):
            raise ParameterOutOfRange("Enumeration of mu = nu needs an environment without a tail")
        nu_max = max(1, env.prefix_length)
        return nu_max if stop.cap is None else min(nu_max, stop.cap)
    if isinstance(stop, IndependentLaw):
        return max(_mu_pmf(stop))
    if stop.bound is None:
        raise ParameterOutOfRange(f"Enumeration needs a bounded stopping time, got {stop!r}")
    return stop.bound


def _crossed(fronts: tuple[Fraction, ...], mu: int, x: Fraction) -> bool:
    return max((Fraction(0), *fronts[:mu])) > x


def enumerate_crossing_probability(
    env: Environment, law: IncrementLaw, boundary: Boundary, stop: StoppingRule, x: float
) -> Fraction:
    """
    Exact P(R_mu^g > x).

    Args:
        env: Environment whose laws up to the horizon have exact masses
        law: Lattice increment law
        boundary: Boundary g (values are taken as exact binary fractions)
        stop: Fixed, capped IndependentLaw, FadingTime or capped FirstPassageBelow
        x: Level

    Returns:
        Probability as a Fraction

    Example:
        >>> env = Environment([OffspringLaw({2: 1})])
        >>> law = LatticeLaw({-1: Fraction(2, 3), 2: Fraction(1, 3)})
        >>> enumerate_crossing_probability(env, law, Boundary.linear(0), Fixed(2), 0)
        Fraction(65, 81)
    """
    level = Fraction(x)
    horizon = _horizon(env, stop)
    states = enumerate_generations(env, law, boundary, horizon)

    if isinstance(stop, IndependentLaw):
        pmf = _mu_pmf(stop)
        mixed = Fraction(0)
        for (_, fronts, _), p in states.items():
            for mu, pm in pmf.items():
                if pm and _crossed(fronts, mu, level):
                    mixed += p * pm
        return mixed

    total = Fraction(0)
    for (_, fronts, last), p in states.items():
        if isinstance(stop, FadingTime):
            mu = stop.apply_cap(max(1, last + 1))
        elif isinstance(stop, FirstPassageBelow):
            try:
                mu = int(realize_stop(stop, fronts=[float(r) for r in fronts], boundary=boundary))
            except NotRealizedWithinCap:
                mu = horizon
        else:
            mu = int(stop.draw(None, None))
        if _crossed(fronts, mu, level):
            total += p
    return total


def enumerate_crossing_time_distribution(
    env: Environment, law: IncrementLaw, boundary: Boundary, horizon: int, x: float
) -> dict[Optional[int], Fraction]:
    """
    Exact law of tau^g(x) = inf{n >= 1 : r_n^g > x} within ``horizon``.

    Returns:
        Mapping n -> P(tau = n) for n = 1..horizon, and None -> P(tau > horizon);
        {0: 1} when x < 0, since the root at 0 already lies above x
    """
    if x < 0:
        return {0: Fraction(1)}
    level = Fraction(x)
    dist: dict[Optional[int], Fraction] = {n: Fraction(0) for n in range(1, horizon + 1)}
    dist[None] = Fraction(0)
    for (_, fronts, _), p in enumerate_generations(env, law, boundary, horizon).items():
        tau = next((n for n, r in enumerate(fronts, start=1) if r > level), None)
        dist[tau] += p
    return dist

"""Sampling the population process Z_n up to its fading time.

Generations inside the environment's explicit prefix are simulated directly.
After the prefix the sampler skips ahead: with population z after generation n
and no event scheduled, P(no branching in [n, m)) = exp(-z (d_n - d_m)), so one
uniform draw locates the next generation with a non-unit offspring.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..exceptions import NonFadingEnvironment
from ..utils.logging_utils import get_logger
from .environment import Environment

logger = get_logger(__name__)


@dataclass(frozen=True)
class BranchEvent:
    """
    Non-unit offspring at one generation.

    Attributes:
        generation: Generation n of the parents
        parents: Indices (within generation n) of parents with offspring != 1, increasing
        counts: Offspring counts of those parents (all >= 2)
    """

    generation: int
    parents: np.ndarray
    counts: np.ndarray

    @property
    def growth(self) -> int:
        return int(np.sum(self.counts - 1))

    def offspring_counts(self, population: int) -> np.ndarray:
        """Offspring count of every parent in generation n."""
        counts = np.ones(population, dtype=np.int64)
        counts[self.parents] = self.counts
        return counts


@dataclass
class BranchingTrajectory:
    """
    Realised population process up to the fading time.

    Attributes:
        events: Branch events ordered by generation
        nu: Fading time, the first n >= 1 after which Z never changes
        final_population: Z = Z_nu
    """

    events: list[BranchEvent] = field(default_factory=list)
    nu: int = 1
    final_population: int = 1

    def population_at(self, n: int) -> int:
        """Z_n."""
        z = 1
        for event in self.events:
            if event.generation >= n:
                break
            z += event.growth
        return z

    @property
    def sizes(self) -> list[int]:
        """Z_0, ..., Z_nu."""
        sizes = [1]
        by_generation = {e.generation: e.growth for e in self.events}
        for n in range(self.nu):
            sizes.append(sizes[-1] + by_generation.get(n, 0))
        return sizes

    def eta(self, upto: Optional[int] = None) -> int:
        """Z_1 + ... + Z_m with m = upto (default nu); Z_n = Z for n > nu."""
        m = self.nu if upto is None else upto
        sizes = self.sizes
        head = sum(sizes[1 : min(m, self.nu) + 1])
        return head + max(0, m - self.nu) * self.final_population

    def event_at(self, n: int) -> Optional[BranchEvent]:
        for event in self.events:
            if event.generation == n:
                return event
        return None


def _first_non_unit(rng: np.random.Generator, z: int, q: float) -> int:
    """Index (0-based) of the first parent with offspring != 1, given at least one."""
    log_stay = math.log1p(-q)
    u = rng.random()
    j = math.ceil(math.log1p(u * math.expm1(z * log_stay)) / log_stay)
    return min(max(j, 1), z) - 1


class TrajectorySampler:
    """
    Exact sampler of (Z_0, ..., Z_nu, nu, Z) for a fading environment.

    Args:
        env: Fading environment
        max_generation: Generations beyond this are treated as a sampling
            failure; the table-free search falls back to ``env.dn`` up to here.

    Example:
        >>> sampler = TrajectorySampler(env)
        >>> traj = sampler.sample(np.random.default_rng(1))
        >>> traj.nu, traj.final_population
    """

    MAX_GENERATION = 10**12

    def __init__(self, env: Environment, max_generation: int = MAX_GENERATION):
        if not env.is_fading():
            raise NonFadingEnvironment(f"{env!r} does not fade; nu may be infinite")
        self.env = env
        self.max_generation = max_generation
        self.logger = get_logger(self.__class__.__name__)

    def _next_event(self, n: int, z: int, u: float) -> Optional[int]:
        """Smallest m >= n with d_{m+1} < d_n + ln(u)/z, or None if no event remains."""
        table = self.env.d_values(max(2 * (n + 2), 64))
        d_n = table[n] if n < len(table) else self.env.dn(n)
        target = d_n + math.log(u) / z
        if target <= 0:
            return None
        # d is non-increasing; look in the cached table first
        if len(table) > n + 1 and table[-1] < target:
            tail = table[n + 1 :]
            m_plus_one = n + 1 + int(np.argmax(tail < target))
            return m_plus_one - 1
        lo = max(n, len(table) - 1)
        hi = max(lo + 1, 2 * lo)
        while self.env.dn(hi) >= target:
            lo, hi = hi, 2 * hi
            if hi > self.max_generation:
                raise NonFadingEnvironment(f"no fading before generation {self.max_generation}")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.env.dn(mid) < target:
                hi = mid
            else:
                lo = mid
        return hi - 1

    def _branch_at(self, rng: np.random.Generator, n: int, z: int) -> BranchEvent:
        """Offspring at generation n conditioned on at least one non-unit count."""
        q = self.env.q(n)
        first = _first_non_unit(rng, z, q)
        rest = z - first - 1
        n_extra = int(rng.binomial(rest, q)) if rest > 0 else 0
        extra = (
            np.sort(rng.choice(rest, size=n_extra, replace=False)) + first + 1
            if n_extra
            else np.empty(0, dtype=np.int64)
        )
        parents = np.concatenate(([first], extra)).astype(np.int64)
        counts = self.env.tail.sample_split(rng, len(parents))
        return BranchEvent(n, parents, counts)

    def sample(self, rng: np.random.Generator) -> BranchingTrajectory:
        """Draw one trajectory."""
        events: list[BranchEvent] = []
        z = 1
        for n in range(self.env.prefix_length):
            counts = self.env.law(n).sample(rng, z)
            parents = np.flatnonzero(counts != 1)
            if parents.size:
                event = BranchEvent(n, parents, counts[parents].astype(np.int64))
                events.append(event)
                z += event.growth
        n = self.env.prefix_length
        while True:
            m = self._next_event(n, z, 1.0 - rng.random())
            if m is None:
                break
            event = self._branch_at(rng, m, z)
            events.append(event)
            z += event.growth
            n = m + 1
        nu = max(1, events[-1].generation + 1) if events else 1
        return BranchingTrajectory(events=events, nu=nu, final_population=z)


def simulate_trajectory(env: Environment, rng: np.random.Generator) -> BranchingTrajectory:
    """
    Draw (Z_0, ..., Z_nu, nu, Z) exactly.

    Raises:
        NonFadingEnvironment: If L is infinite
    """
    return TrajectorySampler(env).sample(rng)


def simulate_generations(env: Environment, rng: np.random.Generator, horizon: int) -> list[int]:
    """Naive generation-by-generation simulation of Z_0, ..., Z_horizon."""
    sizes = [1]
    for n in range(horizon):
        sizes.append(int(np.sum(env.law(n).sample(rng, sizes[-1]))))
    return sizes


@dataclass
class MomentEstimate:
    """Sample means of nu, Z and nu * Z with standard errors."""

    n_runs: int
    mean_nu: float
    mean_z: float
    mean_nu_z: float
    se_nu: float
    se_z: float
    se_nu_z: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    if len(values) < 2:
        return float(np.mean(values)), 0.0
    return float(np.mean(values)), float(np.std(values, ddof=1) / math.sqrt(len(values)))


def empirical_moments(env: Environment, n_runs: int, rng: np.random.Generator) -> MomentEstimate:
    """
    Estimate E nu, E Z and E nu Z from ``n_runs`` trajectories.

    Raises:
        NonFadingEnvironment: If L is infinite
    """
    sampler = TrajectorySampler(env)
    nus = np.empty(n_runs)
    zs = np.empty(n_runs)
    for i in range(n_runs):
        traj = sampler.sample(rng)
        nus[i] = traj.nu
        zs[i] = traj.final_population
    mean_nu, se_nu = _mean_se(nus)
    mean_z, se_z = _mean_se(zs)
    mean_nu_z, se_nu_z = _mean_se(nus * zs)
    logger.info(f"moments over {n_runs} runs: E nu={mean_nu:.4g}, E Z={mean_z:.4g}")
    return MomentEstimate(n_runs, mean_nu, mean_z, mean_nu_z, se_nu, se_z, se_nu_z)

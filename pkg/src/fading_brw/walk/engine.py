"""Branching random walk engine.

Node values are stored in boundary-shifted form: a child at generation n has
value ``parent + xi - (g(n) - g(n-1))`` and the root has value 0, so the value of
a node is S^g of the path leading to it.

While the population can still branch the walk advances one generation at a
time. Once the fading time nu has passed and the tree is not requested, the Z
surviving lineages are plain random walks and are advanced in vectorised
chunks.

Three independent random streams drive a replication: the tree, the
increments and the stopping time. Keeping them apart makes mu drawn by an
IndependentLaw a function of its own stream only.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import pandas as pd

from ..branching.environment import Environment
from ..branching.trajectory import BranchEvent, BranchingTrajectory, TrajectorySampler
from ..distributions.increments import IncrementLaw
from ..exceptions import NonFadingEnvironment, ParameterOutOfRange
from ..utils.logging_utils import get_logger
from .boundaries import Boundary
from .stopping import InfiniteHorizon, StoppingRule

DEFAULT_HORIZON_CAP = 10_000

HORIZON_CAP = "horizon_cap"
POPULATION_CAP = "population_cap"
EARLY_EXIT = "early_exit"
SETTLED = "infinite_horizon_settled"


@dataclass
class WalkStreams:
    """The tree, increment and stop streams of one replication."""

    tree: np.random.Generator
    increments: np.random.Generator
    stop: np.random.Generator

    @classmethod
    def from_seed(cls, seed: Union[int, np.random.SeedSequence]) -> "WalkStreams":
        seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        tree, increments, stop = (np.random.default_rng(s) for s in seq.spawn(3))
        return cls(tree, increments, stop)

    @classmethod
    def from_generator(cls, rng: np.random.Generator) -> "WalkStreams":
        tree, increments, stop = rng.spawn(3)
        return cls(tree, increments, stop)


@dataclass(frozen=True)
class GenerationFront:
    """
    Summary of generation n.

    Attributes:
        n: Generation index
        population: Z_n
        rightmost: r_n^g, the largest shifted value in generation n
        leftmost: l_n^g
        running_max: R_n^g = max(0, r_1^g, ..., r_n^g)
        eta: Z_1 + ... + Z_n
    """

    n: int
    population: int
    rightmost: float
    leftmost: float
    running_max: float
    eta: int


@dataclass
class GenerationNodes:
    """Nodes of one generation: parent index in the previous generation, edge increment, value."""

    parents: np.ndarray
    increments: np.ndarray
    values: np.ndarray


@dataclass
class WalkRealization:
    """
    One replication of the walk, up to the stopping time or a truncation.

    ``mu`` is the realised stopping time: an int for rules decided before the
    walk or fired online, ``math.inf`` for the infinite horizon, and None if an
    online rule had not fired when the run ended. ``truncation`` names why the
    run ended early, if it did.
    """

    mu: Optional[float]
    rightmost: np.ndarray
    leftmost: np.ndarray
    populations: np.ndarray
    trajectory: Optional[BranchingTrajectory] = None
    nodes: Optional[list[GenerationNodes]] = None
    truncation: Optional[str] = None
    residual: float = 0.0
    boundary: Optional[Boundary] = field(default=None, repr=False)

    @property
    def simulated_generations(self) -> int:
        return len(self.rightmost)

    def observed_generations(self) -> int:
        if self.mu is None or math.isinf(self.mu):
            return self.simulated_generations
        return min(int(self.mu), self.simulated_generations)

    def running_max(self) -> np.ndarray:
        """R_1^g, ..., R_n^g over the simulated generations."""
        return np.maximum.accumulate(np.maximum(self.rightmost, 0.0))

    def rightmost_over_stop(self) -> float:
        """R_mu^g = max(0, max of node values up to generation mu)."""
        return max(0.0, self.node_max())

    def node_max(self) -> float:
        """Largest node value up to generation mu (-inf if mu = 0)."""
        observed = self.observed_generations()
        return float(np.max(self.rightmost[:observed])) if observed else -math.inf

    def crossed(self, x: float) -> bool:
        return self.rightmost_over_stop() > x

    def crossing_time(self, x: float) -> Optional[int]:
        """
        tau^g(x) = inf{n >= 1 : r_n^g > x} within the simulated generations.

        The root sits at 0, so x < 0 gives tau = 0 and {R_mu^g > x} = {mu >= tau}
        holds for every mu, including mu = 0.
        """
        if x < 0:
            return 0
        if math.isinf(x) and x > 0:
            return None
        hits = np.flatnonzero(self.rightmost > x)
        return int(hits[0]) + 1 if hits.size else None

    def eta(self) -> int:
        """eta_mu = Z_1 + ... + Z_mu."""
        return int(np.sum(self.populations[: self.observed_generations()]))

    def fronts(self) -> list[GenerationFront]:
        running = self.running_max()
        etas = np.cumsum(self.populations)
        return [
            GenerationFront(
                n + 1,
                int(self.populations[n]),
                float(self.rightmost[n]),
                float(self.leftmost[n]),
                float(running[n]),
                int(etas[n]),
            )
            for n in range(self.simulated_generations)
        ]

    def node_table(self) -> pd.DataFrame:
        """Columns generation, node_id, parent_id, value (root is node 0)."""
        if self.nodes is None:
            raise ParameterOutOfRange("Realization was run without keep_tree=True")
        root = {"generation": [0], "node_id": [0], "parent_id": [-1], "value": [0.0]}
        frames = [pd.DataFrame(root)]
        parent_offset, offset = 0, 1
        for n, gen in enumerate(self.nodes, start=1):
            size = len(gen.values)
            frames.append(
                pd.DataFrame(
                    {
                        "generation": n,
                        "node_id": np.arange(offset, offset + size),
                        "parent_id": gen.parents + parent_offset,
                        "value": gen.values,
                    }
                )
            )
            parent_offset, offset = offset, offset + size
        return pd.concat(frames, ignore_index=True)


class WalkEngine:
    """
    Simulates replications of the walk for one configuration.

    Args:
        env: Branching environment
        law: Increment law
        boundary: Boundary g
        stop: Stopping rule
        horizon_cap: Last generation that will be simulated
        population_cap: Abort a replication once Z_n exceeds this
    """

    INITIAL_CHUNK = 64
    MAX_CHUNK = 4096

    def __init__(
        self,
        env: Environment,
        law: IncrementLaw,
        boundary: Boundary,
        stop: StoppingRule,
        horizon_cap: int = DEFAULT_HORIZON_CAP,
        population_cap: Optional[int] = None,
    ):
        if horizon_cap < 0:
            raise ParameterOutOfRange(f"horizon_cap must be non-negative, got {horizon_cap}")
        self.env = env
        self.law = law
        self.boundary = boundary
        self.stop = stop
        self.horizon_cap = int(horizon_cap)
        self.population_cap = population_cap
        self.logger = get_logger(self.__class__.__name__)

        self.fading = env.is_fading()
        if not self.fading and (stop.kind == "fading_time" or isinstance(stop, InfiniteHorizon)):
            raise NonFadingEnvironment(f"{stop.kind} needs a fading environment")
        self.sampler = TrajectorySampler(env) if self.fading else None
        self.residual_slope = boundary.class_slope()
        self.big_l = env.fading_product() if self.fading else math.inf

    # ------------------------------------------------------------------ helpers

    def _residual(self, values: np.ndarray, target: float) -> float:
        """sum_j F̄_I(x - s_j) / c over the live lineages."""
        if self.residual_slope <= 0:
            return math.inf
        return float(np.sum(self.law.excess_mean(target - values))) / self.residual_slope

    def _settle_threshold(self, target: float) -> float:
        stop = self.stop
        assert isinstance(stop, InfiniteHorizon)
        level = self.big_l / self.residual_slope * float(self.law.integrated_tail(target))
        return stop.eps_resid * level

    def _parents(
        self, n: int, z: int, events: dict[int, BranchEvent], tree_rng: np.random.Generator
    ) -> Optional[np.ndarray]:
        """Parent index of every node in generation n + 1; None when nobody branches."""
        if self.fading:
            event = events.get(n)
            if event is None:
                return None
            return np.repeat(np.arange(z), event.offspring_counts(z))
        counts = self.env.law(n).sample(tree_rng, z)
        if np.all(counts == 1):
            return None
        return np.repeat(np.arange(z), counts)

    # ------------------------------------------------------------------ main loop

    def run(
        self,
        streams: WalkStreams,
        target: Optional[float] = None,
        keep_tree: bool = False,
    ) -> WalkRealization:
        """
        Simulate one replication.

        Args:
            streams: Tree, increment and stop streams
            target: Level x. The run ends as soon as R_n^g > x, which leaves
                {R_mu^g > x} unchanged; the infinite horizon also uses it for the
                residual bound.
            keep_tree: Retain every node (needed for the big-jump estimator and
                for node-table dumps)

        Returns:
            WalkRealization
        """
        stop = self.stop
        infinite = isinstance(stop, InfiniteHorizon)
        if infinite and (target is None or self.residual_slope <= 0):
            raise ParameterOutOfRange("Infinite horizon needs a target level and a slope c > 0")

        trajectory = self.sampler.sample(streams.tree) if self.sampler is not None else None
        events = {e.generation: e for e in trajectory.events} if trajectory else {}
        nu = trajectory.nu if trajectory is not None else None

        if infinite:
            mu = math.inf
        elif stop.decided_before_walk:
            mu = stop.draw(streams.stop, trajectory)
        else:
            mu = None
        limit = self.horizon_cap
        if mu is not None and not math.isinf(mu):
            limit = min(int(mu), limit)
        elif mu is None and stop.cap is not None:
            limit = min(stop.cap, limit)

        state = _RunState(values=np.zeros(1), mu=mu, nu=nu, limit=limit, target=target)
        state.nodes = [] if keep_tree else None
        state.done = limit == 0

        while not state.done and (nu is None or state.n < nu or keep_tree):
            parents = self._parents(state.n, len(state.values), events, streams.tree)
            z = len(state.values) if parents is None else len(parents)
            if self.population_cap is not None and z > self.population_cap:
                state.truncation = POPULATION_CAP
                break
            state.n += 1
            n = state.n
            xi = np.asarray(self.law.sample(streams.increments, z), dtype=float)
            step = self.boundary(n) - self.boundary(n - 1)
            base = state.values if parents is None else state.values[parents]
            state.values = base + xi - step
            r_n = float(state.values.max())
            state.record(r_n, float(state.values.min()), z)
            if state.nodes is not None:
                idx = np.arange(z) if parents is None else parents
                state.nodes.append(GenerationNodes(idx, xi, state.values.copy()))

            if not stop.decided_before_walk and stop.fires(n, r_n, self.boundary):
                state.mu = n
                state.done = True
            if target is not None and not keep_tree and state.running > target:
                state.truncation = EARLY_EXIT
                state.done = True
            self._after_step(state)

        if not state.done and state.truncation is None:
            self._run_lineages(state, streams)

        if state.truncation == HORIZON_CAP and target is not None and self.residual_slope > 0:
            state.residual = self._residual(state.values, target)
        if state.truncation in (HORIZON_CAP, POPULATION_CAP):
            self.logger.debug(f"replication truncated ({state.truncation}) at generation {state.n}")

        return WalkRealization(
            mu=state.mu,
            rightmost=np.asarray(state.rightmost, dtype=float),
            leftmost=np.asarray(state.leftmost, dtype=float),
            populations=np.asarray(state.populations, dtype=np.int64),
            trajectory=trajectory,
            nodes=state.nodes,
            truncation=state.truncation,
            residual=state.residual,
            boundary=self.boundary,
        )

    def _after_step(self, state: "_RunState") -> None:
        """Limit and settling checks once generation ``state.n`` is recorded."""
        if state.done:
            return
        if state.n >= state.limit:
            state.done = True
            cap = self.stop.cap
            if state.mu is None and cap is not None and state.n >= cap:
                state.mu = cap
            elif state.mu is None or state.n < state.mu:
                state.truncation = HORIZON_CAP
            return
        if isinstance(self.stop, InfiniteHorizon) and state.n >= state.nu:
            state.residual = self._residual(state.values, state.target)
            if state.residual <= self._settle_threshold(state.target):
                state.truncation = SETTLED
                state.done = True

    def _run_lineages(self, state: "_RunState", streams: WalkStreams) -> None:
        """Advance the frozen population as independent walks, chunk by chunk."""
        stop = self.stop
        z = len(state.values)
        chunk = self.INITIAL_CHUNK

        while not state.done:
            k = min(chunk, state.limit - state.n)
            gens = np.arange(state.n + 1, state.n + k + 1)
            steps = self.boundary(gens) - self.boundary(gens - 1)
            xi = np.asarray(self.law.sample(streams.increments, k * z), dtype=float).reshape(k, z)
            paths = state.values + np.cumsum(xi - steps[:, None], axis=0)
            r_chunk = paths.max(axis=1)
            l_chunk = paths.min(axis=1)

            fired = np.flatnonzero(stop.fires_many(gens, r_chunk, self.boundary))
            crossed = np.empty(0, dtype=np.int64)
            if state.target is not None:
                crossed = np.flatnonzero(np.maximum.accumulate(r_chunk) > state.target)
            first_fire = int(fired[0]) + 1 if fired.size else k + 1
            first_cross = int(crossed[0]) + 1 if crossed.size else k + 1
            cut = min(k, first_fire, first_cross)

            state.record_many(r_chunk[:cut], l_chunk[:cut], z)
            state.values = paths[cut - 1]
            state.n += cut
            if first_fire == cut:
                state.mu = state.n
                state.done = True
            if first_cross == cut:
                state.truncation = EARLY_EXIT
                state.done = True
            self._after_step(state)
            chunk = min(2 * chunk, self.MAX_CHUNK)


@dataclass
class _RunState:
    values: np.ndarray
    mu: Optional[float]
    nu: Optional[int]
    limit: int
    target: Optional[float]
    n: int = 0
    running: float = 0.0
    done: bool = False
    truncation: Optional[str] = None
    residual: float = 0.0
    nodes: Optional[list[GenerationNodes]] = None
    rightmost: list[float] = field(default_factory=list)
    leftmost: list[float] = field(default_factory=list)
    populations: list[int] = field(default_factory=list)

    def record(self, r_n: float, l_n: float, z: int) -> None:
        self.rightmost.append(r_n)
        self.leftmost.append(l_n)
        self.populations.append(z)
        self.running = max(self.running, r_n)

    def record_many(self, r_block: np.ndarray, l_block: np.ndarray, z: int) -> None:
        self.rightmost.extend(r_block.tolist())
        self.leftmost.extend(l_block.tolist())
        self.populations.extend([z] * len(r_block))
        self.running = max(self.running, float(r_block.max()))


def run_walk(
    env: Environment,
    law: IncrementLaw,
    boundary: Boundary,
    stop: StoppingRule,
    horizon_cap: int = DEFAULT_HORIZON_CAP,
    rng: Union[np.random.Generator, WalkStreams, int, None] = None,
    target: Optional[float] = None,
    keep_tree: bool = True,
    population_cap: Optional[int] = None,
) -> WalkRealization:
    """
    Simulate one realization of the walk.

    Args:
        env: Branching environment
        law: Increment law
        boundary: Boundary g
        stop: Stopping rule
        horizon_cap: Last generation simulated (default 10^4)
        rng: Generator (split into three streams), WalkStreams, or an int seed
        target: Optional level x for early exit
        keep_tree: Retain every node (default True for single runs)
        population_cap: Abort once Z_n exceeds this

    Returns:
        WalkRealization

    Example:
        >>> env = Environment([OffspringLaw({2: 1}), OffspringLaw({2: 1})])
        >>> law = LatticeLaw({-1: Fraction(2, 3), 2: Fraction(1, 3)})
        >>> real = run_walk(env, law, Boundary.linear(0.0), Fixed(2), rng=7)
        >>> real.eta()
        6
    """
    if isinstance(rng, WalkStreams):
        streams = rng
    elif isinstance(rng, np.random.Generator):
        streams = WalkStreams.from_generator(rng)
    else:
        streams = WalkStreams.from_seed(rng if rng is not None else np.random.SeedSequence())
    engine = WalkEngine(env, law, boundary, stop, horizon_cap, population_cap)
    return engine.run(streams, target=target, keep_tree=keep_tree)


def rightmost_over_stop(realization: WalkRealization) -> float:
    return realization.rightmost_over_stop()


def crossing_time(realization: WalkRealization, x: float) -> Optional[int]:
    return realization.crossing_time(x)


def eta(realization: WalkRealization) -> int:
    return realization.eta()

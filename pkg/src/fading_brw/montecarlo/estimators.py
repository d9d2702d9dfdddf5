"""Monte Carlo estimation of crossing probabilities P(R_mu^g > x).

Two estimators share one batch runner:

    crude      indicator of {R_mu^g > x} per replication (early exit at x)
    big-jump   conditional value sum_e F̄(max(M_{-e}, t_e)) from the full tree

Replications are grouped into batches that run sequentially or in a process
pool. Each batch returns sufficient statistics, and batches are merged in batch
index order, so the result depends only on the master seed, the number of runs
and the batch size.
"""

import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Optional

import numpy as np
import pandas as pd
from scipy import stats
from tqdm import tqdm

from ..analysis.asymptotics import (
    HSeriesSpec,
    expected_eta,
    h_series,
    theorem2_limit,
    veraverbeke_limit,
)
from ..analysis.weights import EmpiricalWeights, IndependentWeights
from ..branching.environment import Environment
from ..distributions.increments import IncrementLaw
from ..exceptions import CalibrationFailed, ParameterOutOfRange
from ..settings import load_settings
from ..utils.logging_utils import get_logger, log_elapsed
from ..walk.big_jump import (
    calibration_level,
    check_big_jump_law,
    conditional_crossing_probability,
    supports_exact_conditioning,
)
from ..walk.boundaries import Boundary
from ..walk.engine import DEFAULT_HORIZON_CAP, EARLY_EXIT, SETTLED, WalkEngine
from ..walk.stopping import FadingTime, InfiniteHorizon, StoppingRule
from .seeding import batch_plan, replication_streams, resolve_master_seed

CRUDE = "crude"
BIG_JUMP = "big-jump"
AUTO = "auto"
MODES = (CRUDE, BIG_JUMP, AUTO)

Z_95 = 1.959963984540054
AUTO_MODE_HITS = 100
WILSON_MAX_HITS = 30
CALIBRATION_RUNS = 4000
CALIBRATION_PILOT = 200
CALIBRATION_SE = 3.0
CALIBRATION_KEY = 1_000_000


@dataclass
class BatchStats:
    """Sufficient statistics of a batch of replication values."""

    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0
    hits: int = 0
    capped: int = 0
    residual_sum: float = 0.0

    def merge(self, other: "BatchStats") -> "BatchStats":
        return BatchStats(
            self.count + other.count,
            self.total + other.total,
            self.total_sq + other.total_sq,
            self.hits + other.hits,
            self.capped + other.capped,
            self.residual_sum + other.residual_sum,
        )


@dataclass(frozen=True)
class EstimateResult:
    """
    Point estimate with uncertainty and provenance.

    Attributes:
        estimate: Estimated probability
        se: Standard error
        ci_low, ci_high: 95% interval (Wilson for crude runs with few hits)
        n_runs: Replications used
        mode: "crude" or "big-jump"
        master_seed: Seed the replications were derived from
        hits: Replications that crossed (crude) or had a positive value (big-jump)
        capped_runs: Replications ended by the horizon or population cap
        residual_bound: Mean residual crossing mass of unfinished replications
        ci_method: "normal" or "wilson"
        calibration: Crude vs big-jump comparison, if one was run
    """

    estimate: float
    se: float
    ci_low: float
    ci_high: float
    n_runs: int
    mode: str
    master_seed: int
    hits: int = 0
    capped_runs: int = 0
    residual_bound: float = 0.0
    ci_method: str = "normal"
    calibration: Optional[dict[str, float]] = None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class CrossingTask:
    """Everything a worker process needs to run a batch."""

    env: Environment
    law: IncrementLaw
    boundary: Boundary
    stop: StoppingRule
    x: float
    mode: str
    master_seed: int
    prefix: tuple[int, ...] = ()
    horizon_cap: int = DEFAULT_HORIZON_CAP
    population_cap: Optional[int] = None


def run_crossing_batch(task: CrossingTask, start: int, size: int) -> BatchStats:
    """Run replications start, ..., start + size - 1 of ``task``."""
    engine = WalkEngine(
        task.env, task.law, task.boundary, task.stop, task.horizon_cap, task.population_cap
    )
    out = BatchStats()
    for i in range(start, start + size):
        streams = replication_streams(task.master_seed, i, task.prefix)
        if task.mode == BIG_JUMP:
            real = engine.run(streams, keep_tree=True)
            value = conditional_crossing_probability(real, task.law, task.x)
        else:
            real = engine.run(streams, target=task.x)
            value = float(real.crossed(task.x))
        out.count += 1
        out.total += value
        out.total_sq += value * value
        out.hits += int(value > 0)
        if real.truncation not in (None, EARLY_EXIT, SETTLED):
            out.capped += 1
        out.residual_sum += real.residual
    return out


def wilson_interval(hits: int, n_runs: int) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    ci = stats.binomtest(hits, n_runs).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def summarize(stats_: BatchStats, mode: str, master_seed: int) -> EstimateResult:
    """EstimateResult from merged batch statistics."""
    n = stats_.count
    if n == 0:
        raise ParameterOutOfRange("No replications to summarize")
    mean = stats_.total / n
    var = max(0.0, stats_.total_sq / n - mean * mean) * n / (n - 1) if n > 1 else 0.0
    se = math.sqrt(var / n)
    residual = stats_.residual_sum / n
    if mode == CRUDE and stats_.hits < WILSON_MAX_HITS:
        low, high = wilson_interval(stats_.hits, n)
        method = "wilson"
    else:
        low, high = mean - Z_95 * se, mean + Z_95 * se
        method = "normal"
    return EstimateResult(
        estimate=mean,
        se=se,
        ci_low=low,
        ci_high=high,
        n_runs=n,
        mode=mode,
        master_seed=master_seed,
        hits=stats_.hits,
        capped_runs=stats_.capped,
        residual_bound=residual,
        ci_method=method,
    )


class CrossingEstimator:
    """
    Estimates P(R_mu^g > x) for one configuration.

    Args:
        env: Branching environment
        law: Increment law
        boundary: Boundary g
        stop: Stopping rule
        horizon_cap: Last generation simulated per replication
        population_cap: Optional abort threshold on Z_n
        workers: Process count (default from settings)
        batch_size: Replications per batch (default from settings)
        progress: Show a tqdm bar over batches

    Example:
        >>> est = CrossingEstimator(env, law, Boundary.linear(1.0), Fixed(5))
        >>> res = est.estimate(20.0, n_runs=10_000, master_seed=42)
        >>> res.estimate, res.se
    """

    def __init__(
        self,
        env: Environment,
        law: IncrementLaw,
        boundary: Boundary,
        stop: StoppingRule,
        horizon_cap: int = DEFAULT_HORIZON_CAP,
        population_cap: Optional[int] = None,
        workers: Optional[int] = None,
        batch_size: Optional[int] = None,
        progress: bool = False,
    ):
        settings = load_settings()
        self.env = env
        self.law = law
        self.boundary = boundary
        self.stop = stop
        self.horizon_cap = horizon_cap
        self.population_cap = population_cap
        self.workers = workers or settings.workers
        self.batch_size = batch_size or settings.batch_size
        self.progress = progress
        self.logger = get_logger(self.__class__.__name__)

    # ------------------------------------------------------------------ batches

    def _task(self, x: float, mode: str, master_seed: int, prefix: tuple[int, ...]):
        return CrossingTask(
            self.env,
            self.law,
            self.boundary,
            self.stop,
            float(x),
            mode,
            master_seed,
            prefix,
            self.horizon_cap,
            self.population_cap,
        )

    def _collect(self, task: CrossingTask, n_runs: int) -> BatchStats:
        plan = batch_plan(n_runs, self.batch_size)
        results: dict[int, BatchStats] = {}
        if self.workers <= 1 or len(plan) <= 1:
            batches = tqdm(plan, desc=f"{task.mode} x={task.x:g}", disable=not self.progress)
            for b, start, size in batches:
                results[b] = run_crossing_batch(task, start, size)
        else:
            with ProcessPoolExecutor(max_workers=self.workers) as executor:
                futures = {
                    executor.submit(run_crossing_batch, task, start, size): b
                    for b, start, size in plan
                }
                desc = f"{task.mode} x={task.x:g}"
                pbar = tqdm(total=len(plan), desc=desc, disable=not self.progress)
                for future in as_completed(futures):
                    results[futures[future]] = future.result()
                    pbar.update(1)
                pbar.close()
        merged = BatchStats()
        for b in sorted(results):
            merged = merged.merge(results[b])
            self.logger.debug(f"batch {b}: {results[b].count} runs, {results[b].hits} hits")
        return merged

    # ------------------------------------------------------------------ modes

    def resolve_mode(self, mode: str, n_runs: int, expected: Optional[float] = None) -> str:
        """
        Pick the estimator actually used.

        ``auto`` uses crude runs when at least 100 hits are expected (or when no
        expectation is known) and the big-jump estimator otherwise. A requested
        big-jump run falls back to crude when mu may look at the increments.

        Raises:
            HypothesisViolation: If big-jump is requested for a lattice or light-tailed law
        """
        if mode not in MODES:
            raise ParameterOutOfRange(f"Unknown mode {mode!r}; choose from {MODES}")
        exact = supports_exact_conditioning(self.stop)
        if mode == AUTO:
            applicable = exact and not self.law.is_lattice and self.law.is_long_tailed()
            if not applicable or expected is None or expected * n_runs >= AUTO_MODE_HITS:
                return CRUDE
            return BIG_JUMP
        if mode == BIG_JUMP:
            check_big_jump_law(self.law)
            if not exact:
                self.logger.warning(
                    f"{self.stop.kind} rule depends on the increments; falling back to crude runs"
                )
                return CRUDE
        return mode

    def _mean_edges(self, master_seed: int, prefix: tuple[int, ...]) -> float:
        engine = WalkEngine(
            self.env, self.law, self.boundary, self.stop, self.horizon_cap, self.population_cap
        )
        key = (*prefix, CALIBRATION_KEY, 0)
        etas = [
            engine.run(replication_streams(master_seed, i, key)).eta()
            for i in range(CALIBRATION_PILOT)
        ]
        return float(np.mean(etas))

    def calibrate(
        self, master_seed: int, prefix: tuple[int, ...] = (), n_runs: int = CALIBRATION_RUNS
    ) -> dict[str, float]:
        """
        Compare crude and big-jump estimates where both are accurate.

        Raises:
            CalibrationFailed: If they differ by more than 3 combined standard errors
        """
        x_cal = calibration_level(self.law, self._mean_edges(master_seed, prefix))
        crude_task = self._task(x_cal, CRUDE, master_seed, (*prefix, CALIBRATION_KEY, 1))
        jump_task = self._task(x_cal, BIG_JUMP, master_seed, (*prefix, CALIBRATION_KEY, 2))
        crude = summarize(self._collect(crude_task, n_runs), CRUDE, master_seed)
        jump = summarize(self._collect(jump_task, n_runs), BIG_JUMP, master_seed)
        combined = math.hypot(crude.se, jump.se)
        z = abs(crude.estimate - jump.estimate) / combined if combined > 0 else 0.0
        report = {
            "x": x_cal,
            "crude": crude.estimate,
            "crude_se": crude.se,
            "big_jump": jump.estimate,
            "big_jump_se": jump.se,
            "z": z,
        }
        self.logger.info(
            f"calibration at x={x_cal:.4g}: crude {crude.estimate:.4g}, "
            f"big-jump {jump.estimate:.4g}, z={z:.2f}"
        )
        if z > CALIBRATION_SE:
            raise CalibrationFailed(
                f"big-jump and crude estimates differ by {z:.2f} se at x={x_cal:.4g}"
            )
        return report

    # ------------------------------------------------------------------ public

    def estimate(
        self,
        x: float,
        n_runs: int,
        mode: str = CRUDE,
        master_seed: Optional[int] = None,
        prefix: tuple[int, ...] = (),
        expected: Optional[float] = None,
        calibrate: bool = True,
    ) -> EstimateResult:
        """
        Estimate P(R_mu^g > x).

        Args:
            x: Level
            n_runs: Number of replications
            mode: "crude", "big-jump" or "auto"
            master_seed: Seed of the study (fresh entropy if None)
            prefix: Extra spawn-key entries separating sub-studies
            expected: Rough probability used by ``auto``
            calibrate: Run the crude comparison before a big-jump estimate

        Returns:
            EstimateResult
        """
        if n_runs < 1:
            raise ParameterOutOfRange(f"n_runs must be positive, got {n_runs}")
        seed = resolve_master_seed(master_seed)
        used = self.resolve_mode(mode, n_runs, expected)
        calibration = self.calibrate(seed, prefix) if used == BIG_JUMP and calibrate else None

        with log_elapsed(self.logger, f"{used} estimate at x={x:g} ({n_runs} runs)"):
            merged = self._collect(self._task(x, used, seed, prefix), n_runs)
        result = summarize(merged, used, seed)
        if calibration is not None:
            result = EstimateResult(**{**result.to_dict(), "calibration": calibration})
        if result.capped_runs:
            self.logger.warning(
                f"{result.capped_runs} of {n_runs} runs hit a cap at x={x:g}; "
                f"mean residual {result.residual_bound:.3g}"
            )
        self.logger.info(
            f"x={x:g}: estimate {result.estimate:.5g} (se {result.se:.2g}, {used}, {n_runs} runs)"
        )
        return result


def estimate_crossing(
    env: Environment,
    law: IncrementLaw,
    boundary: Boundary,
    stop: StoppingRule,
    x: float,
    n_runs: int,
    mode: str = CRUDE,
    master_seed: Optional[int] = None,
    **kwargs,
) -> EstimateResult:
    """
    Estimate P(R_mu^g > x) with the crude or big-jump estimator.

    Identical master seed, run count and batch size give identical results for
    any number of workers. Keyword arguments go to CrossingEstimator
    (horizon_cap, population_cap, workers, batch_size, progress) or to
    ``estimate`` (prefix, expected, calibrate).
    """
    estimate_keys = {"prefix", "expected", "calibrate"}
    est_kwargs = {k: v for k, v in kwargs.items() if k in estimate_keys}
    init_kwargs = {k: v for k, v in kwargs.items() if k not in estimate_keys}
    estimator = CrossingEstimator(env, law, boundary, stop, **init_kwargs)
    return estimator.estimate(x, n_runs, mode, master_seed, **est_kwargs)


def default_asymptote(
    env: Environment,
    law: IncrementLaw,
    boundary: Boundary,
    stop: StoppingRule,
    eta_runs: int = 20000,
    seed: Optional[int] = None,
) -> Callable[[float], float]:
    """
    Analytic counterpart of P(R_mu^g > x) for a configuration.

    H-series for tree-independent mu, (L/c) F̄_I(x) for the infinite horizon and
    E eta_mu F̄(x) otherwise (E eta simulated for mu = nu).
    """
    if isinstance(stop, InfiniteHorizon):
        big_l, c = env.fading_product(), boundary.class_slope()
        return lambda x: veraverbeke_limit(big_l, c, law, x)
    if stop.tree_independent:
        spec = HSeriesSpec(IndependentWeights(env, stop), boundary, law)
        return lambda x: h_series(spec, x).value
    if isinstance(stop, FadingTime):
        eta = expected_eta(env, stop, eta_runs, np.random.default_rng(seed)).value
        return lambda x: theorem2_limit(eta, law, x)
    raise ParameterOutOfRange(f"No analytic asymptote for {stop.kind}; pass one explicitly")


RATIO_COLUMNS = [
    "x",
    "estimate",
    "se",
    "ci_lo",
    "ci_hi",
    "analytic",
    "ratio",
    "ratio_se",
    "mode",
    "n_runs",
    "seed",
    "hits",
    "capped_runs",
    "residual_bound",
]


def ratio_study(
    env: Environment,
    law: IncrementLaw,
    boundary: Boundary,
    stop: StoppingRule,
    x_grid: list[float],
    n_runs: int,
    master_seed: Optional[int] = None,
    analytic: Optional[Callable[[float], float]] = None,
    mode: str = AUTO,
    **kwargs,
) -> pd.DataFrame:
    """
    Estimate P(R_mu^g > x) along ``x_grid`` and compare with the asymptote.

    Each grid point uses its own spawn key, so rows are independent. In ``auto``
    mode the estimator is chosen per row from the analytic value.

    Returns:
        DataFrame with the columns of ``RATIO_COLUMNS``
    """
    grid = [float(x) for x in x_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParameterOutOfRange(f"x_grid must be increasing, got {grid}")
    seed = resolve_master_seed(master_seed)
    asymptote = analytic or default_asymptote(env, law, boundary, stop, seed=seed)
    estimator = CrossingEstimator(env, law, boundary, stop, **kwargs)

    rows = []
    for ix, x in enumerate(grid):
        reference = float(asymptote(x))
        expected = reference if math.isfinite(reference) else None
        res = estimator.estimate(x, n_runs, mode, seed, prefix=(ix,), expected=expected)
        ratio = res.estimate / reference if reference > 0 else math.nan
        ratio_se = res.se / reference if reference > 0 else math.nan
        rows.append(
            {
                "x": x,
                "estimate": res.estimate,
                "se": res.se,
                "ci_lo": res.ci_low,
                "ci_hi": res.ci_high,
                "analytic": reference,
                "ratio": ratio,
                "ratio_se": ratio_se,
                "mode": res.mode,
                "n_runs": res.n_runs,
                "seed": seed,
                "hits": res.hits,
                "capped_runs": res.capped_runs,
                "residual_bound": res.residual_bound,
            }
        )
    return pd.DataFrame(rows, columns=RATIO_COLUMNS)


# ---------------------------------------------------------------------- weights


@dataclass
class WeightBatch:
    count: int = 0
    sums: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sums_sq: np.ndarray = field(default_factory=lambda: np.zeros(0))


def run_weight_batch(
    env: Environment,
    law: IncrementLaw,
    boundary: Boundary,
    stop: StoppingRule,
    n_generations: int,
    master_seed: int,
    start: int,
    size: int,
) -> WeightBatch:
    """Per-generation sums of Z_n 1(mu >= n) over a batch."""
    engine = WalkEngine(env, law, boundary, stop, horizon_cap=n_generations)
    sums = np.zeros(n_generations)
    sums_sq = np.zeros(n_generations)
    for i in range(start, start + size):
        real = engine.run(replication_streams(master_seed, i))
        row = np.zeros(n_generations)
        observed = real.populations[: real.observed_generations()]
        row[: len(observed)] = observed
        sums += row
        sums_sq += row * row
    return WeightBatch(size, sums, sums_sq)


def _remainder_mass(env: Environment, stop: StoppingRule, n_generations: int) -> float:
    """Envelope for sum_{n > N} w_n: L * sum min(1, L d_{n-1}) for mu = nu."""
    big_l = env.fading_product()
    bound = stop.bound
    if bound is not None and bound <= n_generations:
        return 0.0
    if not isinstance(stop, FadingTime):
        return math.inf
    table = env.d_values(env.D_TABLE_MAX)
    last = len(table) if bound is None else min(bound, len(table))
    d = table[n_generations:last]
    if bound is None and table[-1] > 0:
        return math.inf
    return big_l * float(np.sum(np.minimum(1.0, big_l * d)))


def estimate_weights(
    env: Environment,
    law: IncrementLaw,
    boundary: Boundary,
    stop: StoppingRule,
    n_generations: int,
    n_runs: int,
    master_seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> EmpiricalWeights:
    """
    Estimate w_n = E[Z_n 1(mu >= n)] for n <= ``n_generations`` by simulation.

    Used for stopping rules that look at the tree or the increments.
    """
    if n_generations < 1 or n_runs < 2:
        raise ParameterOutOfRange("Need at least one generation and two runs")
    seed = resolve_master_seed(master_seed)
    settings = load_settings()
    n_workers = workers or settings.workers
    plan = batch_plan(n_runs, settings.batch_size)
    args = (env, law, boundary, stop, n_generations, seed)
    results: dict[int, WeightBatch] = {}
    if n_workers <= 1 or len(plan) <= 1:
        for b, start, size in plan:
            results[b] = run_weight_batch(*args, start, size)
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as executor:
            futures = {executor.submit(run_weight_batch, *args, s, n): b for b, s, n in plan}
            for future in as_completed(futures):
                results[futures[future]] = future.result()
    sums = np.zeros(n_generations)
    sums_sq = np.zeros(n_generations)
    for b in sorted(results):
        sums += results[b].sums
        sums_sq += results[b].sums_sq
    mean = sums / n_runs
    var = np.maximum(0.0, sums_sq / n_runs - mean * mean) * n_runs / (n_runs - 1)
    return EmpiricalWeights(
        estimates=mean,
        standard_errors=np.sqrt(var / n_runs),
        big_l=env.fading_product(),
        remainder_mass=_remainder_mass(env, stop, n_generations),
    )

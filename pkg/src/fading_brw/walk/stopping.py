"""Stopping rules for the branching random walk.

Each rule carries its independence class:

    HM    independent of the increments (may depend on the tree)
    MO    decided at n from generations <= n and the tree only
    BOTH  independent of tree and increments (satisfies both)

Rules decided before the walk (Fixed, IndependentLaw, FadingTime) draw mu from
the stop stream or the tree; FirstPassageBelow fires online from the fronts.
"""

import math
from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from scipy import special

from ..branching.environment import (
    CONVERGES,
    DegenerateTail,
    Environment,
    GeometricTail,
    GrowthFunction,
    PowerTail,
)
from ..branching.trajectory import BranchingTrajectory
from ..distributions.increments import IncrementLaw, LognormalLaw, ParetoLaw, WeibullLaw
from ..exceptions import ConfigError, NotRealizedWithinCap, ParameterOutOfRange
from .boundaries import Boundary

HM = "HM"
MO = "MO"
BOTH = "BOTH"
_COMPATIBLE_TAGS = {BOTH: {HM, MO, BOTH}, HM: {HM}, MO: {MO}}


@dataclass(frozen=True)
class Decay:
    """How fast P(mu > n) decays: bounded, exponential(rate), power(alpha) or unknown."""

    kind: str
    rate: float = 0.0


# ---------------------------------------------------------------------- laws of mu


class MuLaw(ABC):
    """Distribution of a stopping time drawn independently of the walk."""

    name = "abstract"

    @abstractmethod
    def survival(self, n: np.ndarray) -> np.ndarray:
        """P(mu >= n)."""

    @abstractmethod
    def tail_mass(self, n_terms: int) -> float:
        """sum_{n > N} P(mu >= n)."""

    @abstractmethod
    def sample(self, rng: np.random.Generator) -> int:
        """One draw of mu."""

    @abstractmethod
    def decay(self) -> Decay:
        """Decay class of the survival function."""

    @abstractmethod
    def params(self) -> dict[str, Any]:
        """Parameters for serialisation."""

    def mean(self) -> float:
        """E mu = sum_{n >= 1} P(mu >= n)."""
        return self.tail_mass(0)

    def to_spec(self) -> dict[str, Any]:
        return {"family": self.name, **self.params()}


class GeometricMu(MuLaw):
    """P(mu >= n) = (1 - p)^(n - 1) on {1, 2, ...}."""

    name = "geometric"

    def __init__(self, p: float):
        if not 0 < p <= 1:
            raise ParameterOutOfRange(f"Geometric p must lie in (0, 1], got {p}")
        self.p = float(p)

    def survival(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return np.where(n <= 1, 1.0, (1.0 - self.p) ** np.maximum(n - 1.0, 0.0))

    def tail_mass(self, n_terms: int) -> float:
        return (1.0 - self.p) ** n_terms / self.p

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.geometric(self.p))

    def decay(self) -> Decay:
        if self.p == 1:
            return Decay("bounded", 1)
        return Decay("exponential", -math.log1p(-self.p))

    def params(self) -> dict[str, Any]:
        return {"p": self.p}


class PowerMu(MuLaw):
    """
    P(mu >= n) = min(1, K2 n^(-alpha)) for n >= 1.

    Sampled by inversion: mu = floor((K2 / U)^(1/alpha)).
    """

    name = "power"

    def __init__(self, k2: float, alpha: float):
        if k2 <= 0 or alpha <= 0:
            raise ParameterOutOfRange(f"Power mu law needs K2, alpha > 0; got {k2}, {alpha}")
        self.k2 = float(k2)
        self.alpha = float(alpha)
        # first n with K2 n^-alpha < 1
        self.n_free = int(math.floor(self.k2 ** (1.0 / self.alpha))) + 1

    def survival(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        safe = np.maximum(n, 1.0)
        return np.where(n <= 0, 1.0, np.minimum(1.0, self.k2 * safe ** (-self.alpha)))

    def tail_mass(self, n_terms: int) -> float:
        if self.alpha <= 1:
            return math.inf
        start = n_terms + 1
        saturated = max(0, self.n_free - start)
        return saturated + self.k2 * float(special.zeta(self.alpha, max(start, self.n_free)))

    def sample(self, rng: np.random.Generator) -> int:
        u = 1.0 - rng.random()
        return int(math.floor((self.k2 / u) ** (1.0 / self.alpha)))

    def decay(self) -> Decay:
        return Decay("power", self.alpha)

    def params(self) -> dict[str, Any]:
        return {"k2": self.k2, "alpha": self.alpha}


class TabulatedMu(MuLaw):
    """Finitely supported law of mu given by its pmf."""

    name = "table"

    def __init__(self, pmf: dict[Any, float]):
        values = {int(k): float(v) for k, v in pmf.items()}
        if any(k < 0 for k in values) or any(v < 0 for v in values.values()):
            raise ParameterOutOfRange(f"pmf must be non-negative on n >= 0, got {pmf}")
        if abs(sum(values.values()) - 1.0) > 1e-9:
            raise ParameterOutOfRange("pmf must sum to 1")
        self.pmf = dict(sorted(values.items()))
        self.support = np.array(list(self.pmf), dtype=np.int64)
        self.probs = np.array(list(self.pmf.values()))
        self.max_value = int(self.support[-1])

    def survival(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return (self.probs * (self.support >= n[..., None])).sum(axis=-1)

    def tail_mass(self, n_terms: int) -> float:
        return float(np.sum(self.survival(np.arange(n_terms + 1, self.max_value + 1))))

    def sample(self, rng: np.random.Generator) -> int:
        return int(self.support[rng.choice(len(self.support), p=self.probs)])

    def decay(self) -> Decay:
        return Decay("bounded", self.max_value)

    def params(self) -> dict[str, Any]:
        return {"pmf": {str(k): v for k, v in self.pmf.items()}}


_MU_LAWS = {"geometric": GeometricMu, "power": PowerMu, "table": TabulatedMu}


# ---------------------------------------------------------------------- rules


class StoppingRule:
    """
    Base class for stopping rules.

    Attributes:
        kind: Config name of the rule
        independence_class: HM, MO or BOTH
        cap: Optional N; the realised time is mu ∧ N
    """

    kind = "abstract"
    independence_class = BOTH
    tree_independent = False
    increment_independent = True
    decided_before_walk = True

    def __init__(self, cap: Optional[int] = None):
        if cap is not None and cap < 0:
            raise ParameterOutOfRange(f"Cap must be non-negative, got {cap}")
        self.cap = cap

    def apply_cap(self, mu: float) -> float:
        return mu if self.cap is None else min(mu, self.cap)

    @property
    def bound(self) -> Optional[int]:
        """Deterministic upper bound on mu, if any."""
        return self.cap

    def draw(
        self, stop_rng: np.random.Generator, trajectory: Optional[BranchingTrajectory]
    ) -> Optional[float]:
        """mu for rules decided before the walk; None for online rules."""
        return None

    def fires(self, n: int, front: float, boundary: Boundary) -> bool:
        """Online decision at generation n from the rightmost shifted value r_n^g."""
        return False

    def fires_many(self, gens: np.ndarray, fronts: np.ndarray, boundary: Boundary) -> np.ndarray:
        """Vectorised ``fires`` over consecutive generations."""
        return np.zeros(len(gens), dtype=bool)

    def survival(self, n: np.ndarray) -> Optional[np.ndarray]:
        """P(mu >= n) for tree-independent rules."""
        return None

    def mean(self) -> Optional[float]:
        return None

    def tail_mass(self, n_terms: int) -> Optional[float]:
        return None

    def decay(self, env: Optional[Environment] = None) -> Decay:
        if self.cap is not None:
            return Decay("bounded", self.cap)
        return Decay("unknown")

    def check_declared(self, tag: Optional[str]) -> None:
        """
        Raise ConfigError unless ``tag`` is consistent with the rule's class.

        Example:
            >>> FirstPassageBelow(a=1.0, c=1.0).check_declared("HM")
            Traceback (most recent call last):
            ...
            ConfigError: ...
        """
        if tag is None:
            return
        if tag not in _COMPATIBLE_TAGS:
            raise ConfigError(f"Unknown independence class {tag!r}; use HM, MO or BOTH")
        if tag not in _COMPATIBLE_TAGS[self.independence_class]:
            raise ConfigError(
                f"{self.kind} rule is {self.independence_class}; declared class {tag} mismatches"
            )

    def params(self) -> dict[str, Any]:
        return {}

    def to_spec(self) -> dict[str, Any]:
        spec = {"kind": self.kind, "class": self.independence_class, **self.params()}
        if self.cap is not None:
            spec["cap"] = self.cap
        return spec

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in {**self.params(), "cap": self.cap}.items())
        return f"{self.__class__.__name__}({args})"


class Fixed(StoppingRule):
    """mu = N."""

    kind = "fixed"
    tree_independent = True

    def __init__(self, n: int):
        if n < 0:
            raise ParameterOutOfRange(f"Fixed time must be non-negative, got {n}")
        super().__init__(cap=None)
        self.n = int(n)

    @property
    def bound(self) -> Optional[int]:
        return self.n

    def draw(self, stop_rng, trajectory) -> Optional[float]:
        return self.n

    def survival(self, n: np.ndarray) -> np.ndarray:
        return np.where(np.asarray(n) <= self.n, 1.0, 0.0)

    def mean(self) -> float:
        return float(self.n)

    def tail_mass(self, n_terms: int) -> float:
        return float(max(0, self.n - n_terms))

    def decay(self, env: Optional[Environment] = None) -> Decay:
        return Decay("bounded", self.n)

    def params(self) -> dict[str, Any]:
        return {"n": self.n}


class IndependentLaw(StoppingRule):
    """mu drawn from its own stream, independent of tree and increments."""

    kind = "independent"
    tree_independent = True

    def __init__(self, law: MuLaw, cap: Optional[int] = None):
        super().__init__(cap)
        self.law = law

    @property
    def bound(self) -> Optional[int]:
        bounds = [b for b in (self.cap, getattr(self.law, "max_value", None)) if b is not None]
        return min(bounds, default=None)

    def draw(self, stop_rng, trajectory) -> Optional[float]:
        return self.apply_cap(self.law.sample(stop_rng))

    def survival(self, n: np.ndarray) -> np.ndarray:
        values = self.law.survival(n)
        if self.cap is None:
            return values
        return np.where(np.asarray(n) <= self.cap, values, 0.0)

    def tail_mass(self, n_terms: int) -> float:
        if self.cap is None:
            return self.law.tail_mass(n_terms)
        if n_terms >= self.cap:
            return 0.0
        return float(np.sum(self.survival(np.arange(n_terms + 1, self.cap + 1))))

    def mean(self) -> float:
        return self.tail_mass(0)

    def decay(self, env: Optional[Environment] = None) -> Decay:
        return super().decay(env) if self.cap is not None else self.law.decay()

    def params(self) -> dict[str, Any]:
        return {"law": self.law.to_spec()}


class FadingTime(StoppingRule):
    """mu = nu, the fading time of the tree."""

    kind = "fading_time"
    independence_class = HM

    def draw(self, stop_rng, trajectory) -> Optional[float]:
        if trajectory is None:
            raise ParameterOutOfRange("FadingTime needs the realised trajectory")
        return self.apply_cap(trajectory.nu)

    def decay(self, env: Optional[Environment] = None) -> Decay:
        if self.cap is not None:
            return Decay("bounded", self.cap)
        if env is None:
            return Decay("unknown")
        tail = env.tail
        if isinstance(tail, DegenerateTail):
            return Decay("bounded", max(1, env.prefix_length))
        if isinstance(tail, GeometricTail):
            return Decay("exponential", -math.log(tail.ratio))
        if isinstance(tail, PowerTail) and tail.p > 1:
            return Decay("power", tail.p - 1.0)
        return Decay("unknown")


class FirstPassageBelow(StoppingRule):
    """
    mu = inf{n >= 1 : r_n^c < -a}, with r_n^c = r_n^g + g(n) - c n.

    The decision at n uses the rightmost value of generation n only.
    """

    kind = "first_passage_below"
    independence_class = MO
    increment_independent = False
    decided_before_walk = False

    def __init__(self, a: float, c: float, cap: Optional[int] = None):
        super().__init__(cap)
        if a < 0:
            raise ParameterOutOfRange(f"Level a must be non-negative, got {a}")
        self.a = float(a)
        self.c = float(c)

    def fires(self, n: int, front: float, boundary: Boundary) -> bool:
        return n >= 1 and front + boundary(n) - self.c * n < -self.a

    def fires_many(self, gens: np.ndarray, fronts: np.ndarray, boundary: Boundary) -> np.ndarray:
        return (gens >= 1) & (fronts + boundary(gens) - self.c * gens < -self.a)

    def params(self) -> dict[str, Any]:
        return {"a": self.a, "c": self.c}


class InfiniteHorizon(StoppingRule):
    """
    mu = inf, run until a residual bound on the remaining crossing mass is small.

    The engine stops once n >= nu and sum_j F̄_I(x - s_j)/c over the live
    lineages is at most ``eps_resid`` times (L/c) F̄_I(x).
    """

    kind = "infinite_horizon"
    # mu = inf is deterministic; the settling check reads increments, so no big-jump
    independence_class = BOTH
    increment_independent = False
    decided_before_walk = False

    def __init__(self, eps_resid: float = 0.05):
        super().__init__(cap=None)
        if not 0 < eps_resid < 1:
            raise ParameterOutOfRange(f"eps_resid must lie in (0, 1), got {eps_resid}")
        self.eps_resid = float(eps_resid)

    def params(self) -> dict[str, Any]:
        return {"eps_resid": self.eps_resid}


def realize_stop(
    rule: StoppingRule,
    stop_rng: Optional[np.random.Generator] = None,
    trajectory: Optional[BranchingTrajectory] = None,
    fronts: Optional[Sequence[float]] = None,
    boundary: Optional[Boundary] = None,
) -> float:
    """
    Realise mu for one replication.

    Args:
        rule: Stopping rule
        stop_rng: Dedicated stream for IndependentLaw draws
        trajectory: Realised tree (FadingTime)
        fronts: r_1^g, r_2^g, ... for online rules
        boundary: Boundary g the fronts are shifted by

    Returns:
        Realised mu (``math.inf`` for InfiniteHorizon)

    Raises:
        NotRealizedWithinCap: If an online rule has not fired within the fronts
    """
    if isinstance(rule, InfiniteHorizon):
        return math.inf
    if rule.decided_before_walk:
        return rule.draw(stop_rng, trajectory)
    if fronts is None or boundary is None:
        raise ParameterOutOfRange(f"{rule.kind} needs the realised fronts and the boundary")
    for n, front in enumerate(fronts, start=1):
        if rule.cap is not None and n > rule.cap:
            break
        if rule.fires(n, front, boundary):
            return n
    if rule.cap is not None and len(fronts) >= rule.cap:
        return rule.cap
    raise NotRealizedWithinCap(f"{rule.kind} did not fire within {len(fronts)} generations")


# ---------------------------------------------------------------------- certificates


@dataclass(frozen=True)
class Certificate:
    """Finiteness certificate: ``holds`` is None when undecided."""

    holds: Optional[bool]
    bound: float
    method: str


def mu_z_certificate(env: Environment, rule: StoppingRule) -> Certificate:
    """
    Decide whether E(mu Z_mu) is finite from the moment criteria.

    Fixed N gives N E Z_N; a tree-independent mu gives at most L E mu; the fading
    time uses Hölder, E(nu Z) <= (E nu^2 E Z^2)^(1/2).
    """
    if rule.bound is not None:
        n = rule.bound
        return Certificate(True, n * env.expected_population(n), "bounded mu: N E Z_N")
    if isinstance(rule, InfiniteHorizon):
        return Certificate(False, math.inf, "infinite horizon")
    big_l = env.fading_product()
    if rule.tree_independent:
        mean = rule.mean()
        finite = math.isfinite(mean) and math.isfinite(big_l)
        return Certificate(finite, big_l * mean if finite else math.inf, "L E mu")
    if isinstance(rule, FadingTime):
        if not env.is_fading():
            return Certificate(False, math.inf, "non-fading environment")
        nu_ok = env.moment_criterion(GrowthFunction("power", 2.0)) == CONVERGES
        z_bound = env.z_moment_bound(2.0)
        finite = nu_ok and math.isfinite(z_bound)
        return Certificate(finite, math.nan, "Hölder: E nu^2 and prod E zeta^2")
    return Certificate(None, math.nan, f"no certificate for uncapped {rule.kind}")


def _law_tail_order(law: IncrementLaw) -> tuple[str, float]:
    if isinstance(law, ParetoLaw):
        return "power", law.beta
    if isinstance(law, LognormalLaw):
        return "lognormal", law.sigma
    if isinstance(law, WeibullLaw):
        return "stretched", law.gamma
    return "light", 0.0


def light_tail_certificate(
    rule: StoppingRule, law: IncrementLaw, env: Optional[Environment] = None
) -> Certificate:
    """
    Check P(mu > h(x)) = o(F̄(x)) by comparing decay classes.

    With h(x) = x^a: a bounded mu always passes; an exponentially decaying mu
    beats power and lognormal tails, and stretched-exponential tails of shape
    gamma when a > gamma; a power-law mu with index alpha beats a Pareto tail
    when a * alpha > beta.
    """
    order, shape = _law_tail_order(law)
    if order == "light":
        return Certificate(False, math.nan, f"{law.family} law is not heavy-tailed")
    exponent = law.insensitivity_exponent()
    decay = rule.decay(env)
    if decay.kind == "bounded":
        return Certificate(True, math.nan, "bounded mu")
    if decay.kind == "exponential":
        holds = order != "stretched" or exponent > shape
        return Certificate(holds, math.nan, f"exponential mu vs h(x) = x^{exponent:g}")
    if decay.kind == "power":
        holds = order == "power" and exponent * decay.rate > shape
        return Certificate(holds, math.nan, f"power mu (alpha={decay.rate:g})")
    return Certificate(False, math.nan, "decay of mu unknown")


# ---------------------------------------------------------------------- config


def stopping_from_spec(spec: dict[str, Any]) -> StoppingRule:
    """
    Build a stopping rule from its config block and check the declared class.

    Example:
        >>> stopping_from_spec({"kind": "fixed", "n": 5, "class": "BOTH"})
        Fixed(n=5, cap=None)
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"Stopping spec must be a mapping with a 'kind' key, got {spec!r}")
    kind = spec["kind"]
    cap = spec.get("cap")
    try:
        if kind == "fixed":
            rule: StoppingRule = Fixed(int(spec["n"]))
        elif kind == "independent":
            law_spec = dict(spec["law"])
            family = law_spec.pop("family")
            if family not in _MU_LAWS:
                raise ConfigError(f"Unknown mu law {family!r}; choose from {sorted(_MU_LAWS)}")
            rule = IndependentLaw(_MU_LAWS[family](**law_spec), cap=cap)
        elif kind == "fading_time":
            rule = FadingTime(cap=cap)
        elif kind == "first_passage_below":
            rule = FirstPassageBelow(float(spec["a"]), float(spec["c"]), cap=cap)
        elif kind == "infinite_horizon":
            rule = InfiniteHorizon(float(spec.get("eps_resid", 0.05)))
        else:
            raise ConfigError(f"Unknown stopping kind {kind!r}")
    except (KeyError, TypeError) as e:
        raise ConfigError(f"Bad parameters for stopping rule {kind!r}: {e}") from e
    rule.check_declared(spec.get("class"))
    return rule

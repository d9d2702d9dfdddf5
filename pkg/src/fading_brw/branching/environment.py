"""Varying branching environments with analytic tail rules.

An environment is an explicit prefix of offspring laws P_0, ..., P_{k-1} followed by
a tail rule that produces P_n for every n >= k. Tail rules know their non-unit
probabilities q_n in closed form, so series such as L = prod m_n and
d_n = -sum_{j>=n} ln(1 - q_j) are summed with a controlled remainder instead of
being truncated blindly.
"""

import math
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy import integrate

from ..exceptions import (
    ConfigError,
    DivergentQSeries,
    Inconclusive,
    NonFadingEnvironment,
    ParameterOutOfRange,
)
from ..utils.logging_utils import get_logger
from .offspring import DEGENERATE, OffspringLaw

CONVERGES = "converges"
DIVERGES = "diverges"

Phi = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GrowthFunction:
    """
    Non-decreasing f used in the fading-time moment criterion sum f(n+1) q_n.

    Kinds:
        power        f(n) = n^s, s >= 0
        exponential  f(n) = exp(lam * n), lam >= 0
        table        tabulated values f(1), f(2), ...
    """

    kind: str
    param: float = 0.0
    table: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in ("power", "exponential", "table"):
            raise ParameterOutOfRange(f"Unknown growth function kind {self.kind!r}")
        if self.kind in ("power", "exponential") and self.param < 0:
            raise ParameterOutOfRange(f"{self.kind} growth needs a non-negative parameter")
        if self.kind == "table":
            if not self.table or any(b < a for a, b in zip(self.table, self.table[1:])):
                raise ParameterOutOfRange("Tabulated growth function must be non-decreasing")

    def __call__(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        if self.kind == "power":
            return n**self.param
        if self.kind == "exponential":
            return np.exp(self.param * n)
        idx = np.clip(n.astype(int) - 1, 0, len(self.table) - 1)
        return np.asarray(self.table)[idx]

    def label(self) -> str:
        if self.kind == "power":
            return f"n^{self.param:g}"
        if self.kind == "exponential":
            return f"exp({self.param:g} n)"
        return f"table[{len(self.table)}]"


class TailRule(ABC):
    """Offspring laws for every generation from ``start`` on."""

    name: str = "abstract"

    def __init__(self, split: Optional[dict[int, float]] = None):
        split = {int(k): float(v) for k, v in (split or {2: 1.0}).items()}
        if any(k < 2 for k in split) or any(v < 0 for v in split.values()):
            raise ParameterOutOfRange(f"Split must put mass on counts >= 2, got {split}")
        total = sum(split.values())
        if abs(total - 1.0) > 1e-9:
            raise ParameterOutOfRange(f"Split masses must sum to 1, got {total}")
        self.split = split
        self.split_counts = np.array(sorted(split), dtype=np.int64)
        self.split_probs = np.array([split[k] for k in sorted(split)])

    def split_moment(self, s: float) -> float:
        return float(np.sum(self.split_probs * self.split_counts.astype(float) ** s))

    @property
    def split_mean(self) -> float:
        return self.split_moment(1.0)

    @property
    def max_count(self) -> int:
        return int(self.split_counts[-1])

    @abstractmethod
    def q(self, n: np.ndarray) -> np.ndarray:
        """Non-unit probabilities q_n."""

    @abstractmethod
    def is_summable(self) -> bool:
        """Whether sum q_n converges."""

    @abstractmethod
    def series(self, phi: Phi, start: int) -> float:
        """sum_{n >= start} phi(q_n) for phi with phi(0) = 0 and phi(q) ~ c q."""

    @abstractmethod
    def criterion(self, f: GrowthFunction) -> str:
        """Convergence of sum f(n+1) q_n."""

    @abstractmethod
    def params(self) -> dict[str, Any]:
        """Parameters for serialisation."""

    def sample_split(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Offspring counts conditioned on being != 1."""
        return self.split_counts[rng.choice(len(self.split_counts), size=size, p=self.split_probs)]

    def law(self, n: int) -> OffspringLaw:
        q = float(self.q(np.asarray(n)))
        return DEGENERATE if q == 0 else OffspringLaw.from_split(q, self.split)

    def to_spec(self) -> dict[str, Any]:
        split = {str(k): v for k, v in self.split.items()}
        return {"rule": self.name, **self.params(), "split": split}


class DegenerateTail(TailRule):
    """q_n = 0: no branching after the prefix."""

    name = "degenerate"

    def q(self, n: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(n, dtype=float))

    def is_summable(self) -> bool:
        return True

    def series(self, phi: Phi, start: int) -> float:
        return 0.0

    def criterion(self, f: GrowthFunction) -> str:
        return CONVERGES

    def params(self) -> dict[str, Any]:
        return {}


class GeometricTail(TailRule):
    """q_n = q0 * ratio^n."""

    name = "geometric"
    NEGLIGIBLE_Q = 1e-20

    def __init__(self, q0: float, ratio: float, split: Optional[dict[int, float]] = None):
        super().__init__(split)
        if not 0 < q0 < 1:
            raise ParameterOutOfRange(f"q0 must lie in (0, 1), got {q0}")
        if not 0 < ratio < 1:
            raise ParameterOutOfRange(f"ratio must lie in (0, 1), got {ratio}")
        self.q0 = float(q0)
        self.ratio = float(ratio)

    def q(self, n: np.ndarray) -> np.ndarray:
        return self.q0 * self.ratio ** np.asarray(n, dtype=float)

    def is_summable(self) -> bool:
        return True

    def series(self, phi: Phi, start: int) -> float:
        log_q_start = math.log(self.q0) + start * math.log(self.ratio)
        n_terms = math.ceil((math.log(self.NEGLIGIBLE_Q) - log_q_start) / math.log(self.ratio))
        if n_terms <= 0:
            return 0.0
        ks = np.arange(start, start + n_terms + 1)
        return math.fsum(phi(self.q(ks)))

    def criterion(self, f: GrowthFunction) -> str:
        if f.kind == "power":
            return CONVERGES
        if f.kind == "exponential":
            return CONVERGES if f.param < -math.log(self.ratio) else DIVERGES
        raise Inconclusive("Tabulated f carries no growth rate to compare with a geometric tail")

    def params(self) -> dict[str, Any]:
        return {"q0": self.q0, "ratio": self.ratio}


class PowerTail(TailRule):
    """
    q_n = q0 * n^(-p) * (ln n)^(-k) for n >= n0, and 0 before n0.

    ``PowerTail(q0=1, p=1, k=2, n0=3)`` summed against f(n) = n^s diverges for
    every s > 0 even though sum q_n converges.
    """

    name = "power"
    EXPLICIT_TERMS = 100_000

    def __init__(
        self,
        q0: float,
        p: float,
        k: float = 0.0,
        n0: int = 2,
        split: Optional[dict[int, float]] = None,
    ):
        super().__init__(split)
        if q0 <= 0 or p < 0 or k < 0:
            raise ParameterOutOfRange(f"Power tail needs q0 > 0 and p, k >= 0; got {q0}, {p}, {k}")
        if n0 < 2:
            raise ParameterOutOfRange(f"n0 must be at least 2, got {n0}")
        self.q0 = float(q0)
        self.p = float(p)
        self.k = float(k)
        self.n0 = int(n0)
        first = float(self.q(np.asarray(self.n0)))
        if first >= 1:
            raise ParameterOutOfRange(f"q_{{n0}} = {first} must be below 1")

    def _q_continuous(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.q0 * t ** (-self.p) * np.log(t) ** (-self.k)

    def q(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        safe = np.where(n >= self.n0, n, float(self.n0))
        return np.where(n >= self.n0, self._q_continuous(safe), 0.0)

    def is_summable(self) -> bool:
        return self.p > 1 or (self.p == 1 and self.k > 1)

    def series(self, phi: Phi, start: int) -> float:
        if not self.is_summable():
            return math.inf
        first = max(start, self.n0)
        last = first + self.EXPLICIT_TERMS
        explicit = math.fsum(phi(self.q(np.arange(first, last))))

        # midpoint comparison for the remainder, in u = ln t
        def integrand(u: float) -> float:
            t = math.exp(u)
            return float(phi(self._q_continuous(np.asarray(t)))) * t

        remainder, _ = integrate.quad(
            integrand, math.log(last - 0.5), math.inf, epsabs=1e-16, epsrel=1e-10, limit=200
        )
        return explicit + remainder

    def criterion(self, f: GrowthFunction) -> str:
        if f.kind == "exponential" and f.param > 0:
            return DIVERGES
        if f.kind == "table":
            raise Inconclusive("Tabulated f carries no growth rate to compare with a power tail")
        s = f.param if f.kind == "power" else 0.0
        exponent = s - self.p
        if exponent < -1 or (exponent == -1 and self.k > 1):
            return CONVERGES
        return DIVERGES

    def params(self) -> dict[str, Any]:
        return {"q0": self.q0, "p": self.p, "k": self.k, "n0": self.n0}


class ConstantTail(TailRule):
    """q_n = q for every n: a non-fading, supercritical environment."""

    name = "constant"

    def __init__(self, q: float, split: Optional[dict[int, float]] = None):
        super().__init__(split)
        if not 0 < q < 1:
            raise ParameterOutOfRange(f"Constant q must lie in (0, 1), got {q}")
        self.q_const = float(q)

    def q(self, n: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(n, dtype=float), self.q_const)

    def is_summable(self) -> bool:
        return False

    def series(self, phi: Phi, start: int) -> float:
        return math.inf

    def criterion(self, f: GrowthFunction) -> str:
        return DIVERGES

    def params(self) -> dict[str, Any]:
        return {"q": self.q_const}


def _neg_log_unit(q: np.ndarray) -> np.ndarray:
    return -np.log1p(-q)


class Environment:
    """
    Branching environment: explicit prefix laws plus a tail rule.

    Args:
        prefix: Offspring laws for generations 0, ..., len(prefix) - 1
        tail: Rule for all later generations (default: no branching)

    Example:
        >>> env = Environment([OffspringLaw({2: 1})])  # zeta_0 = 2, then no branching
        >>> env.fading_product()
        2.0
    """

    D_TABLE_MAX = 1 << 16

    def __init__(
        self, prefix: Optional[list[OffspringLaw]] = None, tail: Optional[TailRule] = None
    ):
        self.prefix = list(prefix or [])
        self.tail = tail or DegenerateTail()
        if any(not isinstance(law, OffspringLaw) for law in self.prefix):
            raise ParameterOutOfRange("Environment prefix must contain OffspringLaw instances")
        self.logger = get_logger(self.__class__.__name__)
        self._d_table: Optional[np.ndarray] = None
        self._fading_product: Optional[float] = None

    @property
    def prefix_length(self) -> int:
        return len(self.prefix)

    def law(self, n: int) -> OffspringLaw:
        if n < 0:
            raise ParameterOutOfRange(f"Generation must be non-negative, got {n}")
        return self.prefix[n] if n < self.prefix_length else self.tail.law(n)

    def q(self, n: int) -> float:
        if n < self.prefix_length:
            return self.prefix[n].q
        return float(self.tail.q(np.asarray(n)))

    def mean(self, n: int) -> float:
        if n < self.prefix_length:
            return self.prefix[n].mean
        return 1.0 + self.q(n) * (self.tail.split_mean - 1.0)

    def is_fading(self) -> bool:
        return self.tail.is_summable()

    def max_offspring(self) -> int:
        counts = [law.max_count for law in self.prefix]
        if not isinstance(self.tail, DegenerateTail):
            counts.append(self.tail.max_count)
        return max(counts, default=1)

    # ------------------------------------------------------------------ products

    def _log_tail_product(self, factor_minus_one: float) -> float:
        return self.tail.series(lambda q: np.log1p(q * factor_minus_one), self.prefix_length)

    def fading_product(self) -> float:
        """
        L = prod_n E zeta_{n,1}; ``math.inf`` for non-fading environments.

        Example:
            >>> Environment(tail=GeometricTail(0.5, 0.5)).fading_product()  # prod (1 + 2^-n-1)
            2.384231029031...
        """
        if self._fading_product is None:
            if not self.is_fading():
                self._fading_product = math.inf
            else:
                log_prefix = math.fsum(math.log(law.mean) for law in self.prefix)
                log_tail = self._log_tail_product(self.tail.split_mean - 1.0)
                self._fading_product = math.exp(log_prefix + log_tail)
        return self._fading_product

    def partial_product(self, n: int) -> float:
        """L_n = prod_{k <= n} m_k (1 for n < 0)."""
        if n < 0:
            return 1.0
        head = [math.log(self.mean(k)) for k in range(min(n + 1, self.prefix_length))]
        if n >= self.prefix_length:
            ks = np.arange(self.prefix_length, n + 1)
            head.extend(np.log1p(self.tail.q(ks) * (self.tail.split_mean - 1.0)).tolist())
        return math.exp(math.fsum(head))

    def expected_population(self, n: int) -> float:
        """E Z_n = prod_{k < n} m_k."""
        return self.partial_product(n - 1)

    def expected_populations(self, upto: int) -> np.ndarray:
        """E Z_1, ..., E Z_upto as an array."""
        k_prefix = min(upto, self.prefix_length)
        logs = [math.log(self.prefix[k].mean) for k in range(k_prefix)]
        if upto > self.prefix_length:
            ks = np.arange(self.prefix_length, upto)
            tail_logs = np.log1p(self.tail.q(ks) * (self.tail.split_mean - 1.0))
            return np.exp(np.cumsum(np.concatenate((logs, tail_logs))))
        return np.exp(np.cumsum(np.asarray(logs, dtype=float)))

    # ------------------------------------------------------------------ fading time

    def dn(self, n: int) -> float:
        """
        d_n = -sum_{k >= n} ln(1 - q_k); ``math.inf`` if some q_k = 1 with k >= n.

        Raises:
            DivergentQSeries: If sum q_k diverges
        """
        if n < 0:
            raise ParameterOutOfRange(f"n must be non-negative, got {n}")
        if not self.tail.is_summable():
            raise DivergentQSeries(f"sum of q_n diverges for tail rule {self.tail.name!r}")
        head = []
        for k in range(n, self.prefix_length):
            q = self.prefix[k].q
            if q >= 1.0:
                return math.inf
            head.append(-math.log1p(-q))
        return math.fsum(head) + self.tail.series(_neg_log_unit, max(n, self.prefix_length))

    def nu_tail_bounds(self, n: int) -> tuple[float, float]:
        """
        Bounds (exp(-L d_n), exp(-d_n)) on P(nu <= n).

        Raises:
            DivergentQSeries: If sum q_k diverges (checked first)
            NonFadingEnvironment: If the q-series converges but L is infinite
        """
        d = self.dn(n)
        big_l = self.fading_product()
        if not math.isfinite(big_l):
            raise NonFadingEnvironment("nu bounds need a fading environment")
        if math.isinf(d):
            return 0.0, 0.0
        return math.exp(-big_l * d), math.exp(-d)

    def d_values(self, upto: int) -> np.ndarray:
        """
        Cached d_0, ..., d_{upto-1} for tail generations (inf inside a q = 1 prefix).

        The table grows by doubling up to ``D_TABLE_MAX`` entries.
        """
        if self._d_table is not None and upto <= len(self._d_table):
            return self._d_table[:upto]
        size = 64
        while size < max(upto, self.prefix_length + 1):
            size *= 2
        size = min(size, max(self.D_TABLE_MAX, self.prefix_length + 1))
        q = np.array([self.q(k) for k in range(min(size, self.prefix_length))])
        if size > self.prefix_length:
            q = np.concatenate((q, self.tail.q(np.arange(self.prefix_length, size))))
        with np.errstate(divide="ignore"):
            terms = -np.log1p(-q)
        remainder = self.dn(size)
        table = remainder + np.cumsum(terms[::-1])[::-1]
        self._d_table = table
        self.logger.debug(f"d_n table extended to {size} generations")
        return table[:upto]

    def moment_criterion(self, f: GrowthFunction) -> str:
        """
        Decide convergence of sum f(n+1) q_n from the tail rule.

        Returns:
            "converges" or "diverges"

        Raises:
            Inconclusive: For tabulated f with a non-trivial tail rule
        """
        verdict = self.tail.criterion(f)
        self.logger.debug(f"moment criterion for f={f.label()}: {verdict}")
        return verdict

    # ------------------------------------------------------------------ population moments

    def z_moment_bound(self, s: float) -> float:
        """prod_n E zeta_{n,1}^s, an upper bound for E Z^s; inf when it diverges."""
        if s <= 1:
            raise ParameterOutOfRange(f"s must exceed 1, got {s}")
        if not self.is_fading():
            return math.inf
        log_prefix = math.fsum(math.log(law.moment(s)) for law in self.prefix)
        log_tail = self._log_tail_product(self.tail.split_moment(s) - 1.0)
        return math.exp(log_prefix + log_tail)

    def bounded_offspring_bound(self, s: float) -> float:
        """prod_n (1 + (K^s - 1) q_n) with K the largest offspring count."""
        if not self.is_fading():
            return math.inf
        factor = float(self.max_offspring()) ** s - 1.0
        log_prefix = math.fsum(math.log1p(factor * law.q) for law in self.prefix)
        return math.exp(log_prefix + self._log_tail_product(factor))

    def to_spec(self) -> dict[str, Any]:
        return {"prefix": [law.to_spec() for law in self.prefix], "tail": self.tail.to_spec()}

    def __repr__(self) -> str:
        return f"Environment(prefix={len(self.prefix)}, tail={self.tail.name})"


_TAIL_RULES: dict[str, type[TailRule]] = {
    "degenerate": DegenerateTail,
    "geometric": GeometricTail,
    "power": PowerTail,
    "constant": ConstantTail,
}


def environment_from_spec(spec: dict[str, Any]) -> Environment:
    """
    Build an environment from its config block.

    Example:
        >>> environment_from_spec({"prefix": [{"2": 1}], "tail": {"rule": "degenerate"}})
        Environment(prefix=1, tail=degenerate)
    """
    if not isinstance(spec, dict):
        raise ConfigError(f"Environment spec must be a mapping, got {spec!r}")
    prefix = [OffspringLaw(masses) for masses in spec.get("prefix", [])]
    tail_spec = dict(spec.get("tail", {"rule": "degenerate"}))
    rule = tail_spec.pop("rule", "degenerate")
    if rule not in _TAIL_RULES:
        raise ConfigError(f"Unknown tail rule {rule!r}; choose from {sorted(_TAIL_RULES)}")
    if "split" in tail_spec:
        tail_spec["split"] = {int(k): float(v) for k, v in tail_spec["split"].items()}
    if rule == "degenerate":
        tail_spec.pop("split", None)
    try:
        return Environment(prefix, _TAIL_RULES[rule](**tail_spec))
    except TypeError as e:
        raise ConfigError(f"Bad parameters for {rule} tail rule: {e}") from e

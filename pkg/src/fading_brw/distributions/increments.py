"""Zero-mean increment laws for the branching random walk.

Each family is realised as ``xi = X - E X`` for a raw law ``X``, so every law
carries the location shift that makes its mean vanish. All tail functions accept
scalars or numpy arrays and return the same shape.

Families:
    pareto       Lomax tail (1 + t/scale)^(-beta), beta > 1
    lognormal    exp(mu + sigma * N)
    weibull      tail exp(-(t/scale)^gamma), 0 < gamma < 1
    exponential  light-tailed control, rate > 0
    lattice      finitely many atoms with exact rational masses
"""

from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Any, Optional, Union

import numpy as np
from scipy import integrate, special, stats

from ..exceptions import ConfigError, NotLongTailed, ParameterOutOfRange, UnboundedPositiveMean

ArrayLike = Union[float, np.ndarray]


def _as_output(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values) if scalar else values


class IncrementLaw(ABC):
    """
    Base class for increment laws.

    Subclasses implement the tail, the excess mean ``E(xi - y)^+`` and a sampler
    in array form; the public methods add clamping and scalar handling.

    Attributes:
        family: Family tag used in config files
        shift: Location shift ``E X`` subtracted from the raw law
        lower: Left end of the support (``-inf`` if unbounded)
    """

    family: str = "abstract"
    is_lattice: bool = False

    def __init__(self, shift: float, lower: float, h_exponent: Optional[float] = None):
        self.shift = float(shift)
        self.lower = float(lower)
        if h_exponent is not None and not 0 < h_exponent < 1:
            raise ParameterOutOfRange(f"h_exponent must lie in (0, 1), got {h_exponent}")
        self.h_exponent = h_exponent

    # ------------------------------------------------------------------ family hooks

    @abstractmethod
    def _tail(self, x: np.ndarray) -> np.ndarray:
        """Tail P(xi > x) on an array."""

    @abstractmethod
    def _excess_mean(self, y: np.ndarray) -> np.ndarray:
        """Unclamped integral of the tail over (y, inf), i.e. E(xi - y)^+."""

    @abstractmethod
    def _draw(self, rng: np.random.Generator, size: Optional[int]) -> ArrayLike:
        """Draw from the raw law (before the shift)."""

    @abstractmethod
    def _density(self, x: np.ndarray) -> np.ndarray:
        """Density of xi on an array."""

    @abstractmethod
    def _quantile(self, p: float) -> float:
        """Inverse tail for p in (0, 1)."""

    @abstractmethod
    def _default_h_exponent(self) -> float:
        """Exponent a of the insensitivity scale h(x) = x^a."""

    @abstractmethod
    def params(self) -> dict[str, Any]:
        """Shape parameters for serialisation."""

    @abstractmethod
    def is_heavy_tailed(self) -> bool:
        """True when E exp(lambda * xi) is infinite for every lambda > 0."""

    # ------------------------------------------------------------------ public API

    def tail(self, x: ArrayLike) -> ArrayLike:
        """
        Right tail F̄(x) = P(xi > x).

        Args:
            x: Level or array of levels

        Returns:
            Probability (float) or array of probabilities, same shape as x
        """
        arr = np.asarray(x, dtype=float)
        out = np.clip(self._tail(arr), 0.0, 1.0)
        return _as_output(out, arr.ndim == 0)

    def cdf(self, x: ArrayLike) -> ArrayLike:
        arr = np.asarray(x, dtype=float)
        out = 1.0 - np.clip(self._tail(arr), 0.0, 1.0)
        return _as_output(out, arr.ndim == 0)

    def density(self, x: ArrayLike) -> ArrayLike:
        arr = np.asarray(x, dtype=float)
        return _as_output(self._density(arr), arr.ndim == 0)

    def integrated_tail(self, x: ArrayLike) -> ArrayLike:
        """
        Integrated tail F̄_I(x) = min(1, integral of F̄ over (x, inf)).

        Raises:
            UnboundedPositiveMean: If the positive part has infinite mean
        """
        arr = np.asarray(x, dtype=float)
        out = np.minimum(1.0, self._excess_mean(arr))
        return _as_output(out, arr.ndim == 0)

    def excess_mean(self, x: ArrayLike) -> ArrayLike:
        """Unclamped E(xi - x)^+; used for residual bounds on many lineages."""
        arr = np.asarray(x, dtype=float)
        return _as_output(self._excess_mean(arr), arr.ndim == 0)

    def positive_mean(self) -> float:
        """m_{G+} = E max(xi, 0)."""
        return float(self._excess_mean(np.asarray(0.0)))

    def mean(self) -> float:
        """
        E xi, computed as E xi^+ minus the quadrature of the cdf over (lower, 0).

        Used to check the mean-zero construction.
        """
        negative, _ = integrate.quad(
            lambda y: 1.0 - float(self._tail(np.asarray(y))),
            self.lower,
            0.0,
            epsabs=1e-13,
            epsrel=1e-12,
            limit=200,
        )
        return self.positive_mean() - negative

    def quantile(self, p: float) -> float:
        """Inverse tail: the level q with F̄(q) = p."""
        if not 0 < p < 1:
            raise ParameterOutOfRange(f"Tail probability must lie in (0, 1), got {p}")
        return self._quantile(p)

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> ArrayLike:
        """
        Draw i.i.d. increments.

        Args:
            rng: numpy Generator owned by the caller
            size: Number of draws; None returns a single float

        Returns:
            Float or array of draws
        """
        return self._draw(rng, size) - self.shift

    def is_long_tailed(self) -> bool:
        return self.is_heavy_tailed()

    def insensitivity_scale(self, x: ArrayLike) -> ArrayLike:
        """
        Scale h(x) = max(x, 1)^a with F̄(x ± h(x)) ~ F̄(x).

        Raises:
            NotLongTailed: For light-tailed or bounded laws
        """
        arr = np.asarray(x, dtype=float)
        exponent = self.insensitivity_exponent()
        return _as_output(np.maximum(arr, 1.0) ** exponent, arr.ndim == 0)

    def insensitivity_exponent(self) -> float:
        """Exponent a of h(x) = x^a (the override if one was given)."""
        if not self.is_long_tailed():
            raise NotLongTailed(f"{self.family} law is not long-tailed; no insensitivity scale")
        return self.h_exponent if self.h_exponent is not None else self._default_h_exponent()

    def to_spec(self) -> dict[str, Any]:
        spec = {"family": self.family, **self.params(), "shift": self.shift}
        if self.h_exponent is not None:
            spec["h_exponent"] = self.h_exponent
        return spec

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{self.__class__.__name__}({args})"


class ParetoLaw(IncrementLaw):
    """
    Mean-zero Lomax law: F̄(x) = (1 + (x + s)/scale)^(-beta) for x >= -s.

    The shift is s = scale / (beta - 1). The tail is asymptotically
    ``K1 * x^(-beta)`` with ``K1 = scale^beta``.

    Example:
        >>> law = ParetoLaw(beta=2.0)
        >>> law.tail(0.0)
        0.25
    """

    family = "pareto"

    def __init__(self, beta: float, scale: float = 1.0, h_exponent: Optional[float] = None):
        if scale <= 0:
            raise ParameterOutOfRange(f"Pareto scale must be positive, got {scale}")
        if beta <= 1:
            raise UnboundedPositiveMean(f"Pareto beta={beta} has infinite mean; need beta > 1")
        self.beta = float(beta)
        self.scale = float(scale)
        shift = scale / (beta - 1.0)
        super().__init__(shift=shift, lower=-shift, h_exponent=h_exponent)

    @property
    def tail_constant(self) -> float:
        """K1 in F̄(x) ~ K1 x^(-beta)."""
        return self.scale**self.beta

    def _z(self, x: np.ndarray) -> np.ndarray:
        return np.maximum(1.0 + (x + self.shift) / self.scale, 1.0)

    def _tail(self, x: np.ndarray) -> np.ndarray:
        return self._z(x) ** (-self.beta)

    def _excess_mean(self, y: np.ndarray) -> np.ndarray:
        inside = self.scale / (self.beta - 1.0) * self._z(y) ** (1.0 - self.beta)
        return np.where(y >= self.lower, inside, -y)

    def _density(self, x: np.ndarray) -> np.ndarray:
        dens = self.beta / self.scale * self._z(x) ** (-self.beta - 1.0)
        return np.where(x >= self.lower, dens, 0.0)

    def _quantile(self, p: float) -> float:
        return self.scale * (p ** (-1.0 / self.beta) - 1.0) - self.shift

    def _draw(self, rng: np.random.Generator, size: Optional[int]) -> ArrayLike:
        u = 1.0 - rng.random(size)
        return self.scale * (u ** (-1.0 / self.beta) - 1.0)

    def _default_h_exponent(self) -> float:
        return 0.5

    def params(self) -> dict[str, Any]:
        return {"beta": self.beta, "scale": self.scale}

    def is_heavy_tailed(self) -> bool:
        return True


class LognormalLaw(IncrementLaw):
    """Mean-zero lognormal: xi = exp(mu + sigma N) - exp(mu + sigma^2 / 2)."""

    family = "lognormal"

    def __init__(self, sigma: float = 1.0, mu: float = 0.0, h_exponent: Optional[float] = None):
        if sigma <= 0:
            raise ParameterOutOfRange(f"Lognormal sigma must be positive, got {sigma}")
        self.sigma = float(sigma)
        self.mu = float(mu)
        self._raw = stats.lognorm(s=self.sigma, scale=np.exp(self.mu))
        shift = float(np.exp(self.mu + 0.5 * self.sigma**2))
        super().__init__(shift=shift, lower=-shift, h_exponent=h_exponent)

    def _tail(self, x: np.ndarray) -> np.ndarray:
        return self._raw.sf(x + self.shift)

    def _excess_mean(self, y: np.ndarray) -> np.ndarray:
        t = y + self.shift
        log_t = np.log(np.where(t > 0, t, 1.0))
        d1 = (self.mu + self.sigma**2 - log_t) / self.sigma
        d2 = (self.mu - log_t) / self.sigma
        inside = self.shift * stats.norm.cdf(d1) - t * stats.norm.cdf(d2)
        return np.where(t > 0, np.maximum(inside, 0.0), -y)

    def _density(self, x: np.ndarray) -> np.ndarray:
        return self._raw.pdf(x + self.shift)

    def _quantile(self, p: float) -> float:
        return float(self._raw.isf(p)) - self.shift

    def _draw(self, rng: np.random.Generator, size: Optional[int]) -> ArrayLike:
        return rng.lognormal(self.mu, self.sigma, size)

    def _default_h_exponent(self) -> float:
        return 0.5

    def params(self) -> dict[str, Any]:
        return {"sigma": self.sigma, "mu": self.mu}

    def is_heavy_tailed(self) -> bool:
        return True


class WeibullLaw(IncrementLaw):
    """Mean-zero Weibull with tail exp(-(t/scale)^gamma), heavy for gamma < 1."""

    family = "weibull"

    def __init__(self, gamma: float, scale: float = 1.0, h_exponent: Optional[float] = None):
        if not 0 < gamma < 1:
            raise ParameterOutOfRange(f"Weibull shape must lie in (0, 1), got {gamma}")
        if scale <= 0:
            raise ParameterOutOfRange(f"Weibull scale must be positive, got {scale}")
        self.gamma = float(gamma)
        self.scale = float(scale)
        shift = self.scale * special.gamma(1.0 + 1.0 / self.gamma)
        super().__init__(shift=shift, lower=-shift, h_exponent=h_exponent)

    def _u(self, x: np.ndarray) -> np.ndarray:
        return (np.maximum(x + self.shift, 0.0) / self.scale) ** self.gamma

    def _tail(self, x: np.ndarray) -> np.ndarray:
        return np.exp(-self._u(x))

    def _excess_mean(self, y: np.ndarray) -> np.ndarray:
        inside = self.shift * special.gammaincc(1.0 / self.gamma, self._u(y))
        return np.where(y >= self.lower, inside, -y)

    def _density(self, x: np.ndarray) -> np.ndarray:
        t = x + self.shift
        safe = np.where(t > 0, t, 1.0)
        dens = self.gamma / self.scale * (safe / self.scale) ** (self.gamma - 1.0)
        return np.where(t > 0, dens * np.exp(-self._u(x)), 0.0)

    def _quantile(self, p: float) -> float:
        return self.scale * (-np.log(p)) ** (1.0 / self.gamma) - self.shift

    def _draw(self, rng: np.random.Generator, size: Optional[int]) -> ArrayLike:
        return self.scale * rng.weibull(self.gamma, size)

    def _default_h_exponent(self) -> float:
        return min((1.0 - self.gamma) / 2.0, 0.2)

    def params(self) -> dict[str, Any]:
        return {"gamma": self.gamma, "scale": self.scale}

    def is_heavy_tailed(self) -> bool:
        return True


class ExponentialLaw(IncrementLaw):
    """Light-tailed control: xi = Exp(rate) - 1/rate."""

    family = "exponential"

    def __init__(self, rate: float = 1.0):
        if rate <= 0:
            raise ParameterOutOfRange(f"Exponential rate must be positive, got {rate}")
        self.rate = float(rate)
        super().__init__(shift=1.0 / self.rate, lower=-1.0 / self.rate)

    def _tail(self, x: np.ndarray) -> np.ndarray:
        return np.exp(-self.rate * np.maximum(x + self.shift, 0.0))

    def _excess_mean(self, y: np.ndarray) -> np.ndarray:
        return np.where(y >= self.lower, self._tail(y) / self.rate, -y)

    def _density(self, x: np.ndarray) -> np.ndarray:
        return np.where(x >= self.lower, self.rate * self._tail(x), 0.0)

    def _quantile(self, p: float) -> float:
        return -np.log(p) / self.rate - self.shift

    def _draw(self, rng: np.random.Generator, size: Optional[int]) -> ArrayLike:
        return rng.exponential(1.0 / self.rate, size)

    def _default_h_exponent(self) -> float:
        raise NotLongTailed("exponential control has no insensitivity scale")

    def params(self) -> dict[str, Any]:
        return {"rate": self.rate}

    def is_heavy_tailed(self) -> bool:
        return False


class LatticeLaw(IncrementLaw):
    """
    Finitely supported law with exact rational masses.

    If the supplied atoms do not have mean zero they are shifted by their mean,
    which keeps the arithmetic exact.

    Args:
        atoms: Mapping value -> mass; masses must sum to exactly 1

    Example:
        >>> law = LatticeLaw({-1: Fraction(2, 3), 2: Fraction(1, 3)})
        >>> law.tail(0)
        0.3333333333333333
    """

    family = "lattice"
    is_lattice = True

    def __init__(self, atoms: dict[Any, Any]):
        if not atoms:
            raise ParameterOutOfRange("Lattice law needs at least one atom")
        exact = {Fraction(v): Fraction(p) for v, p in atoms.items()}
        if any(p < 0 for p in exact.values()):
            raise ParameterOutOfRange(f"Lattice masses must be non-negative, got {atoms}")
        total = sum(exact.values())
        if total != 1:
            raise ParameterOutOfRange(f"Lattice masses must sum to 1, got {total}")
        raw_mean = sum(v * p for v, p in exact.items())
        self.raw_atoms = exact
        self.exact_shift = raw_mean
        self.atoms = sorted((v - raw_mean, p) for v, p in exact.items() if p > 0)
        self._values = np.array([float(v) for v, _ in self.atoms])
        self._masses = np.array([float(p) for _, p in self.atoms])
        super().__init__(shift=float(raw_mean), lower=float(self.atoms[0][0]))

    def tail_exact(self, x: Fraction) -> Fraction:
        return sum((p for v, p in self.atoms if v > x), Fraction(0))

    def positive_mean_exact(self) -> Fraction:
        return sum((v * p for v, p in self.atoms if v > 0), Fraction(0))

    def mean(self) -> float:
        return float(sum(v * p for v, p in self.atoms))

    def _tail(self, x: np.ndarray) -> np.ndarray:
        return (self._masses * (self._values > x[..., None])).sum(axis=-1)

    def _excess_mean(self, y: np.ndarray) -> np.ndarray:
        return (self._masses * np.maximum(self._values - y[..., None], 0.0)).sum(axis=-1)

    def _density(self, x: np.ndarray) -> np.ndarray:
        raise ParameterOutOfRange("lattice law has no density")

    def _quantile(self, p: float) -> float:
        for v, _ in self.atoms:
            if self.tail_exact(v) <= p:
                return float(v)
        return float(self.atoms[-1][0])

    def _draw(self, rng: np.random.Generator, size: Optional[int]) -> ArrayLike:
        idx = rng.choice(len(self._values), size=size, p=self._masses)
        return self._values[idx] + self.shift

    def _default_h_exponent(self) -> float:
        raise NotLongTailed("lattice law is bounded")

    def is_long_tailed(self) -> bool:
        return False

    def params(self) -> dict[str, Any]:
        return {"atoms": {str(v): str(p) for v, p in self.raw_atoms.items()}}

    def is_heavy_tailed(self) -> bool:
        return False


_FAMILIES: dict[str, type[IncrementLaw]] = {
    "pareto": ParetoLaw,
    "lognormal": LognormalLaw,
    "weibull": WeibullLaw,
    "exponential": ExponentialLaw,
    "lattice": LatticeLaw,
}


def law_from_spec(spec: dict[str, Any]) -> IncrementLaw:
    """
    Build an increment law from its config block.

    The ``shift`` key written by ``to_spec`` is informational and ignored; the
    shift is always recomputed from the shape parameters.

    Example:
        >>> law_from_spec({"family": "pareto", "beta": 2.0})
        ParetoLaw(beta=2.0, scale=1.0)
    """
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError(f"Law spec must be a mapping with a 'family' key, got {spec!r}")
    params = {k: v for k, v in spec.items() if k not in ("family", "shift")}
    family = spec["family"]
    if family not in _FAMILIES:
        raise ConfigError(f"Unknown law family {family!r}; choose from {sorted(_FAMILIES)}")
    if family == "lattice":
        atoms = params.get("atoms")
        if not isinstance(atoms, dict):
            raise ConfigError("Lattice law needs an 'atoms' mapping value -> mass")
        return LatticeLaw({Fraction(str(v)): Fraction(str(p)) for v, p in atoms.items()})
    try:
        return _FAMILIES[family](**params)
    except TypeError as e:
        raise ConfigError(f"Bad parameters for {family} law: {e}") from e

"""Unit tests for H-series weights and closed-form asymptotics."""

import math

import numpy as np
import pytest

from fading_brw.analysis import (
    EmpiricalWeights,
    HSeriesSpec,
    IndependentWeights,
    beta_function,
    example2_constant,
    example2_integral,
    expected_eta,
    h_series,
    theorem2_limit,
    veraverbeke_limit,
)
from fading_brw.branching import ConstantTail, Environment, OffspringLaw
from fading_brw.distributions import ParetoLaw
from fading_brw.exceptions import NonFadingEnvironment, NonSummable, ParameterOutOfRange
from fading_brw.walk import (
    Boundary,
    FadingTime,
    Fixed,
    FirstPassageBelow,
    GeometricMu,
    IndependentLaw,
    PowerMu,
)


@pytest.fixture
def doubling_env():
    return Environment([OffspringLaw({2: 1})])


class TestIndependentWeights:
    """Tests for analytic weights."""

    def test_fixed_values(self, doubling_env):
        """Test w_n = E Z_n for n <= N and zero afterwards."""
        weights = IndependentWeights(doubling_env, Fixed(3))

        assert weights.bound == 3
        assert weights.envelope == pytest.approx(2.0)
        assert weights.values(1, 6) == pytest.approx([2.0, 2.0, 2.0, 0.0, 0.0])
        assert weights.tail_mass(1) == pytest.approx(4.0)
        assert weights.total() == pytest.approx(6.0)

    def test_geometric_total(self, doubling_env):
        """Test E eta = 2 sum_n 2^-(n-1) = 4."""
        weights = IndependentWeights(doubling_env, IndependentLaw(GeometricMu(0.5)))

        assert weights.bound is None
        assert weights.total() == pytest.approx(4.0, rel=1e-9)

    def test_divergent_total(self, doubling_env):
        """Test E mu = inf gives an infinite total."""
        weights = IndependentWeights(doubling_env, IndependentLaw(PowerMu(1.0, 0.5)))

        assert weights.total() == math.inf

    def test_rejects_tree_dependent_rule(self, doubling_env):
        """Test mu = nu needs estimated weights."""
        with pytest.raises(ParameterOutOfRange):
            IndependentWeights(doubling_env, FadingTime())

    def test_rejects_non_fading(self):
        """Test a non-fading environment has no finite envelope."""
        with pytest.raises(NonFadingEnvironment):
            IndependentWeights(Environment(tail=ConstantTail(0.2)), Fixed(3))


class TestEmpiricalWeights:
    """Tests for simulated weights."""

    def test_bound_from_zero_remainder(self):
        """Test the last positive estimate bounds mu when nothing remains."""
        weights = EmpiricalWeights(np.array([2.0, 2.0, 0.0]), np.zeros(3), 2.0, 0.0)

        assert weights.bound == 2
        assert weights.values(1, 5) == pytest.approx([2.0, 2.0, 0.0, 0.0])
        assert weights.tail_mass(1) == pytest.approx(2.0)
        assert weights.total() == pytest.approx(4.0)

    def test_remainder_added(self):
        """Test the remainder enters tail mass and total."""
        weights = EmpiricalWeights([1.0, 0.5], [0.1, 0.05], 2.0, 0.25)

        assert weights.bound is None
        assert weights.tail_mass(5) == 0.25
        assert weights.total() == pytest.approx(1.75)
        assert weights.errors(2, 4) == pytest.approx([0.05, 0.0])

    def test_shape_mismatch(self):
        """Test estimates and standard errors must align."""
        with pytest.raises(ParameterOutOfRange):
            EmpiricalWeights([1.0, 0.5], [0.1], 2.0, 0.0)


class TestHSeries:
    """Tests for H-series evaluation."""

    def test_finite_sum(self, doubling_env):
        """Test a fixed time gives the exact finite sum."""
        law = ParetoLaw(2.0)
        spec = HSeriesSpec(IndependentWeights(doubling_env, Fixed(3)), Boundary.linear(1.0), law)
        result = h_series(spec, 8.0)

        expected = 2.0 * sum((8.0 + n + 2.0) ** -2 for n in (1, 2, 3))
        assert result.method == "finite"
        assert result.value == pytest.approx(expected)
        assert result.error_bound == 0.0

    def test_fixed_zero(self, doubling_env):
        """Test mu = 0 gives an empty series."""
        spec = HSeriesSpec(
            IndependentWeights(doubling_env, Fixed(0)), Boundary.linear(1.0), ParetoLaw(2.0)
        )

        assert h_series(spec, 5.0).value == 0.0

    def test_truncated_geometric(self, doubling_env):
        """Test the truncated series against a long direct sum."""
        law = ParetoLaw(2.0)
        rule = IndependentLaw(GeometricMu(0.5))
        spec = HSeriesSpec(IndependentWeights(doubling_env, rule), Boundary.linear(1.0), law)
        result = h_series(spec, 10.0)

        n = np.arange(1, 400)
        direct = float(np.sum(2.0 * 0.5 ** (n - 1) * (10.0 + n + 2.0) ** -2.0))
        assert result.method == "truncated"
        assert result.value == pytest.approx(direct, rel=1e-3)
        assert result.error_bound <= 1e-4 * result.value

    def test_estimated_weights_carry_stat_error(self):
        """Test standard errors of estimated weights propagate."""
        weights = EmpiricalWeights([2.0, 2.0], [0.1, 0.2], 2.0, 0.0)
        law = ParetoLaw(2.0)
        result = h_series(HSeriesSpec(weights, Boundary.linear(0.0), law), 8.0)

        assert result.value == pytest.approx(4.0 * 0.01)
        assert result.stat_error == pytest.approx(0.3 * 0.01)

    def test_non_summable(self, doubling_env):
        """Test flat boundary with infinite weight mass."""
        rule = IndependentLaw(PowerMu(1.0, 0.5))
        spec = HSeriesSpec(
            IndependentWeights(doubling_env, rule), Boundary.linear(0.0), ParetoLaw(2.0)
        )

        with pytest.raises(NonSummable):
            h_series(spec, 10.0)


class TestClosedForms:
    """Tests for the closed-form limits."""

    def test_infinite_horizon_limit(self):
        """Test (L/c) F̄_I(x) = 2 / 12 for Pareto beta = 2 at x = 10."""
        assert veraverbeke_limit(2.0, 1.0, ParetoLaw(2.0), 10.0) == pytest.approx(1 / 6)

    def test_infinite_horizon_needs_drift(self):
        """Test c <= 0 and infinite L are rejected."""
        with pytest.raises(ParameterOutOfRange):
            veraverbeke_limit(2.0, 0.0, ParetoLaw(2.0), 10.0)
        with pytest.raises(ParameterOutOfRange):
            veraverbeke_limit(math.inf, 1.0, ParetoLaw(2.0), 10.0)

    def test_random_time_limit(self):
        """Test E eta F̄(x)."""
        assert theorem2_limit(6.0, ParetoLaw(2.0), 8.0) == pytest.approx(0.06)
        with pytest.raises(ParameterOutOfRange):
            theorem2_limit(-1.0, ParetoLaw(2.0), 8.0)

    def test_beta_function(self):
        """Test B(2, 3) = 1/12."""
        assert beta_function(2.0, 3.0) == pytest.approx(1 / 12)
        with pytest.raises(ParameterOutOfRange):
            beta_function(0.0, 1.0)

    def test_power_example_constant(self):
        """Test C = B(1/2, 2) = 4/3 and exponent -2 for alpha = 1/2, beta = 5/2."""
        constant, exponent = example2_constant(0.5, 2.5, 1.0)

        assert constant == pytest.approx(4 / 3)
        assert exponent == pytest.approx(-2.0)

    def test_power_example_scaling(self):
        """Test the constant scales with K1 K2 c^(alpha - 1)."""
        base, _ = example2_constant(0.5, 2.5, 1.0)
        scaled, _ = example2_constant(0.5, 2.5, 4.0, k1=2.0, k2=3.0)

        assert scaled == pytest.approx(base * 6.0 * 4.0**-0.5)

    @pytest.mark.parametrize(
        "alpha,beta,c", [(0.5, 2.5, 1.0), (0.3, 2.0, 2.0), (0.8, 1.5, 0.5)]
    )
    def test_integral_matches_constant(self, alpha, beta, c):
        """Test quadrature agrees with C x^(1-alpha-beta) to 1e-5."""
        x = 100.0
        constant, exponent = example2_constant(alpha, beta, c)
        integral = example2_integral(alpha, beta, c, x)

        assert integral == pytest.approx(constant * x**exponent, rel=1e-5)

    def test_power_example_ranges(self):
        """Test alpha outside (0, 1) and beta <= 1 are rejected."""
        with pytest.raises(ParameterOutOfRange):
            example2_constant(1.0, 2.5, 1.0)
        with pytest.raises(ParameterOutOfRange):
            example2_constant(0.5, 1.0, 1.0)
        with pytest.raises(ParameterOutOfRange):
            example2_integral(0.5, 2.5, 1.0, 0.0)


class TestExpectedEta:
    """Tests for E eta_mu."""

    def test_analytic_fixed(self, doubling_env):
        """Test E eta_3 = 6 for the doubling environment."""
        result = expected_eta(doubling_env, Fixed(3))

        assert result.value == pytest.approx(6.0)
        assert result.se == 0.0
        assert result.method == "analytic"

    def test_simulated_fading_time(self, doubling_env):
        """Test mu = nu = 1 gives eta = Z_1 = 2 surely."""
        result = expected_eta(doubling_env, FadingTime(), n_runs=50, rng=np.random.default_rng(3))

        assert result.method == "simulated"
        assert result.value == pytest.approx(2.0)
        assert result.se == pytest.approx(0.0)

    def test_online_rule_rejected(self, doubling_env):
        """Test increment-dependent rules need walk simulation."""
        with pytest.raises(ParameterOutOfRange):
            expected_eta(doubling_env, FirstPassageBelow(a=1.0, c=1.0))


class TestHSeriesProperties:
    """Tests for bracketing, limits, symmetry and the integral closure of the H-series."""

    def test_integral_tail_matches_power_example(self, doubling_env):
        """Test the integral closure reproduces L C x^(1-alpha-beta) at x = 10^6."""
        law = ParetoLaw(2.0)
        rule = IndependentLaw(PowerMu(1.0, 0.5))
        spec = HSeriesSpec(IndependentWeights(doubling_env, rule), Boundary.linear(1.0), law)
        x = 1e6
        result = h_series(spec, x)

        constant, exponent = example2_constant(0.5, 2.0, 1.0, law.tail_constant, 1.0)
        assert result.method == "integral_tail"
        assert result.value == pytest.approx(2.0 * constant * x**exponent, rel=0.01)
        assert result.error_bound <= 0.01 * result.value

    def test_bounded_mu_bracket(self):
        """Test w_max F̄(x + g(N)) <= H <= (sum w) F̄(x + g(1)) for a bounded mu."""
        env = Environment([OffspringLaw({2: 1}), OffspringLaw({1: 0.5, 3: 0.5})])
        law, g = ParetoLaw(2.0), Boundary.linear(1.5)
        weights = IndependentWeights(env, Fixed(4))
        w = weights.values(1, 5)

        for x in (1.0, 10.0, 100.0):
            value = h_series(HSeriesSpec(weights, g, law), x).value
            assert w.max() * law.tail(x + g(4)) <= value <= w.sum() * law.tail(x + g(1))

    def test_ratio_to_random_time_limit(self, doubling_env):
        """Test H / (E eta F̄(x)) tends to one with a shrinking deviation."""
        law = ParetoLaw(2.0)
        spec = HSeriesSpec(IndependentWeights(doubling_env, Fixed(3)), Boundary.linear(1.0), law)
        grid = [1e2, 1e3, 1e4, 1e5]
        deviations = [abs(h_series(spec, x).value / theorem2_limit(6.0, law, x) - 1) for x in grid]

        assert all(a > b for a, b in zip(deviations, deviations[1:]))
        assert deviations[-1] < 1e-3

    def test_permutation_invariance(self):
        """Test permuting generations with equal boundary values leaves H unchanged."""
        law = ParetoLaw(2.0)
        estimates = np.array([2.0, 1.5, 0.5, 3.0, 1.0])
        rng = np.random.default_rng(2)
        flat = Boundary.linear(0.0)
        weights = EmpiricalWeights(estimates, np.zeros(5), 3.0, 0.0)
        base = h_series(HSeriesSpec(weights, flat, law), 20.0).value

        for _ in range(5):
            shuffled = rng.permutation(estimates)
            weights = EmpiricalWeights(shuffled, np.zeros(5), 3.0, 0.0)
            value = h_series(HSeriesSpec(weights, flat, law), 20.0).value
            assert value == pytest.approx(base, rel=1e-12)

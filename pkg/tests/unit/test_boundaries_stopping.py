"""Unit tests for boundaries, stopping rules and their certificates."""

import math

import numpy as np
import pytest

from fading_brw.branching import Environment, GeometricTail, OffspringLaw, PowerTail
from fading_brw.distributions import ExponentialLaw, ParetoLaw, WeibullLaw
from fading_brw.exceptions import ConfigError, NotRealizedWithinCap, ParameterOutOfRange
from fading_brw.walk import (
    Boundary,
    FadingTime,
    Fixed,
    FirstPassageBelow,
    GeometricMu,
    IndependentLaw,
    InfiniteHorizon,
    PowerMu,
    TabulatedMu,
    boundary_from_spec,
    light_tail_certificate,
    mu_z_certificate,
    realize_stop,
    stopping_from_spec,
)


class TestBoundary:
    """Tests for boundary evaluation and class checks."""

    def test_linear(self):
        """Test g(n) = c n with g(0) = 0."""
        g = Boundary.linear(1.5)

        assert g(0) == 0.0
        assert g(4) == 6.0
        assert g(np.arange(3)) == pytest.approx([0.0, 1.5, 3.0])
        assert g.class_slope() == 1.5

    def test_tabulated_continues_linearly(self):
        """Test the table is continued with its last increment."""
        g = Boundary.tabulated([1, 3, 6])

        assert g(3) == 6.0
        assert g(5) == 12.0
        assert g.class_slope() == 1.0

    def test_validate_class(self):
        """Test G_c membership and the first violation."""
        g = Boundary.tabulated([1, 3, 6])

        assert g.validate_class(1.0, 10).passed
        check = g.validate_class(2.5, 10)
        assert not check
        assert check.first_violation == 1

    def test_shifted(self):
        """Test g + a keeps g(0) = 0."""
        g = Boundary.linear(1.0).shifted(2.0)

        assert g(0) == 0.0
        assert g(1) == 3.0

    def test_negative_generation(self):
        """Test negative generations are rejected."""
        with pytest.raises(ParameterOutOfRange):
            Boundary.linear(1.0)(-1)

    def test_spec_round_trip(self):
        """Test to_spec rebuilds the same values."""
        g = Boundary.tabulated([0.5, 1.0, 3.0], tail_slope=2.0)
        rebuilt = boundary_from_spec(g.to_spec())

        assert rebuilt(np.arange(8)) == pytest.approx(g(np.arange(8)))

    def test_unknown_key(self):
        """Test unknown keys raise ConfigError."""
        with pytest.raises(ConfigError, match="Unknown boundary keys"):
            boundary_from_spec({"slope": 1.0, "curvature": 2.0})


class TestMuLaws:
    """Tests for laws of independent stopping times."""

    def test_geometric(self):
        """Test survival and E mu = 1/p."""
        law = GeometricMu(0.5)

        assert law.survival(np.array([1, 2, 3])) == pytest.approx([1.0, 0.5, 0.25])
        assert law.tail_mass(0) == pytest.approx(2.0)

    def test_power_tail_mass(self):
        """Test sum_n min(1, n^-2) = zeta(2) and divergence for alpha <= 1."""
        assert PowerMu(1.0, 2.0).tail_mass(0) == pytest.approx(math.pi**2 / 6)
        assert PowerMu(1.0, 0.5).tail_mass(0) == math.inf

    def test_power_samples_have_right_tail(self):
        """Test empirical P(mu >= 100) against K2 n^-alpha."""
        law = PowerMu(1.0, 0.5)
        rng = np.random.default_rng(9)
        draws = np.array([law.sample(rng) for _ in range(20_000)])
        p = np.mean(draws >= 100)
        se = math.sqrt(0.1 * 0.9 / draws.size)

        assert abs(p - 0.1) < 5 * se

    def test_tabulated(self):
        """Test a finite pmf."""
        law = TabulatedMu({1: 0.5, 3: 0.5})

        assert law.survival(np.array([1, 2, 4])) == pytest.approx([1.0, 0.5, 0.0])
        assert IndependentLaw(law).bound == 3

    def test_tabulated_rejects_bad_pmf(self):
        """Test pmf totals are checked."""
        with pytest.raises(ParameterOutOfRange):
            TabulatedMu({1: 0.5, 2: 0.4})


class TestStoppingRules:
    """Tests for rules, declared classes and realisation."""

    def test_capped_independent_law(self):
        """Test the cap truncates survival and tail mass."""
        rule = IndependentLaw(GeometricMu(0.5), cap=3)

        assert rule.bound == 3
        assert rule.survival(np.arange(1, 6)) == pytest.approx([1.0, 0.5, 0.25, 0.0, 0.0])
        assert rule.mean() == pytest.approx(1.75)

    def test_declared_class_checked(self):
        """Test a declared class inconsistent with the rule is rejected."""
        with pytest.raises(ConfigError):
            FirstPassageBelow(a=1.0, c=1.0).check_declared("HM")
        with pytest.raises(ConfigError):
            FadingTime().check_declared("MO")
        Fixed(3).check_declared("HM")
        Fixed(3).check_declared("MO")

    def test_from_spec(self):
        """Test config blocks for every kind."""
        assert stopping_from_spec({"kind": "fixed", "n": 5, "class": "BOTH"}).bound == 5
        rule = stopping_from_spec(
            {"kind": "independent", "law": {"family": "geometric", "p": 0.25}, "cap": 10}
        )
        assert isinstance(rule, IndependentLaw)
        assert rule.bound == 10
        assert isinstance(stopping_from_spec({"kind": "fading_time"}), FadingTime)
        assert stopping_from_spec({"kind": "infinite_horizon"}).eps_resid == 0.05

    def test_from_spec_errors(self):
        """Test unknown kinds and missing parameters."""
        with pytest.raises(ConfigError, match="Unknown stopping kind"):
            stopping_from_spec({"kind": "whenever"})
        with pytest.raises(ConfigError):
            stopping_from_spec({"kind": "fixed"})

    def test_spec_round_trip(self):
        """Test to_spec carries the kind, class and cap."""
        rule = FirstPassageBelow(a=2.0, c=0.5, cap=7)
        rebuilt = stopping_from_spec(rule.to_spec())

        assert rebuilt.to_spec() == rule.to_spec()
        assert rule.to_spec()["class"] == "MO"

    def test_realize_first_passage(self):
        """Test the first generation with r^c < -a."""
        rule = FirstPassageBelow(a=1.0, c=0.0)
        g = Boundary.linear(0.0)

        assert realize_stop(rule, fronts=[0.5, -2.0, 3.0], boundary=g) == 2

    def test_realize_first_passage_capped(self):
        """Test mu = N when the rule has not fired by the cap."""
        rule = FirstPassageBelow(a=1.0, c=0.0, cap=1)

        assert realize_stop(rule, fronts=[0.5, -2.0], boundary=Boundary.linear(0.0)) == 1

    def test_realize_not_fired(self):
        """Test an uncapped online rule that never fires."""
        rule = FirstPassageBelow(a=1.0, c=0.0)

        with pytest.raises(NotRealizedWithinCap):
            realize_stop(rule, fronts=[0.0, 1.0], boundary=Boundary.linear(0.0))

    def test_realize_decided_rules(self):
        """Test fixed, independent and infinite rules."""
        assert realize_stop(Fixed(4)) == 4
        assert realize_stop(InfiniteHorizon()) == math.inf
        mu = realize_stop(IndependentLaw(GeometricMu(0.5)), stop_rng=np.random.default_rng(1))
        assert mu >= 1

    def test_infinite_horizon_is_both(self):
        """Test mu = inf is declared independent of tree and increments."""
        rule = InfiniteHorizon()

        assert rule.independence_class == "BOTH"
        assert rule.to_spec()["class"] == "BOTH"
        rule.check_declared("HM")
        rule.check_declared("MO")

    def test_first_passage_ignores_future_fronts(self):
        """Test replacing fronts after mu leaves mu unchanged."""
        rule = FirstPassageBelow(a=1.0, c=0.5)
        g = Boundary.linear(0.5)
        head = [0.8, 1.2, 0.4, -1.3]
        mu = realize_stop(rule, fronts=head, boundary=g)
        rng = np.random.default_rng(11)

        assert mu == 4
        for _ in range(50):
            future = (10.0 * rng.standard_normal(6)).tolist()
            assert realize_stop(rule, fronts=head + future, boundary=g) == mu

    def test_fires_many_matches_fires(self):
        """Test the vectorised decision agrees with the scalar one."""
        rule = FirstPassageBelow(a=0.5, c=1.0)
        g = Boundary.tabulated([0.5, 2.0, 2.5])
        gens = np.arange(1, 7)
        fronts = np.array([0.2, -1.0, 0.4, -3.0, -1.6, 2.0])

        expected = [rule.fires(int(n), float(f), g) for n, f in zip(gens, fronts)]
        assert rule.fires_many(gens, fronts, g).tolist() == expected


class TestCertificates:
    """Tests for E(mu Z_mu) and light-tailed mu certificates."""

    def test_bounded_mu(self):
        """Test N E Z_N for a fixed time."""
        env = Environment([OffspringLaw({2: 1})])
        cert = mu_z_certificate(env, Fixed(3))

        assert cert.holds is True
        assert cert.bound == pytest.approx(6.0)

    def test_independent_and_fading_time(self):
        """Test L E mu and the Hölder route on a geometric environment."""
        env = Environment(tail=GeometricTail(0.5, 0.5))

        cert = mu_z_certificate(env, IndependentLaw(GeometricMu(0.5)))
        assert cert.holds is True
        assert cert.bound == pytest.approx(2.0 * env.fading_product())
        assert mu_z_certificate(env, FadingTime()).holds is True

    def test_heavy_fading_time_fails(self):
        """Test E nu^2 = inf defeats the Hölder certificate."""
        env = Environment(tail=PowerTail(q0=1.0, p=1.0, k=2.0, n0=3))

        assert mu_z_certificate(env, FadingTime()).holds is False

    def test_undecided_online_rule(self):
        """Test uncapped first passage is undecided."""
        env = Environment(tail=GeometricTail(0.5, 0.5))

        assert mu_z_certificate(env, FirstPassageBelow(a=1.0, c=1.0)).holds is None

    def test_light_tail_certificate(self):
        """Test decay comparisons against the increment tail."""
        geometric = IndependentLaw(GeometricMu(0.5))

        assert light_tail_certificate(geometric, ParetoLaw(2.0)).holds
        assert light_tail_certificate(Fixed(5), ParetoLaw(2.0)).holds
        assert not light_tail_certificate(geometric, ExponentialLaw(1.0)).holds
        assert not light_tail_certificate(IndependentLaw(PowerMu(1.0, 0.5)), ParetoLaw(2.0)).holds
        assert not light_tail_certificate(geometric, WeibullLaw(0.5)).holds

    def test_fading_time_decay(self):
        """Test nu decays geometrically on a geometric environment."""
        env = Environment(tail=GeometricTail(0.5, 0.5))
        decay = FadingTime().decay(env)

        assert decay.kind == "exponential"
        assert decay.rate == pytest.approx(math.log(2.0))

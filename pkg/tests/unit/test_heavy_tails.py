"""Unit tests for increment laws and class diagnostics."""

from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from fading_brw.distributions import (
    ExponentialLaw,
    LatticeLaw,
    LognormalLaw,
    ParetoLaw,
    WeibullLaw,
    check_class_membership,
    convolution_tail,
    law_from_spec,
)
from fading_brw.distributions.classes import CONSISTENT, INCONCLUSIVE, INCONSISTENT
from fading_brw.exceptions import (
    ConfigError,
    NotLongTailed,
    ParameterOutOfRange,
    UnboundedPositiveMean,
)

HEAVY_FAMILIES = [ParetoLaw(2.0), LognormalLaw(1.0), WeibullLaw(0.5)]


class TestParetoLaw:
    """Tests for the shifted Pareto law."""

    def test_tail_and_integrated_tail(self):
        """Test closed forms: F̄(x) = (x+2)^-2 and F̄_I(x) = (x+2)^-1 for beta = 2."""
        law = ParetoLaw(2.0)

        assert law.tail(0.0) == pytest.approx(0.25)
        assert law.tail(8.0) == pytest.approx(0.01)
        assert law.integrated_tail(8.0) == pytest.approx(0.1)
        assert law.tail(-5.0) == 1.0

    def test_tail_is_vectorised(self):
        """Test array input keeps its shape."""
        law = ParetoLaw(2.0)
        values = law.tail(np.array([0.0, 8.0, 98.0]))

        assert values.shape == (3,)
        assert values == pytest.approx([0.25, 0.01, 1e-4])

    def test_mean_zero(self):
        """Test the location shift makes E xi = 0."""
        assert ParetoLaw(2.5).mean() == pytest.approx(0.0, abs=1e-7)

    def test_quantile_inverts_tail(self):
        """Test quantile(p) is the level with F̄ = p."""
        law = ParetoLaw(2.0)

        assert law.quantile(0.01) == pytest.approx(8.0)
        assert law.tail(law.quantile(1e-4)) == pytest.approx(1e-4)

    def test_quantile_rejects_bad_probability(self):
        """Test p outside (0, 1) is rejected."""
        with pytest.raises(ParameterOutOfRange):
            ParetoLaw(2.0).quantile(1.5)

    def test_infinite_mean_rejected(self):
        """Test beta <= 1 gives an unbounded positive mean."""
        with pytest.raises(UnboundedPositiveMean):
            ParetoLaw(1.0)

    def test_insensitivity_exponent_override(self):
        """Test the default exponent and an explicit override."""
        assert ParetoLaw(2.0).insensitivity_exponent() == 0.5
        law = ParetoLaw(2.0, h_exponent=0.3)

        assert law.insensitivity_scale(100.0) == pytest.approx(100.0**0.3)
        assert law.insensitivity_scale(0.5) == pytest.approx(1.0)

    def test_sample_mean_is_zero(self):
        """Test sample mean within 5 standard errors of zero (beta = 3 has finite variance)."""
        law = ParetoLaw(3.0)
        draws = law.sample(np.random.default_rng(7), 200_000)
        se = np.sqrt(0.75 / draws.size)

        assert abs(draws.mean()) < 5 * se

    def test_sample_tail_matches(self):
        """Test empirical P(xi > q) at the 1% quantile."""
        law = ParetoLaw(2.0)
        draws = law.sample(np.random.default_rng(11), 100_000)
        frac = np.mean(draws > law.quantile(0.01))
        se = np.sqrt(0.01 * 0.99 / draws.size)

        assert abs(frac - 0.01) < 4 * se

    def test_scalar_sample(self):
        """Test size=None returns a float."""
        value = ParetoLaw(2.0).sample(np.random.default_rng(0))

        assert isinstance(value, float)


class TestOtherFamilies:
    """Tests for lognormal, Weibull and exponential laws."""

    @pytest.mark.parametrize(
        "law", [LognormalLaw(1.0), WeibullLaw(0.5), ParetoLaw(2.0), ExponentialLaw(1.0)]
    )
    def test_mean_zero(self, law):
        """Test every family is centred."""
        assert law.mean() == pytest.approx(0.0, abs=1e-6)

    @pytest.mark.parametrize("law", [LognormalLaw(1.0), WeibullLaw(0.5), ParetoLaw(2.0)])
    def test_heavy_tailed(self, law):
        """Test heavy-tailed families report as such."""
        assert law.is_heavy_tailed()
        assert 0 < law.insensitivity_exponent() < 1

    def test_exponential_control_not_long_tailed(self):
        """Test the light-tailed control has no insensitivity scale."""
        law = ExponentialLaw(1.0)

        assert not law.is_heavy_tailed()
        with pytest.raises(NotLongTailed):
            law.insensitivity_scale(10.0)

    def test_weibull_shape_range(self):
        """Test Weibull shape must lie in (0, 1)."""
        with pytest.raises(ParameterOutOfRange):
            WeibullLaw(1.5)

    def test_integrated_tail_capped_at_one(self):
        """Test F̄_I(x) = min(1, E(xi - x)^+)."""
        law = ParetoLaw(1.5)

        assert law.integrated_tail(-0.9) == 1.0
        assert law.excess_mean(-0.9) > 1.0


class TestTailShape:
    """Tests for sampler agreement and the shape of tails on a wide grid."""

    @pytest.mark.parametrize("law", HEAVY_FAMILIES + [ExponentialLaw(1.0)])
    def test_samples_match_cdf(self, law):
        """Test 10^5 draws pass a Kolmogorov-Smirnov test against the cdf at 1%."""
        draws = law.sample(np.random.default_rng(20), 100_000)

        assert stats.kstest(draws, law.cdf).pvalue > 0.01

    @pytest.mark.parametrize("law", HEAVY_FAMILIES)
    def test_tail_non_increasing(self, law):
        """Test F̄(x + 1) <= F̄(x) on [0, 10^8]."""
        grid = np.concatenate([[0.0], np.logspace(0, 8, 81)])

        assert np.all(law.tail(grid + 1.0) <= law.tail(grid))

    @pytest.mark.parametrize("law", HEAVY_FAMILIES)
    def test_integrated_tail_convex_decreasing(self, law):
        """Test secant slopes of F̄_I are non-positive and non-decreasing below the cap."""
        grid = np.logspace(0, 8, 81)
        values = np.asarray(law.integrated_tail(grid))
        slopes = np.diff(values) / np.diff(grid)

        assert np.all(values < 1.0)
        assert np.all(slopes <= 0.0)
        assert np.all(np.diff(slopes) >= -1e-9 * np.abs(slopes[:-1]))

    def test_pareto_tail_to_integrated_tail_ratio(self):
        """Test F̄(x) / F̄_I(x) = 1 / (x + 2) decreases and is below 0.1 at 10^6."""
        law = ParetoLaw(2.0)
        grid = np.logspace(0, 8, 41)
        ratio = law.tail(grid) / law.integrated_tail(grid)

        assert np.all(np.diff(ratio) < 0)
        assert ratio == pytest.approx(1.0 / (grid + 2.0))
        assert law.tail(1e6) / law.integrated_tail(1e6) < 0.1


class TestLatticeLaw:
    """Tests for the exact lattice law."""

    def test_exact_masses(self):
        """Test exact tail and positive mean of {-1: 2/3, 2: 1/3}."""
        law = LatticeLaw({-1: Fraction(2, 3), 2: Fraction(1, 3)})

        assert law.mean() == 0.0
        assert law.tail_exact(Fraction(0)) == Fraction(1, 3)
        assert law.tail_exact(Fraction(2)) == 0
        assert law.positive_mean_exact() == Fraction(2, 3)
        assert law.tail(0.0) == pytest.approx(1 / 3)

    def test_recentres_atoms(self):
        """Test atoms with non-zero mean are shifted exactly."""
        law = LatticeLaw({0: Fraction(1, 2), 2: Fraction(1, 2)})

        assert [v for v, _ in law.atoms] == [Fraction(-1), Fraction(1)]

    def test_masses_must_sum_to_one(self):
        """Test inexact totals are rejected."""
        with pytest.raises(ParameterOutOfRange):
            LatticeLaw({-1: Fraction(1, 2), 1: Fraction(1, 3)})

    def test_not_long_tailed(self):
        """Test bounded support has no insensitivity scale."""
        law = LatticeLaw({-1: Fraction(1, 2), 1: Fraction(1, 2)})

        assert law.is_lattice
        assert not law.is_long_tailed()
        with pytest.raises(NotLongTailed):
            law.insensitivity_exponent()

    def test_samples_on_support(self):
        """Test samples only take atom values."""
        law = LatticeLaw({-1: Fraction(2, 3), 2: Fraction(1, 3)})
        draws = law.sample(np.random.default_rng(3), 1000)

        assert set(np.round(draws, 12)) <= {-1.0, 2.0}


class TestLawFromSpec:
    """Tests for config-block parsing."""

    def test_pareto_round_trip(self):
        """Test to_spec rebuilds the same law."""
        law = ParetoLaw(2.5, scale=2.0)
        rebuilt = law_from_spec(law.to_spec())

        assert isinstance(rebuilt, ParetoLaw)
        assert rebuilt.tail(10.0) == pytest.approx(law.tail(10.0))

    def test_lattice_from_strings(self):
        """Test lattice atoms given as strings are parsed exactly."""
        law = law_from_spec({"family": "lattice", "atoms": {"-1": "2/3", "2": "1/3"}})

        assert law.tail_exact(Fraction(0)) == Fraction(1, 3)

    def test_unknown_family(self):
        """Test an unknown family raises ConfigError."""
        with pytest.raises(ConfigError, match="Unknown law family"):
            law_from_spec({"family": "cauchy"})

    def test_bad_parameters(self):
        """Test unexpected keyword arguments raise ConfigError."""
        with pytest.raises(ConfigError):
            law_from_spec({"family": "pareto", "alpha": 2.0})


class TestClassMembership:
    """Tests for the L, S and S* ratio diagnostics."""

    def test_pareto_long_tailed(self):
        """Test F̄(x+1)/F̄(x) -> 1 for Pareto."""
        report = check_class_membership(ParetoLaw(2.0), "L", [1e2, 1e3, 1e4])

        assert report.verdict == CONSISTENT
        assert report.ratios[-1] == pytest.approx(1.0, abs=1e-3)

    def test_exponential_not_long_tailed(self):
        """Test the exponential ratio stays at e^-1."""
        report = check_class_membership(ExponentialLaw(1.0), "L", [10.0, 20.0, 30.0])

        assert report.verdict == INCONSISTENT
        assert report.ratios[-1] == pytest.approx(np.exp(-1.0))

    def test_pareto_subexponential_ratio(self):
        """Test the convolution ratio approaches 2."""
        report = check_class_membership(ParetoLaw(2.0), "S", [1e2, 1e3, 1e4])

        assert report.ratios[-1] == pytest.approx(2.0, rel=0.05)

    def test_short_grid_inconclusive(self):
        """Test fewer than three points give an inconclusive verdict."""
        report = check_class_membership(ParetoLaw(2.0), "L", [10.0, 20.0])

        assert report.verdict == INCONCLUSIVE

    def test_lattice_convolution_exact(self):
        """Test the lattice convolution tail P(xi1 + xi2 > 0) = 5/9."""
        law = LatticeLaw({-1: Fraction(2, 3), 2: Fraction(1, 3)})

        assert convolution_tail(law, 0.0) == pytest.approx(5 / 9)

    def test_report_frame(self):
        """Test the report table has one row per grid point."""
        report = check_class_membership(ParetoLaw(2.0), "L", [1e2, 1e3, 1e4])
        frame = report.to_frame()

        assert list(frame.columns) == ["class", "x", "ratio", "limit", "deviation"]
        assert len(frame) == 3

    def test_exponential_not_subexponential(self):
        """Test the convolution ratio (x + 3) / e grows past 2."""
        report = check_class_membership(ExponentialLaw(1.0), "S", [5.0, 10.0, 20.0])

        assert report.verdict == INCONSISTENT
        assert report.ratios[-1] == pytest.approx(23.0 / np.e, rel=1e-4)

    def test_exponential_not_strong_subexponential(self):
        """Test the S* ratio x / 2 grows away from one."""
        report = check_class_membership(ExponentialLaw(1.0), "S*", [5.0, 10.0, 20.0])

        assert report.verdict == INCONSISTENT
        assert report.ratios[-1] == pytest.approx(10.0, rel=1e-4)

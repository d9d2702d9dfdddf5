"""Unit tests for configuration, verdicts, reports, suites and the CLI."""

import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from fading_brw.branching import ConstantTail, Environment, GeometricTail, OffspringLaw, PowerTail
from fading_brw.cli import build_parser, main
from fading_brw.distributions import ExponentialLaw, LognormalLaw, ParetoLaw
from fading_brw.exceptions import ConfigError, HypothesisViolation, ParameterOutOfRange
from fading_brw.harness import (
    COMPLETE,
    FAIL,
    OUTSIDE_HYPOTHESES,
    PASS,
    ExperimentConfig,
    SuiteReport,
    battery_verdict,
    fitted_slope,
    load_config,
    run_command,
    trend_verdict,
    write_report,
)
from fading_brw.utils import save_json

DOUBLING = Environment([OffspringLaw({2: 1})]).to_spec()
LATTICE = {"family": "lattice", "atoms": {"-1": "2/3", "2": "1/3"}}
CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"


def ratio_table(ratios, ratio_se=0.01):
    return pd.DataFrame(
        {
            "x": np.arange(1, len(ratios) + 1) * 10.0,
            "ratio": ratios,
            "ratio_se": [ratio_se] * len(ratios),
        }
    )


@pytest.fixture
def enumeration_config():
    return ExperimentConfig(
        law=LATTICE,
        environment=DOUBLING,
        boundary={"slope": 0.0},
        stopping={"kind": "fixed", "n": 2},
        x_grid=[0.0],
        n_runs=4000,
        mode="crude",
        seed=5,
        workers=1,
        options={"dump_nodes": True},
    )


class TestVerdicts:
    """Tests for verdicts computed from result tables."""

    def test_trend_pass(self):
        """Test a ratio settling into the band."""
        assert trend_verdict(ratio_table([0.5, 0.8, 0.95, 1.02])) == PASS

    def test_trend_out_of_band(self):
        """Test a final ratio outside [0.7, 1.3]."""
        assert trend_verdict(ratio_table([1.2, 1.4, 1.5])) == FAIL

    def test_trend_growing_deviation(self):
        """Test |ratio - 1| growing by more than two standard errors."""
        assert trend_verdict(ratio_table([1.0, 1.05, 1.25])) == FAIL
        assert trend_verdict(ratio_table([1.0, 1.05, 1.25], ratio_se=0.2)) == PASS

    def test_trend_degenerate(self):
        """Test empty tables and a NaN final ratio."""
        assert trend_verdict(ratio_table([])) == FAIL
        assert trend_verdict(ratio_table([1.0, float("nan")])) == FAIL

    def test_battery(self):
        """Test the final deviation must be small and no larger than the first."""
        assert battery_verdict(pd.DataFrame({"max_abs_deviation": [0.4, 0.2]})) == PASS
        assert battery_verdict(pd.DataFrame({"max_abs_deviation": [0.1, 0.2]})) == FAIL
        assert battery_verdict(pd.DataFrame({"max_abs_deviation": [0.5, 0.35]})) == FAIL
        assert battery_verdict(pd.DataFrame({"max_abs_deviation": []})) == FAIL

    def test_fitted_slope(self):
        """Test the log-log slope of a power law."""
        xs = np.array([10.0, 100.0, 1000.0])

        assert fitted_slope(xs, 3.0 * xs**-2.0) == pytest.approx(-2.0)
        assert np.isnan(fitted_slope([10.0, 100.0], [1.0, 0.0]))


class TestExperimentConfig:
    """Tests for configuration validation and loading."""

    def test_defaults_build(self):
        """Test the default configuration builds every block."""
        config = ExperimentConfig()

        assert isinstance(config.build_law(), ParetoLaw)
        assert config.build_boundary().class_slope() == 1.0
        assert config.build_stopping().bound == 1
        assert config.build_environment().fading_product() == pytest.approx(1.0)

    def test_bad_mode(self):
        """Test unknown modes are rejected."""
        with pytest.raises(ConfigError, match="mode"):
            ExperimentConfig(mode="fast")

    def test_grid_must_increase(self):
        """Test decreasing grids are rejected."""
        with pytest.raises(ConfigError, match="x_grid"):
            ExperimentConfig(x_grid=[20.0, 10.0])

    def test_unknown_keys(self):
        """Test unknown top-level keys."""
        with pytest.raises(ConfigError, match="Unknown configuration keys"):
            ExperimentConfig.from_dict({"law": {"family": "pareto", "beta": 2.0}, "runs": 5})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict([1, 2])

    def test_with_overrides(self):
        """Test None keeps the file value."""
        config = ExperimentConfig(seed=1, n_runs=50)
        changed = config.with_overrides(seed=9, workers=2)

        assert (changed.seed, changed.n_runs, changed.workers) == (9, 50, 2)
        assert config.seed == 1

    def test_load_config(self, tmp_path):
        """Test a file written as JSON loads back."""
        path = save_json({"law": LATTICE, "x_grid": [0, 1], "seed": 3}, tmp_path / "run.json")
        config = load_config(path)

        assert config.seed == 3
        assert config.build_law().tail_exact(Fraction(0)) == Fraction(1, 3)

    def test_load_config_errors(self, tmp_path):
        """Test missing and malformed files."""
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(bad)

    def test_resolved(self, enumeration_config):
        """Test the resolved configuration rebuilds every block."""
        resolved = enumeration_config.resolved()

        assert resolved["stopping"]["kind"] == "fixed"
        assert resolved["law"]["family"] == "lattice"
        assert resolved["x_grid"] == [0.0]


class TestReport:
    """Tests for report files."""

    def test_write_csv(self, tmp_path):
        """Test one CSV per table and a JSON summary."""
        report = SuiteReport("simulate", seed=7)
        report.tables["estimates"] = pd.DataFrame({"x": [1.0], "estimate": [0.5]})
        report.note("hello")

        paths = write_report(report, tmp_path)

        assert [p.name for p in paths] == ["estimates.csv", "report.json"]
        summary = json.loads((tmp_path / "simulate" / "report.json").read_text())
        assert summary["verdict"] == COMPLETE
        assert summary["seed"] == 7
        assert summary["notes"] == ["hello"]
        assert summary["thresholds"]["ratio_band"] == [0.7, 1.3]
        assert summary["tables"]["estimates"] == [{"x": 1.0, "estimate": 0.5}]

    def test_write_json(self, tmp_path):
        """Test JSON records instead of CSV."""
        report = SuiteReport("moments", tables={"criteria": pd.DataFrame({"f": ["n"]})})

        paths = write_report(report, tmp_path, fmt="json")

        assert paths[0].name == "criteria.json"
        assert json.loads(paths[0].read_text()) == [{"f": "n"}]

    def test_bad_format(self, tmp_path):
        """Test unknown formats."""
        with pytest.raises(ValueError):
            write_report(SuiteReport("simulate"), tmp_path, fmt="xlsx")


class TestSuites:
    """Tests for the verification suites on small configurations."""

    def test_unknown_command(self):
        """Test dispatch of an unknown command."""
        with pytest.raises(ParameterOutOfRange):
            run_command("verify-everything", ExperimentConfig())

    def test_simulate_with_node_dump(self, enumeration_config):
        """Test the estimate table plus node and front dumps."""
        report = run_command("simulate", enumeration_config)

        assert report.verdict == COMPLETE
        assert report.seed == 5
        estimates = report.tables["estimates"]
        exact = 65 / 81
        assert abs(estimates["estimate"].iloc[0] - exact) < 4 * estimates["se"].iloc[0]
        assert estimates["analytic"].iloc[0] == pytest.approx(4 / 3)
        assert len(report.tables["nodes"]) == 5
        assert report.tables["fronts"]["n"].tolist() == [1, 2]

    def test_theorem1_needs_positive_slope(self):
        """Test c = 0 violates the infinite-horizon hypotheses."""
        config = ExperimentConfig(environment=DOUBLING, boundary={"slope": 0.0})

        with pytest.raises(HypothesisViolation):
            run_command("verify-theorem1", config)

    def test_theorem2_needs_heavy_tail(self):
        """Test a light-tailed law violates the hypotheses."""
        config = ExperimentConfig(
            law=ExponentialLaw(1.0).to_spec(),
            environment=DOUBLING,
            stopping={"kind": "fixed", "n": 3},
        )

        with pytest.raises(HypothesisViolation):
            run_command("verify-theorem2", config)

    def test_power_example_needs_pareto(self):
        """Test the power example rejects other families."""
        config = ExperimentConfig(law=LognormalLaw(1.0).to_spec(), environment=DOUBLING)

        with pytest.raises(HypothesisViolation):
            run_command("example2", config)

    def test_power_example_identity(self):
        """Test the Beta identity rows without walk simulation."""
        config = ExperimentConfig(
            law=ParetoLaw(2.5).to_spec(),
            environment=DOUBLING,
            n_runs=0,
            seed=1,
            options={"hseries_grid": [1e3, 1e4]},
        )
        report = run_command("example2", config)

        identity = report.tables["identity"]
        assert len(identity) == 21
        assert identity["rel_error"].max() <= 1e-5
        assert np.all(np.isfinite(report.tables["hseries"]["ratio"]))
        assert "estimates" not in report.tables

    def test_power_example_beta_two(self):
        """Test the H-series slope is -3/2 and every H-series ratio lies in the band."""
        config = ExperimentConfig(
            law=ParetoLaw(2.0).to_spec(), environment=DOUBLING, n_runs=0, seed=1
        )
        report = run_command("example2", config)

        hseries = report.tables["hseries"]
        assert hseries["x"].tolist() == [1e3, 1e4, 1e5, 1e6]
        assert abs(fitted_slope(hseries["x"], hseries["h_series"]) + 1.5) <= 0.05
        assert hseries["ratio"].between(0.7, 1.3).all()
        assert hseries["method"].iloc[-1] == "integral_tail"
        assert report.verdict == PASS

    def test_shipped_power_example_config(self):
        """Test the shipped power example uses Pareto beta = 2 and a power-law mu."""
        config = load_config(CONFIG_DIR / "example2.json")

        assert config.build_law().beta == 2.0
        assert config.build_stopping().to_spec()["law"]["alpha"] == 0.5

    def test_theorem1_runs(self):
        """Test the infinite-horizon suite emits class and ratio tables."""
        config = ExperimentConfig(
            environment=DOUBLING,
            stopping={"kind": "infinite_horizon"},
            x_grid=[5.0, 10.0, 20.0],
            n_runs=300,
            seed=3,
        )
        report = run_command("verify-theorem1", config)

        ratios = report.tables["ratios"]
        assert "class_check" in report.tables
        assert ratios["x"].tolist() == [5.0, 10.0, 20.0]
        assert np.all(np.isfinite(ratios["analytic"]))
        assert report.verdict in (PASS, FAIL)

    def test_theorem2_runs(self):
        """Test the random-time suite reports E eta and the H-series for a fixed time."""
        config = ExperimentConfig(
            environment=Environment(tail=GeometricTail(0.5, 0.5)).to_spec(),
            stopping={"kind": "fixed", "n": 3},
            x_grid=[5.0, 10.0, 20.0],
            n_runs=300,
            mode="crude",
            seed=4,
        )
        report = run_command("verify-theorem2", config)

        ratios = report.tables["ratios"]
        assert (ratios["eta"] > 0).all()
        assert (ratios["h_series"] <= ratios["analytic"]).all()
        assert report.verdict in (PASS, FAIL)

    def test_theorem3_runs(self):
        """Test the battery covers every rule, boundary and level."""
        config = ExperimentConfig(
            environment=DOUBLING,
            x_grid=[5.0, 10.0],
            n_runs=200,
            mode="crude",
            seed=6,
            options={"N": 2, "eta_runs": 200},
        )
        report = run_command("verify-theorem3", config)

        battery = report.tables["battery"]
        assert len(battery) == 18
        assert set(battery["rule"]) == {"fixed", "independent", "first_passage"}
        assert report.tables["summary"]["x"].tolist() == [5.0, 10.0]
        assert report.verdict in (PASS, FAIL)

    def test_supercritical_heavy_tail(self):
        """Test the heavy-tailed demo emits curves and a pass or fail verdict."""
        config = ExperimentConfig(
            environment=Environment(tail=ConstantTail(0.2)).to_spec(),
            x_grid=[5.0],
            n_runs=200,
            seed=7,
            population_cap=5000,
            options={"horizons": [0, 4]},
        )
        report = run_command("supercritical-demo", config)

        curves = report.tables["curves"]
        assert len(curves) == 8
        assert set(curves["coverage"]) == {"covered", "not covered by proposition"}
        assert report.verdict in (PASS, FAIL)

    def test_moments(self):
        """Test criteria, z bounds and the nu band on a geometric environment."""
        config = ExperimentConfig(
            environment=Environment(tail=GeometricTail(0.5, 0.5)).to_spec(),
            n_runs=3000,
            seed=8,
            options={"nu_grid": [1, 2, 3, 4]},
        )
        report = run_command("moments", config)

        criteria = report.tables["criteria"].set_index("f")["verdict"]
        assert criteria["n^1"] == "converges"
        assert report.tables["nu_tail"]["in_band"].all()
        assert "E nu" in report.tables["empirical"]["quantity"].tolist()
        assert report.tables["martingale"]["in_band"].all()
        assert report.verdict == COMPLETE

    def test_moments_divergent_mean(self):
        """Test empirical moments are skipped when E nu diverges."""
        config = ExperimentConfig(
            environment=Environment(tail=PowerTail(q0=1.0, p=1.0, k=2.0, n0=3)).to_spec(),
            n_runs=100,
            seed=2,
            options={"nu_grid": [1, 2]},
        )
        report = run_command("moments", config)

        assert "empirical" not in report.tables
        assert any("diverges" in note for note in report.notes)

    def test_supercritical_light_tail(self):
        """Test curves for both environments and laws, labelled outside hypotheses."""
        config = ExperimentConfig(
            law=ExponentialLaw(1.0).to_spec(),
            environment=Environment(tail=ConstantTail(0.2)).to_spec(),
            x_grid=[5.0],
            n_runs=200,
            seed=4,
            population_cap=5000,
            options={"horizons": [0, 3]},
        )
        report = run_command("supercritical-demo", config)

        curves = report.tables["curves"]
        assert len(curves) == 8
        assert set(curves["environment"]) == {"non-fading", "fading"}
        assert (curves[curves["T"] == 0]["estimate"] == 0.0).all()
        assert report.verdict == OUTSIDE_HYPOTHESES

    def test_class_check(self):
        """Test one table per class and a summary."""
        config = ExperimentConfig(x_grid=[1e2, 1e3, 1e4], options={"classes": ["L", "S"]})
        report = run_command("class-check", config)

        assert set(report.tables) == {"class_L", "class_S", "summary"}
        assert report.tables["summary"]["heavy_tailed"].all()


class TestCli:
    """Tests for the command-line entry point."""

    @pytest.fixture(autouse=True)
    def in_tmp(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)

    def test_parser_rejects_unknown_command(self):
        """Test argparse choices."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["verify-everything"])

    def test_class_check_writes_report(self, tmp_path):
        """Test exit code 0 and the report directory."""
        path = save_json(
            {"x_grid": [100, 1000, 10000], "options": {"classes": ["L"]}}, tmp_path / "c.json"
        )

        code = main(["class-check", "--config", str(path), "--out", str(tmp_path / "out")])

        assert code == 0
        assert (tmp_path / "out" / "class-check" / "report.json").exists()
        assert (tmp_path / "out" / "class-check" / "class_L.csv").exists()

    def test_hypothesis_violation_exit_code(self, tmp_path):
        """Test exit code 2 outside the hypotheses."""
        path = save_json({"environment": DOUBLING, "boundary": {"slope": 0.0}}, tmp_path / "t.json")

        assert main(["verify-theorem1", "--config", str(path), "--seed", "1"]) == 2

    def test_missing_config_exit_code(self, tmp_path):
        """Test exit code 1 for a missing configuration."""
        assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 1

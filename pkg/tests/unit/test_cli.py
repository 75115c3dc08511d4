"""Tests for CLI commands."""

import json

import pytest
from click.testing import CliRunner

from tasep_hydro.cli import init, main, validate
from tasep_hydro.errors import ConvergenceError


@pytest.fixture
def runner():
    """Create a CLI runner."""
    return CliRunner()


@pytest.fixture
def valid_config_file(tmp_path):
    """Create a valid config file."""
    config_content = f"""
mode = "theory"
seed = 3
output_dir = "{(tmp_path / "out").as_posix()}"

[model]
n_sites = 30
ell = 2
alpha = 0.1
beta = 0.6

[model.rates]
generator = "bump"
center = 0.5
width = 0.2
depth = 0.3

[pde]
cells = 60

[phase_scan]
points = 3
"""
    config_file = tmp_path / "tasep-config.toml"
    config_file.write_text(config_content)
    return config_file


class TestMain:
    """Tests for main CLI group."""

    def test_version(self, runner):
        """Test --version flag."""
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert "0.1.0" in result.output

    def test_help(self, runner):
        """Test --help flag."""
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        assert "rate inference" in result.output
        for command in ("simulate", "theory", "pde", "compare", "infer", "phase-scan"):
            assert command in result.output


class TestInit:
    """Tests for init command."""

    def test_init_creates_config(self, runner, tmp_path):
        """Test init creates a config file."""
        config_path = tmp_path / "tasep-config.toml"
        result = runner.invoke(init, [str(config_path)])

        assert result.exit_code == 0
        assert "Created configuration file" in result.output
        assert config_path.exists()

    def test_init_fails_if_exists(self, runner, valid_config_file):
        """Test init fails if config already exists."""
        result = runner.invoke(init, [str(valid_config_file)])

        assert result.exit_code == 2
        assert "already exists" in result.output


class TestValidate:
    """Tests for validate command."""

    def test_validate_valid_config(self, runner, valid_config_file):
        """Test validation of a valid config."""
        result = runner.invoke(validate, ["--config", str(valid_config_file)])

        assert result.exit_code == 0
        assert "✓ Configuration file is valid" in result.output
        assert "N=30, ell=2, open" in result.output
        assert "alpha=0.1, beta=0.6" in result.output
        assert "Validation complete" in result.output

    def test_validate_ring(self, runner, tmp_path):
        """Test validation reports the particle count of a ring."""
        config_file = tmp_path / "ring.toml"
        config_file.write_text(
            '[model]\nn_sites = 10\ngeometry = "ring"\nparticles = 4\n'
            '[model.rates]\ngenerator = "constant"\n'
        )
        result = runner.invoke(validate, ["--config", str(config_file)])

        assert result.exit_code == 0
        assert "particles: 4" in result.output

    def test_validate_missing_config(self, runner):
        """Test validation with missing config."""
        result = runner.invoke(validate, ["--config", "nonexistent.toml"])

        assert result.exit_code == 2
        assert "✗ Configuration error" in result.output


class TestRunCommands:
    """Tests for the commands that execute runs."""

    def test_theory(self, runner, valid_config_file, tmp_path):
        """Test the theory command writes its files."""
        result = runner.invoke(main, ["theory", "--config", str(valid_config_file)])

        assert result.exit_code == 0
        assert "Running theory (seed 3)" in result.output
        assert "✓ Wrote" in result.output
        assert (tmp_path / "out" / "phase_report.json").exists()

    def test_overrides(self, runner, valid_config_file, tmp_path):
        """Test --seed and --out override the configuration."""
        out = tmp_path / "elsewhere"
        result = runner.invoke(
            main,
            ["theory", "--config", str(valid_config_file), "--seed", "9", "--out", str(out)],
        )

        assert result.exit_code == 0
        recorded = json.loads((out / "run_config.json").read_text())
        assert recorded["seed"] == 9

    def test_run_uses_configured_mode(self, runner, valid_config_file, tmp_path):
        """Test run dispatches on the configured mode."""
        result = runner.invoke(main, ["run", "--config", str(valid_config_file)])

        assert result.exit_code == 0
        assert (tmp_path / "out" / "profile.csv").exists()

    def test_phase_scan(self, runner, valid_config_file, tmp_path):
        """Test the phase-scan command."""
        result = runner.invoke(main, ["phase-scan", "--config", str(valid_config_file)])

        assert result.exit_code == 0
        assert (tmp_path / "out" / "phase_scan.csv").exists()

    def test_config_error_exit_code(self, runner, tmp_path):
        """Test configuration errors exit with code 2."""
        config_file = tmp_path / "bad.toml"
        config_file.write_text('mode = "theory"\n')
        result = runner.invoke(main, ["theory", "--config", str(config_file)])

        assert result.exit_code == 2
        assert "Error [config_error]" in result.output

    def test_non_convergence_exit_code(self, runner, valid_config_file, mocker):
        """Test a solver that does not converge exits with code 3."""
        mocker.patch(
            "tasep_hydro.cli.run_workflow",
            side_effect=ConvergenceError("no steady state after 10 steps", residual=0.5),
        )
        result = runner.invoke(main, ["pde", "--config", str(valid_config_file)])

        assert result.exit_code == 3
        assert "Error [non_convergence]" in result.output

    def test_open_only_mode_on_ring(self, runner, tmp_path):
        """Test the theory command refuses a ring."""
        config_file = tmp_path / "ring.toml"
        config_file.write_text(
            '[model]\nn_sites = 10\ngeometry = "ring"\nparticles = 4\n'
            '[model.rates]\ngenerator = "constant"\n'
        )
        result = runner.invoke(main, ["theory", "--config", str(config_file), "--out", str(tmp_path / "o")])

        assert result.exit_code == 2
        assert "open geometry" in result.output

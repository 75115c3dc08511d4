"""Command-line interface for hydrodynamic runs."""

import json
import logging
import sys
from pathlib import Path

import click

from tasep_hydro import DEFAULT_CONFIG_FILE, __version__
from tasep_hydro.config import build_model_spec, create_default_config, load_config
from tasep_hydro.errors import TasepHydroError
from tasep_hydro.models import Geometry, RunConfig, RunMode
from tasep_hydro.workflows import run as run_workflow


def _fail(error: Exception) -> None:
    if isinstance(error, TasepHydroError):
        click.echo(f"Error [{error.code}]: {error}", err=True)
        sys.exit(error.exit_code)
    click.echo(f"Error [filesystem_error]: {error}", err=True)
    sys.exit(1)


def _prepare(
    config: str,
    mode: RunMode | None,
    seed: int | None,
    workers: int | None,
    out: str | None,
) -> RunConfig:
    run_config = load_config(config)
    if mode is not None:
        run_config.mode = mode
    if seed is not None:
        run_config.seed = seed
    if workers is not None:
        run_config.workers = workers
    if out is not None:
        run_config.output_dir = Path(out)
    return run_config


def _execute(
    config: str,
    mode: RunMode | None,
    seed: int | None,
    workers: int | None,
    out: str | None,
) -> None:
    try:
        run_config = _prepare(config, mode, seed, workers, out)
        click.echo(f"Running {run_config.mode.value} (seed {run_config.seed})...")
        result = run_workflow(run_config)
    except (TasepHydroError, OSError) as e:
        _fail(e)
        return

    for path in result.files:
        click.echo(f"  ✓ Wrote {path}")
    click.echo(json.dumps(result.summary, indent=2, sort_keys=True, default=str))


def run_options(func):
    """Options shared by every command that executes a run."""
    func = click.option(
        "--out",
        "-o",
        type=click.Path(file_okay=False),
        help="Output directory (overrides the configuration)",
    )(func)
    func = click.option(
        "--workers",
        "-w",
        type=click.IntRange(min=1),
        help="Parallel workers for replicas and phase scans",
    )(func)
    func = click.option(
        "--seed",
        "-s",
        type=click.IntRange(min=0, max=2**64 - 1),
        help="Master random seed",
    )(func)
    func = click.option(
        "--config",
        "-c",
        default=DEFAULT_CONFIG_FILE,
        help="Path to run configuration file",
    )(func)
    return func


@click.group()
@click.version_option(version=__version__)
@click.option("--verbose", "-v", is_flag=True, help="Log debug messages")
def main(verbose: bool) -> None:
    """Hydrodynamics, simulation and rate inference for the inhomogeneous l-TASEP."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@run_options
def run(config: str, seed: int | None, workers: int | None, out: str | None) -> None:
    """Run the mode named in the configuration."""
    _execute(config, None, seed, workers, out)


@main.command()
@run_options
def simulate(config: str, seed: int | None, workers: int | None, out: str | None) -> None:
    """Monte Carlo densities and currents."""
    _execute(config, RunMode.SIMULATE, seed, workers, out)


@main.command()
@run_options
def theory(config: str, seed: int | None, workers: int | None, out: str | None) -> None:
    """Phase report and closed-form density profile."""
    _execute(config, RunMode.THEORY, seed, workers, out)


@main.command()
@run_options
def pde(config: str, seed: int | None, workers: int | None, out: str | None) -> None:
    """Finite-volume steady state."""
    _execute(config, RunMode.PDE, seed, workers, out)


@main.command()
@run_options
def compare(config: str, seed: int | None, workers: int | None, out: str | None) -> None:
    """Simulation against theory, site by site."""
    _execute(config, RunMode.COMPARE, seed, workers, out)


@main.command()
@run_options
def infer(config: str, seed: int | None, workers: int | None, out: str | None) -> None:
    """Infer rates from a density profile."""
    _execute(config, RunMode.INFER, seed, workers, out)


@main.command("phase-scan")
@run_options
def phase_scan(config: str, seed: int | None, workers: int | None, out: str | None) -> None:
    """Phase labels on a grid of entry and exit rates."""
    _execute(config, RunMode.PHASE_SCAN, seed, workers, out)


@main.command()
@click.option(
    "--config",
    "-c",
    default=DEFAULT_CONFIG_FILE,
    help="Path to run configuration file",
)
def validate(config: str) -> None:
    """Validate a run configuration."""
    try:
        run_config = load_config(config)
        click.echo(f"✓ Configuration file is valid: {config}")
    except TasepHydroError as e:
        click.echo(f"✗ Configuration error: {e}", err=True)
        sys.exit(e.exit_code)

    spec = build_model_spec(run_config)
    model = run_config.model
    click.echo(f"✓ Mode: {run_config.mode.value}")
    click.echo(f"✓ Lattice: N={spec.n_sites}, ell={spec.ell}, {spec.geometry.value}")
    rates = spec.rates
    click.echo(
        f"  - rates: lambda0={rates.lambda0:.6g}, lambda1={rates.lambda1:.6g}, "
        f"lambda_min={rates.lambda_min:.6g} ({rates.interpolation.value})"
    )
    if spec.geometry is Geometry.OPEN:
        click.echo(f"  - boundaries: alpha={model.alpha:g}, beta={model.beta:g}")
    else:
        click.echo(f"  - particles: {spec.particles}")

    click.echo("\n✓ Validation complete")


@main.command()
@click.argument("path", default=DEFAULT_CONFIG_FILE)
def init(path: str) -> None:
    """Create a default configuration file."""
    try:
        create_default_config(path)
        click.echo(f"✓ Created configuration file: {path}")
        click.echo("\nNext steps:")
        click.echo("1. Edit the [model] section for your lattice and rates")
        click.echo("2. Check it: tasep-hydro validate")
        click.echo("3. Run: tasep-hydro theory")
    except TasepHydroError as e:
        click.echo(f"Error: {e}", err=True)
        sys.exit(e.exit_code)


if __name__ == "__main__":
    main()

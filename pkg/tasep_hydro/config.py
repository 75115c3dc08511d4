"""Configuration loading and validation."""

import json
import tomllib
import warnings
from pathlib import Path
from typing import Any

from tasep_hydro.constants import DEFAULT_CONFIG_FILE
from tasep_hydro.core import ModelSpec, RateProfile, make_rate_profile
from tasep_hydro.errors import ConfigError, DomainError
from tasep_hydro.generators import create_rate_profile
from tasep_hydro.models import Geometry, Interpolation, ModelConfig, RatesConfig, RunConfig


def _read(config_file: Path) -> dict[str, Any]:
    try:
        if config_file.suffix.lower() == ".json":
            return json.loads(config_file.read_text())
        with open(config_file, "rb") as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Invalid TOML syntax in {config_file}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON syntax in {config_file}: {e}") from e
    except Exception as e:
        raise ConfigError(f"Failed to read {config_file}: {e}") from e


def load_config(config_path: Path | str = DEFAULT_CONFIG_FILE) -> RunConfig:
    """
    Load a run configuration from TOML (or JSON for a ``.json`` suffix).

    Args:
        config_path: Path to the configuration file

    Returns:
        Parsed and validated RunConfig

    Raises:
        ConfigError: If the file is missing, malformed or describes an invalid model
    """
    config_file = Path(config_path)

    if not config_file.exists():
        raise ConfigError(f"Configuration file not found: {config_file}")

    data = _read(config_file)
    if not isinstance(data, dict):
        raise ConfigError(f"{config_file} must contain a table of settings")

    if "model" not in data or not isinstance(data["model"], dict):
        raise ConfigError("Configuration must include a [model] table")

    model = dict(data["model"])
    if "seed" in model:
        data.setdefault("seed", model.pop("seed"))
    data["model"] = model
    if "rates" not in model:
        raise ConfigError("Configuration must include a [model.rates] table")

    try:
        config = RunConfig(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid configuration: {e}") from e

    _validate_model(config.model)
    if config.simulation.simulator == "zrp" and config.model.geometry is Geometry.OPEN:
        raise ConfigError("The zero-range simulator needs ring geometry")
    build_model_spec(config)
    return config


def _validate_model(model: ModelConfig) -> None:
    """
    Check geometry-specific settings.

    Raises:
        ConfigError: If required boundary rates or the particle count are missing
    """
    if model.geometry is Geometry.OPEN:
        if model.alpha is None or model.beta is None:
            raise ConfigError("Open geometry needs both alpha and beta")
        if model.particles is not None:
            warnings.warn(
                "'particles' is ignored for open geometry",
                UserWarning,
                stacklevel=2,
            )
    else:
        if model.particles is None:
            raise ConfigError("Ring geometry needs 'particles'")
        if model.alpha is not None or model.beta is not None:
            warnings.warn(
                "alpha and beta are ignored for ring geometry",
                UserWarning,
                stacklevel=2,
            )


def build_rate_profile(rates: RatesConfig, n_sites: int) -> RateProfile:
    """
    Build the rate profile from one of its configured sources.

    Raises:
        ConfigError: If the source cannot be read or does not describe N sites
    """
    try:
        if rates.generator is not None:
            profile = create_rate_profile(rates.generator, n_sites, **rates.params)
        elif rates.values is not None:
            profile = make_rate_profile(rates.values, rates.interpolation)
        elif rates.csv is not None:
            profile = RateProfile.from_csv(rates.csv, rates.interpolation)
        else:
            profile = RateProfile.load_json(str(rates.json))
            if rates.interpolation is not Interpolation.LINEAR and profile.generator is None:
                profile = make_rate_profile(profile.site_rates, rates.interpolation)
    except DomainError as e:
        raise ConfigError(f"Invalid rate profile: {e}") from e
    except (OSError, json.JSONDecodeError, KeyError) as e:
        raise ConfigError(f"Failed to read rate profile: {e}") from e

    if profile.n_sites != n_sites:
        raise ConfigError(f"Rate profile has {profile.n_sites} sites, model has n_sites={n_sites}")
    return profile


def build_model_spec(config: RunConfig) -> ModelSpec:
    """
    Turn the model section of a configuration into a ModelSpec.

    Raises:
        ConfigError: If the model parameters are invalid
    """
    model = config.model
    rates = build_rate_profile(model.rates, model.n_sites)
    is_open = model.geometry is Geometry.OPEN
    try:
        return ModelSpec(
            n_sites=model.n_sites,
            ell=model.ell,
            rates=rates,
            alpha=model.alpha if is_open else None,
            beta=model.beta if is_open else None,
            geometry=model.geometry,
            particles=None if is_open else model.particles,
            seed=config.seed,
        )
    except DomainError as e:
        raise ConfigError(f"Invalid model: {e}") from e


def create_default_config(path: Path | str = DEFAULT_CONFIG_FILE) -> None:
    """
    Create a default configuration file.

    Args:
        path: Path where to create the config file
    """
    default_config = """# Run configuration for tasep-hydro

mode = "theory"              # simulate | theory | pde | compare | infer | phase-scan
seed = 0                     # master seed; replicas derive their own
workers = 1                  # parallel workers for replicas and phase scans
output_dir = "tasep-output"

[model]
n_sites = 1000
ell = 1                      # particle size in lattice sites
alpha = 0.2                  # entry rate
beta = 0.7                   # exit rate
geometry = "open"            # open | ring
# particles = 100            # ring geometry only

# Site rates: exactly one of values, csv, json or generator
[model.rates]
generator = "constant"       # constant | linear | bump | two_bump | valley
value = 1.0
# generator = "bump"
# center = 0.5
# width = 0.1
# depth = 0.5
# values = [1.0, 0.8, 1.0]   # one rate per site
# csv = "rates.csv"          # columns site_index, rate
# interpolation = "piecewise-linear"

[simulation]
burn_in_events = 1000000
sample_events = 5000000
batches = 20
replicas = 1

[theory]
# grid_size = 1001

[pde]
cells = 1000
tol = 1e-7
max_steps = 5000000
cfl = 0.9
viscosity = false
initial = "empty"            # empty | step

[infer]
# profile = "tasep-output/simulation.csv"
anchor = 0.5
# smoothing_window = 5

[phase_scan]
alpha_min = 0.01
alpha_max = 1.0
beta_min = 0.01
beta_max = 1.0
points = 50

[compare]
bulk_fraction = 0.9          # central share of the lattice used for the bulk error
"""

    config_file = Path(path)
    if config_file.exists():
        raise ConfigError(f"Configuration file already exists: {config_file}")

    config_file.write_text(default_config)

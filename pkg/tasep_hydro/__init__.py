"""Hydrodynamic limit of the inhomogeneous l-TASEP: theory, simulation and rate inference."""

from tasep_hydro.config import load_config
from tasep_hydro.constants import DEFAULT_CONFIG_FILE, LOGGER_NAME
from tasep_hydro.core import ModelSpec, RateProfile, make_rate_profile
from tasep_hydro.errors import ConfigError, TasepHydroError
from tasep_hydro.models import (
    Branch,
    Geometry,
    Phase,
    PhaseReport,
    RunConfig,
    RunMode,
    StationaryProfile,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CONFIG_FILE",
    "LOGGER_NAME",
    "Branch",
    "ConfigError",
    "Geometry",
    "ModelSpec",
    "Phase",
    "PhaseReport",
    "RateProfile",
    "RunConfig",
    "RunMode",
    "StationaryProfile",
    "TasepHydroError",
    "load_config",
    "make_rate_profile",
]

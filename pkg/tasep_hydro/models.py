"""Data models for model configuration and analysis results."""

import math
from dataclasses import asdict, dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import TYPE_CHECKING, Any, cast

import numpy as np
import pandas as pd
from scipy.ndimage import uniform_filter1d

from tasep_hydro.constants import DEFAULT_BATCHES, DEFAULT_OUTPUT_DIR
from tasep_hydro.errors import ConfigError, DomainError

if TYPE_CHECKING:
    from tasep_hydro.core import RateProfile
    from tasep_hydro.simulate.stats import SimStats


class Geometry(StrEnum):
    """Lattice boundary conditions."""

    OPEN = "open"
    RING = "ring"


class Interpolation(StrEnum):
    """Rules extending site rates to a function on [0, 1]."""

    LINEAR = "piecewise-linear"
    CONSTANT = "piecewise-constant"
    ANALYTIC = "analytic"


class Phase(StrEnum):
    """Stationary phases of the open lattice."""

    LD_I = "LD_I"
    LD_II = "LD_II"
    HD_I = "HD_I"
    HD_II = "HD_II"
    MC = "MC"
    COEXISTENCE = "coexistence"
    TRANSITION = "transition"

    @property
    def is_low_density(self) -> bool:
        return self in (Phase.LD_I, Phase.LD_II)

    @property
    def is_high_density(self) -> bool:
        return self in (Phase.HD_I, Phase.HD_II)


class Branch(StrEnum):
    """Root of lambda(x) H(rho) = J selected at a grid point."""

    LOWER = "lower"
    UPPER = "upper"
    INDETERMINATE = "indeterminate"


class EventKind(StrEnum):
    """Elementary moves of the lattice dynamics."""

    ENTRY = "entry"
    HOP = "hop"
    EXIT = "exit"


class TraceOutcome(StrEnum):
    """How a characteristic trace terminated."""

    REACHED_END = "reached_opposite_end"
    REVERSED = "reversed"
    MAX_TIME = "max_time_exceeded"


class RunMode(StrEnum):
    """Workflows available from the command line."""

    SIMULATE = "simulate"
    THEORY = "theory"
    PDE = "pde"
    COMPARE = "compare"
    INFER = "infer"
    PHASE_SCAN = "phase-scan"


class InitialCondition(StrEnum):
    """Initial densities for the finite-volume solver."""

    EMPTY = "empty"
    STEP = "step"


# --- Run configuration -------------------------------------------------------

RATE_SOURCE_KEYS = ("values", "csv", "json", "generator")
SIMULATORS = ("lattice", "zrp")


@dataclass
class RatesConfig:
    """Where the site rates come from."""

    values: list[float] | None = None
    csv: str | None = None
    json: str | None = None
    generator: str | None = None
    params: dict[str, Any] = field(default_factory=dict)
    interpolation: Interpolation = Interpolation.LINEAR

    def __post_init__(self) -> None:
        """Validate and normalize configuration."""
        if isinstance(self.interpolation, str):
            self.interpolation = Interpolation(self.interpolation)

        sources = [key for key in RATE_SOURCE_KEYS if getattr(self, key) is not None]
        if len(sources) != 1:
            raise ConfigError(
                f"[model.rates] needs exactly one of {', '.join(RATE_SOURCE_KEYS)}; "
                f"got {sources or 'none'}"
            )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RatesConfig":
        """Split known keys from generator parameters."""
        known = {"values", "csv", "json", "generator", "interpolation", "params"}
        params = dict(data.get("params", {}))
        params.update({k: v for k, v in data.items() if k not in known})
        kwargs = {k: v for k, v in data.items() if k in known and k != "params"}
        return cls(**kwargs, params=params)


@dataclass
class ModelConfig:
    """Model parameters as written in the configuration file."""

    n_sites: int
    rates: RatesConfig
    ell: int = 1
    alpha: float | None = None
    beta: float | None = None
    geometry: Geometry = Geometry.OPEN
    particles: int | None = None

    def __post_init__(self) -> None:
        """Validate and normalize configuration."""
        if isinstance(self.geometry, str):
            self.geometry = Geometry(self.geometry)

        if isinstance(self.rates, dict):
            self.rates = RatesConfig.from_dict(cast("dict[str, Any]", self.rates))


@dataclass
class SimulationConfig:
    """Monte Carlo event budget."""

    burn_in_events: int = 1_000_000
    sample_events: int = 5_000_000
    batches: int = DEFAULT_BATCHES
    replicas: int = 1
    simulator: str = "lattice"  # lattice | zrp (ring only)

    def __post_init__(self) -> None:
        """Check the simulator name."""
        if self.simulator not in SIMULATORS:
            raise ConfigError(
                f"Unknown simulator '{self.simulator}'; available: {', '.join(SIMULATORS)}"
            )


@dataclass
class TheoryConfig:
    """Closed-form profile evaluation."""

    grid_size: int | None = None  # defaults to one point per site plus x = 0


@dataclass
class PdeConfig:
    """Finite-volume relaxation settings."""

    cells: int = 1000
    tol: float = 1e-7
    max_steps: int = 5_000_000
    cfl: float = 0.9
    viscosity: bool = False
    initial: InitialCondition = InitialCondition.EMPTY

    def __post_init__(self) -> None:
        """Normalize the initial condition."""
        if isinstance(self.initial, str):
            self.initial = InitialCondition(self.initial)


@dataclass
class InferConfig:
    """Rate-inference input and settings."""

    profile: str | None = None
    anchor: float = 0.5
    smoothing_window: int | None = None


@dataclass
class PhaseScanConfig:
    """Grid of entry/exit rates for the phase diagram."""

    alpha_min: float = 0.01
    alpha_max: float = 1.0
    beta_min: float = 0.01
    beta_max: float = 1.0
    points: int = 50


@dataclass
class CompareConfig:
    """Simulation versus theory comparison."""

    bulk_fraction: float = 0.9


@dataclass
class RunConfig:
    """Complete run configuration."""

    model: ModelConfig
    mode: RunMode = RunMode.THEORY
    seed: int = 0
    workers: int = 1
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    theory: TheoryConfig = field(default_factory=TheoryConfig)
    pde: PdeConfig = field(default_factory=PdeConfig)
    infer: InferConfig = field(default_factory=InferConfig)
    phase_scan: PhaseScanConfig = field(default_factory=PhaseScanConfig)
    compare: CompareConfig = field(default_factory=CompareConfig)

    def __post_init__(self) -> None:
        """Validate and normalize configuration."""
        if isinstance(self.mode, str):
            self.mode = RunMode(self.mode)

        if isinstance(self.output_dir, str):
            self.output_dir = Path(self.output_dir)

        # Convert dicts to proper types
        if isinstance(self.model, dict):
            self.model = ModelConfig(**cast("dict[str, Any]", self.model))
        if isinstance(self.simulation, dict):
            self.simulation = SimulationConfig(**cast("dict[str, Any]", self.simulation))
        if isinstance(self.theory, dict):
            self.theory = TheoryConfig(**cast("dict[str, Any]", self.theory))
        if isinstance(self.pde, dict):
            self.pde = PdeConfig(**cast("dict[str, Any]", self.pde))
        if isinstance(self.infer, dict):
            self.infer = InferConfig(**cast("dict[str, Any]", self.infer))
        if isinstance(self.phase_scan, dict):
            self.phase_scan = PhaseScanConfig(**cast("dict[str, Any]", self.phase_scan))
        if isinstance(self.compare, dict):
            self.compare = CompareConfig(**cast("dict[str, Any]", self.compare))

    def to_dict(self) -> dict[str, Any]:
        """JSON-serializable view, recorded next to every output."""
        data = asdict(self)
        data["output_dir"] = str(self.output_dir)
        return data


# --- Results -----------------------------------------------------------------


def _json_float(value: float | None) -> float | None:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


@dataclass
class PhaseReport:
    """Phase classification of an open lattice with its boundary quantities."""

    phase: Phase
    resolved_phase: Phase
    ell: int
    alpha: float
    beta: float
    lambda0: float
    lambda1: float
    lambda_min: float
    alpha_star: float
    beta_star: float
    j_left: float
    j_right: float
    j_max: float
    j_c: float
    rho_0: float
    rho_1: float
    rho_1_plus: float
    rho_1_minus: float
    x_min_set: list[float] = field(default_factory=list)
    shock_speed: float | None = None
    shock_position: float | None = None
    diagnostics: list[str] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        """Serialize for the theory output file."""
        data: dict[str, Any] = {
            "phase": self.phase.value,
            "resolved_phase": self.resolved_phase.value,
            "ell": self.ell,
            "x_min_set": [float(x) for x in self.x_min_set],
            "diagnostics": list(self.diagnostics),
        }
        for name in (
            "alpha",
            "beta",
            "lambda0",
            "lambda1",
            "lambda_min",
            "alpha_star",
            "beta_star",
            "j_left",
            "j_right",
            "j_max",
            "j_c",
            "rho_0",
            "rho_1",
            "rho_1_plus",
            "rho_1_minus",
            "shock_speed",
            "shock_position",
        ):
            data[name] = _json_float(getattr(self, name))
        return data


@dataclass
class BoundaryTable:
    """Boundary densities of the classified phase and their balance residual."""

    phase: Phase
    j_c: float
    rho_0: float
    rho_1_plus: float
    rho_1_minus: float
    residual: float


@dataclass
class StationaryProfile:
    """Density profile on a grid of [0, 1] with per-point branch labels."""

    x: np.ndarray
    rho: np.ndarray
    branch: list[Branch]
    current: float
    ell: int
    phase: Phase | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    discontinuities: list[float] = field(default_factory=list)
    interface_flux: np.ndarray | None = None
    residual: float | None = None
    steps: int | None = None
    source: str = "closed-form"

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        self.rho = np.asarray(self.rho, dtype=float)
        self.branch = [Branch(b) for b in self.branch]
        if not (len(self.x) == len(self.rho) == len(self.branch)):
            raise DomainError("profile arrays must have equal length")

    def to_frame(self) -> pd.DataFrame:
        """Tabular view with columns x, rho, branch (and the two branch curves)."""
        frame = pd.DataFrame(
            {"x": self.x, "rho": self.rho, "branch": [b.value for b in self.branch]}
        )
        if self.lower is not None:
            frame["lower"] = self.lower
        if self.upper is not None:
            frame["upper"] = self.upper
        return frame

    def to_csv(self, path: Path | str) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.12g")

    def to_json(self) -> dict[str, Any]:
        return {
            "source": self.source,
            "phase": self.phase.value if self.phase else None,
            "ell": self.ell,
            "current": _json_float(self.current),
            "discontinuities": [float(x) for x in self.discontinuities],
            "residual": _json_float(self.residual),
            "steps": self.steps,
            "points": len(self.x),
        }


@dataclass
class CharacteristicTrace:
    """Sampled solution of the characteristic equations."""

    times: np.ndarray
    positions: np.ndarray
    densities: np.ndarray
    outcome: TraceOutcome
    current: float
    max_current_drift: float = 0.0
    reversal_time: float | None = None
    reversal_position: float | None = None
    exit_time: float | None = None
    exit_position: float | None = None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "x": self.positions, "rho": self.densities})

    def to_csv(self, path: Path | str) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.12g")


@dataclass
class DensityProfile:
    """Observed reference-point densities on a grid of [0, 1]."""

    x: np.ndarray
    density: np.ndarray
    stderr: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.x = np.asarray(self.x, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)
        if self.x.shape != self.density.shape or self.x.ndim != 1 or len(self.x) < 2:
            raise DomainError("density profile needs matching one-dimensional x and density")
        if np.any(np.diff(self.x) <= 0):
            raise DomainError("density profile positions must be strictly increasing")

    @classmethod
    def from_csv(cls, path: Path | str) -> "DensityProfile":
        """
        Load a profile from CSV.

        Accepts either a ``site, density`` table (site k maps to x = k/N with N the
        largest site index) or an ``x, density`` table. A ``density_stderr``
        column is carried along when present.

        Raises:
            DomainError: If the required columns are missing
        """
        frame = pd.read_csv(path)
        if "density" not in frame.columns:
            raise DomainError(f"{path}: missing 'density' column")
        if "x" in frame.columns:
            x = frame["x"].to_numpy(dtype=float)
        elif "site" in frame.columns:
            sites = frame["site"].to_numpy(dtype=float)
            x = sites / sites.max()
        else:
            raise DomainError(f"{path}: needs a 'site' or 'x' column")
        stderr = (
            frame["density_stderr"].to_numpy(dtype=float)
            if "density_stderr" in frame.columns
            else None
        )
        return cls(x=x, density=frame["density"].to_numpy(dtype=float), stderr=stderr)

    @classmethod
    def from_sim_stats(cls, stats: "SimStats") -> "DensityProfile":
        sites = np.arange(1, stats.n_sites + 1)
        return cls(x=sites / stats.n_sites, density=stats.density, stderr=stats.density_stderr)

    @classmethod
    def from_stationary(cls, profile: StationaryProfile) -> "DensityProfile":
        return cls(x=profile.x.copy(), density=profile.rho.copy())

    def smoothed(self, window: int | None) -> "DensityProfile":
        """Moving average with an odd window; ``None`` or 1 returns the profile unchanged."""
        if window is None or window <= 1:
            return self
        if window % 2 == 0:
            raise DomainError(f"smoothing window must be odd, got {window}")
        density = uniform_filter1d(self.density, size=window, mode="nearest")
        return DensityProfile(x=self.x.copy(), density=density, stderr=self.stderr)


@dataclass
class InferenceResult:
    """Rates recovered from a stationary density profile, normalized at an anchor."""

    x: np.ndarray
    lambda_estimate: "RateProfile"
    lambda_values: np.ndarray
    lambda_naive: np.ndarray
    reliable: np.ndarray
    alpha_estimate: float
    beta_estimate: float
    current: float
    x0_anchor: float
    alpha_identified: bool
    beta_identified: bool
    diagnostics: list[str] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "alpha_estimate": _json_float(self.alpha_estimate),
            "beta_estimate": _json_float(self.beta_estimate),
            "J_estimate": _json_float(self.current),
            "x0_anchor": self.x0_anchor,
            "alpha_identified": self.alpha_identified,
            "beta_identified": self.beta_identified,
            "unreliable_sites": int(np.count_nonzero(~self.reliable)),
            "diagnostics": list(self.diagnostics),
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "x": self.x,
                "lambda_estimate": self.lambda_values,
                "lambda_naive": self.lambda_naive,
                "reliable": self.reliable.astype(int),
            }
        )

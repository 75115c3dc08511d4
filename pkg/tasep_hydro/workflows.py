"""End-to-end runs behind the command line, one per mode."""

import json
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from tasep_hydro.config import build_model_spec
from tasep_hydro.constants import LOGGER_NAME
from tasep_hydro.core import ModelSpec
from tasep_hydro.errors import ConfigError, TasepHydroError
from tasep_hydro.hydro import boundary_table, classify_phase, phase_scan, stationary_profile
from tasep_hydro.infer import infer_rates
from tasep_hydro.models import DensityProfile, Geometry, RunConfig, RunMode
from tasep_hydro.pde import solve_steady
from tasep_hydro.simulate import SimStats, run_replicas, run_tasep, run_zrp

logger = logging.getLogger(LOGGER_NAME)

CSV_FLOAT_FORMAT = "%.12g"


@dataclass
class RunResult:
    """Files written by a run and its headline numbers."""

    mode: RunMode
    files: list[Path] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)


def _write_json(path: Path, data: dict[str, Any], result: RunResult) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True))
    result.files.append(path)


def _write_csv(path: Path, frame: pd.DataFrame, result: RunResult) -> None:
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    result.files.append(path)


def _require_open(spec: ModelSpec, mode: RunMode) -> None:
    if spec.geometry is not Geometry.OPEN:
        raise ConfigError(f"Mode '{mode}' needs open geometry")


def _simulate(config: RunConfig, spec: ModelSpec) -> SimStats:
    settings = config.simulation
    runner = run_zrp if settings.simulator == "zrp" else run_tasep
    return run_replicas(
        spec,
        settings.burn_in_events,
        settings.sample_events,
        settings.replicas,
        workers=config.workers,
        batches=settings.batches,
        runner=runner,
    )


def run_simulate(config: RunConfig, spec: ModelSpec, result: RunResult) -> None:
    stats = _simulate(config, spec)
    out = config.output_dir
    _write_csv(out / "simulation.csv", stats.to_frame(), result)
    summary = {**stats.summary(), "stationarity_z": stats.stationarity_check()}
    _write_json(out / "simulation.json", summary, result)
    result.summary.update(
        {
            "events": stats.event_count,
            "mean_bond_current": summary["mean_bond_current"],
            "stationarity_z": summary["stationarity_z"],
        }
    )


def run_theory(config: RunConfig, spec: ModelSpec, result: RunResult) -> None:
    _require_open(spec, config.mode)
    report = classify_phase(spec)
    profile = stationary_profile(spec, grid_size=config.theory.grid_size, report=report)
    table = boundary_table(spec, report)
    out = config.output_dir
    data = report.to_json()
    data["boundary_table"] = {
        "rho_0": table.rho_0,
        "rho_1_plus": table.rho_1_plus,
        "rho_1_minus": table.rho_1_minus,
        "residual": table.residual,
    }
    data["profile"] = profile.to_json()
    _write_json(out / "phase_report.json", data, result)
    _write_csv(out / "profile.csv", profile.to_frame(), result)
    result.summary.update({"phase": report.phase.value, "J_c": report.j_c})


def run_pde(config: RunConfig, spec: ModelSpec, result: RunResult) -> None:
    _require_open(spec, config.mode)
    settings = config.pde
    profile = solve_steady(
        spec,
        cells=settings.cells,
        tol=settings.tol,
        max_steps=settings.max_steps,
        cfl=settings.cfl,
        viscosity=settings.viscosity,
        initial=settings.initial,
    )
    out = config.output_dir
    _write_csv(out / "pde_profile.csv", profile.to_frame(), result)
    _write_json(out / "pde.json", profile.to_json(), result)
    result.summary.update({"steps": profile.steps, "current": profile.current})


def compare_frame(stats: SimStats, spec: ModelSpec, bulk_fraction: float) -> pd.DataFrame:
    """
    Per-site comparison of simulated and closed-form densities.

    Columns ``site, x, sim_density, sim_stderr, theory_density, abs_diff, bulk``;
    ``bulk`` marks the central ``bulk_fraction`` of the lattice.
    """
    if not 0 < bulk_fraction <= 1:
        raise ConfigError(f"bulk_fraction must lie in (0, 1], got {bulk_fraction}")
    sites = np.arange(1, spec.n_sites + 1)
    x = sites / spec.n_sites
    theory = stationary_profile(spec, grid=x)
    return pd.DataFrame(
        {
            "site": sites,
            "x": x,
            "sim_density": stats.density,
            "sim_stderr": stats.density_stderr,
            "theory_density": theory.rho,
            "abs_diff": np.abs(stats.density - theory.rho),
            "bulk": np.abs(x - 0.5) <= 0.5 * bulk_fraction,
        }
    )


def compare_summary(frame: pd.DataFrame) -> dict[str, Any]:
    """Bulk mean and maximum absolute error, skipping indeterminate theory points."""
    bulk = frame[frame["bulk"] & frame["abs_diff"].notna()]
    return {
        "bulk_sites": len(bulk),
        "mae_bulk": float(bulk["abs_diff"].mean()) if len(bulk) else None,
        "max_abs_diff_bulk": float(bulk["abs_diff"].max()) if len(bulk) else None,
        "mae_all": float(frame["abs_diff"].mean()),
    }


def run_compare(config: RunConfig, spec: ModelSpec, result: RunResult) -> None:
    _require_open(spec, config.mode)
    stats = _simulate(config, spec)
    frame = compare_frame(stats, spec, config.compare.bulk_fraction)
    summary = {
        "phase": classify_phase(spec).phase.value,
        **compare_summary(frame),
        "events": stats.event_count,
    }
    out = config.output_dir
    _write_csv(out / "compare.csv", frame, result)
    _write_json(out / "compare.json", summary, result)
    result.summary.update(summary)


def run_infer(config: RunConfig, spec: ModelSpec, result: RunResult) -> None:
    settings = config.infer
    if settings.profile is None:
        raise ConfigError("Mode 'infer' needs [infer] profile = <density CSV>")
    try:
        profile = DensityProfile.from_csv(settings.profile)
    except TasepHydroError:
        raise
    except (OSError, ValueError) as e:
        raise ConfigError(f"Failed to read density profile: {e}") from e
    inference = infer_rates(profile, spec.ell, settings.anchor, settings.smoothing_window)
    out = config.output_dir
    _write_json(out / "inference.json", inference.to_json(), result)
    _write_csv(out / "inference.csv", inference.to_frame(), result)
    result.summary.update(
        {
            "J_estimate": inference.current,
            "alpha_estimate": inference.alpha_estimate,
            "beta_estimate": inference.beta_estimate,
        }
    )


def run_phase_scan(config: RunConfig, spec: ModelSpec, result: RunResult) -> None:
    _require_open(spec, config.mode)
    grid = config.phase_scan
    if grid.points < 2:
        raise ConfigError("phase_scan.points must be at least 2")
    alphas = np.linspace(grid.alpha_min, grid.alpha_max, grid.points)
    betas = np.linspace(grid.beta_min, grid.beta_max, grid.points)
    frame = phase_scan(spec.rates, spec.ell, alphas, betas, workers=config.workers)
    report = classify_phase(spec)
    out = config.output_dir
    _write_csv(out / "phase_scan.csv", frame, result)
    counts = {str(k): int(v) for k, v in frame["phase"].value_counts().sort_index().items()}
    result.summary.update(
        {"alpha_star": report.alpha_star, "beta_star": report.beta_star, "phases": counts}
    )


MODE_RUNNERS: dict[RunMode, Callable[[RunConfig, ModelSpec, RunResult], None]] = {
    RunMode.SIMULATE: run_simulate,
    RunMode.THEORY: run_theory,
    RunMode.PDE: run_pde,
    RunMode.COMPARE: run_compare,
    RunMode.INFER: run_infer,
    RunMode.PHASE_SCAN: run_phase_scan,
}


def run(config: RunConfig) -> RunResult:
    """
    Execute the configured mode and write its outputs.

    Every run also records the configuration it was given in
    ``run_config.json`` so the outputs can be reproduced.

    Raises:
        TasepHydroError: Subclasses from the underlying computation
        OSError: If the output directory cannot be written
    """
    spec = build_model_spec(config)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    result = RunResult(mode=config.mode)
    logger.info("Running mode '%s' into %s", config.mode, config.output_dir)
    MODE_RUNNERS[config.mode](config, spec, result)
    _write_json(config.output_dir / "run_config.json", config.to_dict(), result)
    return result

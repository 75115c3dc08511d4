"""Closed-form stationary hydrodynamics of the open lattice.

Boundary densities, critical rates and currents, phase classification, the
stationary density profile with its branch switching, and the boundary
densities of every phase.
"""

import logging
import math

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.optimize import bisect

from tasep_hydro.constants import (
    CURRENT_TIE_TOLERANCE,
    LOGGER_NAME,
    MINIMUM_TOLERANCE,
    TRANSITION_TOLERANCE,
)
from tasep_hydro.core import (
    H,
    H_inverse,
    ModelSpec,
    RateProfile,
    critical_density,
    hole_current,
    make_rate_profile,
    max_normalized_current,
)
from tasep_hydro.errors import DomainError
from tasep_hydro.models import Branch, BoundaryTable, Geometry, Phase, PhaseReport, StationaryProfile

logger = logging.getLogger(LOGGER_NAME)


def _positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")


def rho_zero(alpha: float, lambda0: float, ell: int) -> float:
    """
    Density entering the lattice, ``alpha / (lambda0 + (ell - 1) alpha)``.

    For ``ell > 1`` this increases towards ``1/(ell - 1)`` and exceeds the
    physical bound 1/ell once ``alpha > lambda0``; such values are returned
    as-is and flagged by :func:`classify_phase`.
    """
    _positive(alpha=alpha, lambda0=lambda0)
    return alpha / (lambda0 + (ell - 1) * alpha)


def exit_densities(beta: float, lambda1: float, ell: int) -> tuple[float, float, float]:
    """
    Densities at the exit: periodic part, troughs, and their average.

    Returns:
        ``(rho1_plus, rho1_minus, rho1)`` with ``rho1 = ((ell-1) rho1_minus + rho1_plus)/ell``,
        which equals ``(1 - beta/lambda1)/ell``
    """
    _positive(beta=beta, lambda1=lambda1)
    if beta > lambda1:
        logger.warning("beta=%g exceeds lambda1=%g; exit densities clamped to 0", beta, lambda1)
        return 0.0, 0.0, 0.0
    plus = (lambda1 - beta) / (lambda1 + (ell - 1) * beta)
    minus = beta * plus / lambda1
    return plus, minus, ((ell - 1) * minus + plus) / ell


def _critical_rate(boundary_rate: float, lambda_min: float, ell: int) -> float:
    _positive(rate=boundary_rate, lambda_min=lambda_min)
    if lambda_min > boundary_rate * (1.0 + MINIMUM_TOLERANCE):
        raise DomainError(
            f"lambda_min={lambda_min} exceeds the boundary rate {boundary_rate}"
        )
    capacity = 1.0 / (1.0 + math.sqrt(ell)) ** 2
    shift = (ell - 1) * lambda_min * capacity
    radicand = (boundary_rate - shift) ** 2 - 4.0 * boundary_rate * lambda_min * capacity
    return 0.5 * (boundary_rate - shift - math.sqrt(max(radicand, 0.0)))


def critical_entry_rate(lambda0: float, lambda_min: float, ell: int) -> float:
    """Entry rate alpha* at which the inflow current reaches the transport capacity."""
    return _critical_rate(lambda0, lambda_min, ell)


def critical_exit_rate(lambda1: float, lambda_min: float, ell: int) -> float:
    """Exit rate beta* at which the outflow current reaches the transport capacity."""
    return _critical_rate(lambda1, lambda_min, ell)


def boundary_current(rate: float, boundary_rate: float, ell: int) -> float:
    """``r (lambda - r) / (lambda + (ell - 1) r)``, the current a boundary reservoir imposes."""
    return rate * (boundary_rate - rate) / (boundary_rate + (ell - 1) * rate)


def boundary_currents(
    alpha: float, beta: float, rates: RateProfile, ell: int
) -> tuple[float, float, float]:
    """Return ``(J_L, J_R, J_max)``."""
    _positive(alpha=alpha, beta=beta)
    j_max = rates.lambda_min * max_normalized_current(ell)
    return (
        boundary_current(alpha, rates.lambda0, ell),
        boundary_current(beta, rates.lambda1, ell),
        j_max,
    )


def hole_current_balance(alpha: float, lambda0: float, ell: int) -> tuple[float, float]:
    """
    Both sides of the hole balance at the entry: ``J_h(rho0_h, 0)`` and ``alpha rho0_h``.

    With ``rho0_h = 1 - ell rho0`` and rho0 from :func:`rho_zero` the two agree.

    Raises:
        DomainError: If alpha > lambda0 (negative hole density)
    """
    holes = 1.0 - ell * rho_zero(alpha, lambda0, ell)
    entry = make_rate_profile([lambda0])
    return hole_current(holes, 0.0, entry, ell), alpha * holes


def _raw_phase(alpha_below: bool, beta_below: bool, j_left: float, j_right: float) -> Phase:
    if alpha_below and not beta_below:
        return Phase.LD_I
    if beta_below and not alpha_below:
        return Phase.HD_I
    if alpha_below and beta_below:
        scale = max(j_left, j_right)
        if abs(j_left - j_right) <= CURRENT_TIE_TOLERANCE * scale:
            return Phase.COEXISTENCE
        # the shock drifts towards the boundary with the larger current
        return Phase.LD_II if j_left < j_right else Phase.HD_II
    return Phase.MC


def classify_phase(spec: ModelSpec) -> PhaseReport:
    """
    Classify the stationary phase of an open lattice.

    ``alpha < alpha*`` makes the entry binding and ``beta < beta*`` the exit.
    With one binding boundary the phase is LD_I or HD_I. With both, the
    boundary with the smaller current sets the bulk (LD_II when ``J_L < J_R``,
    which is a shock moving right, HD_II otherwise, coexistence on a tie).
    With neither, the rate minimum limits the current (MC). Parameters within
    1e-9 of alpha* or beta* are tagged as transition with ``resolved_phase``
    holding the strict classification.

    When both boundaries bind, the shock speed is the Rankine-Hugoniot speed
    between the lower-branch density of ``J_L`` and the upper-branch density of
    ``J_R`` at the first slowest site, reported as ``shock_position``.

    Raises:
        DomainError: For ring geometry
    """
    if spec.geometry is not Geometry.OPEN:
        raise DomainError("phase classification needs an open lattice")
    rates, ell = spec.rates, spec.ell
    alpha, beta = float(spec.alpha or 0.0), float(spec.beta or 0.0)
    lambda0, lambda1, lambda_min = rates.lambda0, rates.lambda1, rates.lambda_min

    alpha_star = critical_entry_rate(lambda0, lambda_min, ell)
    beta_star = critical_exit_rate(lambda1, lambda_min, ell)
    j_left, j_right, j_max = boundary_currents(alpha, beta, rates, ell)
    rho_0 = rho_zero(alpha, lambda0, ell)
    rho_1_plus, rho_1_minus, rho_1 = exit_densities(beta, lambda1, ell)

    resolved = _raw_phase(alpha < alpha_star, beta < beta_star, j_left, j_right)
    near_alpha = abs(alpha - alpha_star) <= TRANSITION_TOLERANCE * max(alpha_star, 1.0)
    near_beta = abs(beta - beta_star) <= TRANSITION_TOLERANCE * max(beta_star, 1.0)
    phase = Phase.TRANSITION if near_alpha or near_beta else resolved

    diagnostics: list[str] = []
    if rho_0 > 1.0 / ell:
        diagnostics.append(
            f"entry density {rho_0:.6g} exceeds 1/ell; alpha > lambda0 is non-binding"
        )
        logger.warning("Nonphysical entry density %.6g for alpha=%g", rho_0, alpha)
    if beta > lambda1:
        diagnostics.append(f"beta={beta:g} exceeds lambda1={lambda1:g}; exit densities clamped")

    if resolved.is_low_density:
        j_c = j_left
    elif resolved.is_high_density:
        j_c = j_right
    elif resolved is Phase.COEXISTENCE:
        j_c = 0.5 * (j_left + j_right)
    else:
        j_c = j_max
    j_c = min(j_c, j_max)

    speed = None
    shock_position = None
    if alpha < alpha_star and beta < beta_star:
        x_shock = rates.argmin[0]
        lam_shock = float(rates(x_shock))
        capacity = lam_shock * max_normalized_current(ell)
        if max(j_left, j_right) <= capacity:
            rho_left = H_inverse(j_left / lam_shock, ell, Branch.LOWER)
            rho_right = H_inverse(j_right / lam_shock, ell, Branch.UPPER)
            if rho_right > rho_left:
                speed = (j_right - j_left) / (rho_right - rho_left)
                shock_position = x_shock

    report = PhaseReport(
        phase=phase,
        resolved_phase=resolved,
        ell=ell,
        alpha=alpha,
        beta=beta,
        lambda0=lambda0,
        lambda1=lambda1,
        lambda_min=lambda_min,
        alpha_star=alpha_star,
        beta_star=beta_star,
        j_left=j_left,
        j_right=j_right,
        j_max=j_max,
        j_c=j_c,
        rho_0=rho_0,
        rho_1=rho_1,
        rho_1_plus=rho_1_plus,
        rho_1_minus=rho_1_minus,
        x_min_set=rates.argmin,
        shock_speed=speed,
        shock_position=shock_position,
        diagnostics=diagnostics,
    )
    logger.debug("Classified phase %s (J_c=%.6g, alpha*=%.6g, beta*=%.6g)", phase, j_c, alpha_star, beta_star)
    return report


def branch_density(current: float, lam: np.ndarray | float, ell: int, branch: Branch) -> np.ndarray:
    """
    Root of ``lambda H(rho) = current`` on one branch.

    Raises:
        DomainError: Where the current exceeds the local capacity ``lambda H(rho*)``
    """
    lam = np.asarray(lam, dtype=float)
    h = current / lam
    capacity = max_normalized_current(ell)
    excess = h > capacity * (1.0 + 1e-12)
    if np.any(excess):
        raise DomainError(
            f"current {current:.6g} exceeds the local capacity at {int(excess.sum())} grid points"
        )
    return np.asarray(H_inverse(np.minimum(h, capacity), ell, branch))


def stationary_profile(
    spec: ModelSpec,
    grid_size: int | None = None,
    grid: np.ndarray | None = None,
    report: PhaseReport | None = None,
) -> StationaryProfile:
    """
    Closed-form stationary density profile.

    Low-density phases follow the lower branch with ``J_c = J_L`` and
    high-density phases the upper branch with ``J_c = J_R``. In MC the profile
    follows the upper branch up to the first global minimum of lambda, passes
    through rho* there, and follows the lower branch after the last minimum;
    between two distinct minima the profile is indeterminate (NaN). On the
    coexistence line the shock position is not determined, so the whole
    interior is indeterminate and only the two branch curves are returned.

    Args:
        spec: Open-lattice model
        grid_size: Number of equally spaced points on [0, 1] (default N + 1)
        grid: Explicit grid, overrides ``grid_size``
        report: Precomputed classification

    Raises:
        DomainError: If fewer than two grid points are requested
    """
    report = report or classify_phase(spec)
    ell = spec.ell
    if grid is None:
        size = grid_size if grid_size is not None else spec.n_sites + 1
        if size < 2:
            raise DomainError("a profile needs at least two grid points")
        x = np.linspace(0.0, 1.0, size)
    else:
        x = np.asarray(grid, dtype=float)
    lam = np.asarray(spec.rates(x))
    j_c = report.j_c
    lower = branch_density(j_c, lam, ell, Branch.LOWER)
    upper = branch_density(j_c, lam, ell, Branch.UPPER)
    rho_star = critical_density(ell)
    phase = report.resolved_phase
    discontinuities: list[float] = []

    if phase.is_low_density:
        rho = lower.copy()
        branch = [Branch.LOWER] * len(x)
    elif phase.is_high_density:
        rho = upper.copy()
        branch = [Branch.UPPER] * len(x)
    elif phase is Phase.COEXISTENCE:
        rho = np.full(len(x), np.nan)
        branch = [Branch.INDETERMINATE] * len(x)
    else:
        minima = sorted(report.x_min_set)
        first, last = minima[0], minima[-1]
        at_minimum = lam <= report.lambda_min * (1.0 + MINIMUM_TOLERANCE)
        rho = np.where(x <= first, upper, np.where(x >= last, lower, np.nan))
        rho = np.where(at_minimum, rho_star, rho)
        branch = []
        for xi, at_min in zip(x, at_minimum, strict=True):
            if xi <= first:
                branch.append(Branch.UPPER)
            elif xi >= last or at_min:
                branch.append(Branch.LOWER)
            else:
                branch.append(Branch.INDETERMINATE)
        discontinuities = [first] if first == last else [first, last]

    return StationaryProfile(
        x=x,
        rho=rho,
        branch=branch,
        current=j_c,
        ell=ell,
        phase=report.phase,
        lower=lower,
        upper=upper,
        discontinuities=discontinuities,
    )


def hd_ld_separation(
    lambda0: float, lambda1: float, ell: int, alpha: float
) -> float:
    """
    Exit rate on the coexistence curve ``J_R(beta) = J_L(alpha)``.

    ``J_R`` increases in beta up to ``lambda1 / (1 + sqrt(ell))``; the root is
    bracketed on that increasing part and found by bisection to 1e-12.

    Raises:
        DomainError: If ``J_L(alpha)`` is not reachable by any exit rate
    """
    _positive(alpha=alpha, lambda0=lambda0, lambda1=lambda1)
    target = boundary_current(alpha, lambda0, ell)
    peak = lambda1 / (1.0 + math.sqrt(ell))
    if target <= 0:
        raise DomainError(f"alpha={alpha} carries no inflow current (alpha >= lambda0)")
    if target > boundary_current(peak, lambda1, ell) * (1.0 + 1e-12):
        raise DomainError(f"no exit rate balances the inflow current of alpha={alpha}")

    def balance(beta: float) -> float:
        return boundary_current(beta, lambda1, ell) - target

    if balance(peak) <= 0:
        return peak
    return float(bisect(balance, 0.0, peak, xtol=1e-12))


def boundary_table(spec: ModelSpec, report: PhaseReport | None = None) -> BoundaryTable:
    """
    Boundary densities of the classified phase.

    LD rows use ``J_L``: ``rho0`` from :func:`rho_zero`, ``rho1+ = J_L/beta``,
    ``rho1- = J_L/lambda1``. HD rows use ``J_R``: ``rho0 = (1 - J_R/alpha)/ell``
    and the exit densities of :func:`exit_densities`. MC uses ``J_max`` at both
    ends. ``residual`` is the largest violation of the balances
    ``alpha (1 - ell rho0) = J_c = beta rho1+ = lambda1 rho1-``.
    """
    report = report or classify_phase(spec)
    alpha, beta, ell = report.alpha, report.beta, report.ell
    lambda1 = report.lambda1
    phase = report.resolved_phase
    if phase.is_low_density or phase is Phase.COEXISTENCE:
        j_c = report.j_left
        rho_0 = report.rho_0
    elif phase.is_high_density:
        j_c = report.j_right
        rho_0 = (1.0 - j_c / alpha) / ell
    else:
        j_c = report.j_max
        rho_0 = (1.0 - j_c / alpha) / ell
    rho_1_plus = j_c / beta
    rho_1_minus = j_c / lambda1
    residual = max(
        abs(alpha * (1.0 - ell * rho_0) - j_c),
        abs(beta * rho_1_plus - j_c),
        abs(lambda1 * rho_1_minus - j_c),
    )
    return BoundaryTable(
        phase=phase,
        j_c=j_c,
        rho_0=rho_0,
        rho_1_plus=rho_1_plus,
        rho_1_minus=rho_1_minus,
        residual=residual,
    )


def _scan_row(rates: RateProfile, ell: int, alpha: float, betas: np.ndarray) -> list[str]:
    row = []
    for beta in betas:
        spec = ModelSpec(rates.n_sites, ell, rates, alpha=float(alpha), beta=float(beta))
        row.append(classify_phase(spec).phase.value)
    return row


def phase_scan(
    rates: RateProfile,
    ell: int,
    alphas: np.ndarray,
    betas: np.ndarray,
    workers: int = 1,
) -> pd.DataFrame:
    """Phase label for every (alpha, beta) pair, one row per pair."""
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    rows = Parallel(n_jobs=workers)(
        delayed(_scan_row)(rates, ell, alpha, betas) for alpha in alphas
    )
    records = [
        {"alpha": float(alpha), "beta": float(beta), "phase": label}
        for alpha, row in zip(alphas, rows, strict=True)
        for beta, label in zip(betas, row, strict=True)
    ]
    return pd.DataFrame.from_records(records, columns=["alpha", "beta", "phase"])


def profile_current(profile: StationaryProfile, rates: RateProfile) -> np.ndarray:
    """``lambda(x) H(rho(x))`` along a profile, NaN where rho is indeterminate."""
    values = np.full(len(profile.x), np.nan)
    known = np.isfinite(profile.rho)
    values[known] = np.asarray(rates(profile.x[known])) * np.asarray(H(profile.rho[known], profile.ell))
    return values

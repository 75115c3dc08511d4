"""Recover site rates and boundary rates from a stationary density profile.

Rates are identified up to a time scale, fixed by ``lambda(x0) = 1`` at an
anchor position. In the bulk ``lambda(x) H(rho(x)) = J`` gives the rate
profile; the boundary balances give the entry and exit rates.
"""

import logging

import numpy as np

from tasep_hydro.constants import INFERENCE_EPSILON, LOGGER_NAME
from tasep_hydro.core import H, RateProfile, critical_density
from tasep_hydro.errors import InferenceError
from tasep_hydro.models import DensityProfile, InferenceResult

logger = logging.getLogger(LOGGER_NAME)

# Window used to extrapolate the rate estimate to the exit; the last sites
# carry the exit boundary layer and are left out
EXIT_FIT_WINDOW = (0.88, 0.98)


def _anchor_density(profile: DensityProfile, x0_anchor: float) -> float:
    if not profile.x[0] <= x0_anchor <= profile.x[-1]:
        raise InferenceError(
            f"anchor x0={x0_anchor} outside the profile range [{profile.x[0]:g}, {profile.x[-1]:g}]"
        )
    return float(np.interp(x0_anchor, profile.x, profile.density))


def _exit_rate(x: np.ndarray, lam: np.ndarray, reliable: np.ndarray, diagnostics: list[str]) -> float:
    lo, hi = EXIT_FIT_WINDOW
    window = reliable & (x >= lo) & (x < hi)
    if np.count_nonzero(window) >= 2:
        slope, intercept = np.polyfit(x[window], lam[window], 1)
        return float(slope + intercept)
    diagnostics.append("too few reliable sites near the exit; using the last reliable rate")
    return float(lam[reliable][-1])


def infer_rates(
    profile: DensityProfile,
    ell: int,
    x0_anchor: float = 0.5,
    smoothing_window: int | None = None,
) -> InferenceResult:
    """
    Infer the rate profile and the boundary rates from stationary densities.

    Sites with densities within 1e-4 of 0 or 1/ell are flagged unreliable and
    carry NaN. The rate estimate is normalized so that its interpolant equals
    1 at ``x0_anchor``; the current ``J`` carries the same normalization.
    The entry rate is ``J / (1 - ell rho0)``. For the exit rate the bulk
    estimate is extrapolated linearly to x = 1, giving ``rho1- = J/lambda1``
    and ``rho1+ = ell rho1 - (ell - 1) rho1-``, and then ``beta = J / rho1+``.

    An entry (exit) rate is only identified when the entry (exit) boundary
    binds, i.e. when ``rho0 < rho*`` (``rho1 > rho*``); the flags on the
    result say which estimates are tight.

    Args:
        profile: Observed densities (first and last points act as rho0 and rho1)
        ell: Particle size
        x0_anchor: Position where lambda is set to 1
        smoothing_window: Optional odd moving-average window

    Raises:
        InferenceError: If the anchor or a boundary density makes the balance singular
    """
    profile = profile.smoothed(smoothing_window)
    x, rho = profile.x, profile.density
    top = 1.0 / ell
    anchor = _anchor_density(profile, x0_anchor)
    if not INFERENCE_EPSILON < anchor < top - INFERENCE_EPSILON:
        raise InferenceError(f"anchor density {anchor:.6g} too close to 0 or 1/ell")

    diagnostics: list[str] = []
    reliable = (rho > INFERENCE_EPSILON) & (rho < top - INFERENCE_EPSILON)
    if not reliable.all():
        count = int(np.count_nonzero(~reliable))
        diagnostics.append(f"{count} sites with densities near 0 or 1/ell left out")
        logger.warning("Rate inference skips %d unreliable sites", count)
    if not reliable.any():
        raise InferenceError("no site has a usable density")

    unnormalized = np.full(len(x), np.nan)
    unnormalized[reliable] = 1.0 / np.asarray(H(rho[reliable], ell))
    scale = float(np.interp(x0_anchor, x[reliable], unnormalized[reliable]))
    current = 1.0 / scale
    lam = unnormalized / scale
    estimate = RateProfile(site_rates=lam[reliable], nodes=x[reliable])

    rho_0 = float(rho[0])
    if not rho_0 < top - INFERENCE_EPSILON:
        raise InferenceError(f"entry density {rho_0:.6g} leaves no holes to balance the inflow")
    alpha = current / (1.0 - ell * rho_0)

    lambda1 = _exit_rate(x, lam, reliable, diagnostics)
    rho_1 = float(rho[-1])
    rho_1_minus = current / lambda1
    rho_1_plus = ell * rho_1 - (ell - 1) * rho_1_minus
    if rho_1_plus <= 0:
        raise InferenceError(f"exit density {rho_1:.6g} gives a nonpositive periodic part")
    beta = current / rho_1_plus

    rho_star = critical_density(ell)
    result = InferenceResult(
        x=x.copy(),
        lambda_estimate=estimate,
        lambda_values=lam,
        lambda_naive=_naive_values(profile, x0_anchor),
        reliable=reliable,
        alpha_estimate=alpha,
        beta_estimate=beta,
        current=current,
        x0_anchor=x0_anchor,
        alpha_identified=rho_0 < rho_star,
        beta_identified=rho_1 > rho_star,
        diagnostics=diagnostics,
    )
    logger.info("Inferred J=%.6g, alpha=%.6g, beta=%.6g", current, alpha, beta)
    return result


def _naive_values(profile: DensityProfile, x0_anchor: float) -> np.ndarray:
    anchor = _anchor_density(profile, x0_anchor)
    with np.errstate(divide="ignore"):
        return np.where(profile.density > 0, anchor / profile.density, np.nan)


def naive_estimate(profile: DensityProfile, x0_anchor: float = 0.5) -> RateProfile:
    """
    Collision-free estimate ``lambda(x) = rho(x0) / rho(x)``.

    Raises:
        InferenceError: If a density is not positive
    """
    if np.any(profile.density <= 0):
        raise InferenceError("naive estimate needs strictly positive densities")
    return RateProfile(site_rates=_naive_values(profile, x0_anchor), nodes=profile.x)

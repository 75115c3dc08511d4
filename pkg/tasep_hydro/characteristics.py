"""Characteristic curves of the hydrodynamic conservation law.

Along a characteristic ``dx/dt = lambda(x) H'(rho)`` and
``drho/dt = -lambda'(x) H(rho)``, so the current ``lambda(x) H(rho)`` is constant.
"""

import logging
import math

import numpy as np
import pandas as pd
from scipy.integrate import quad

from tasep_hydro.constants import (
    CHARACTERISTIC_DRIFT_TOLERANCE,
    CHARACTERISTIC_STEP,
    DEFAULT_TRACE_TIME,
    DOMAIN_TOLERANCE,
    LOGGER_NAME,
    REVERSAL_TIME_TOLERANCE,
)
from tasep_hydro.core import (
    H,
    H_inverse,
    H_prime,
    ModelSpec,
    RateProfile,
    critical_density,
    max_normalized_current,
)
from tasep_hydro.errors import DomainError, IntegrationError
from tasep_hydro.hydro import exit_densities, rho_zero
from tasep_hydro.models import Branch, CharacteristicTrace, Interpolation, TraceOutcome

logger = logging.getLogger(LOGGER_NAME)


class _Integrator:
    """Classical fourth-order Runge-Kutta for one characteristic."""

    def __init__(self, rates: RateProfile, ell: int) -> None:
        self.rates = rates
        self.ell = ell
        self.top = 1.0 / ell

    def rhs(self, x: float, rho: float, side: float) -> tuple[float, float]:
        rho = min(max(rho, 0.0), self.top)
        speed = float(self.rates(x)) * H_prime(rho, self.ell)
        drift = -float(self.rates.derivative_at(x, side)) * H(rho, self.ell)
        return speed, drift

    def step(self, x: float, rho: float, h: float, side: float) -> tuple[float, float]:
        k1x, k1r = self.rhs(x, rho, side)
        k2x, k2r = self.rhs(x + 0.5 * h * k1x, rho + 0.5 * h * k1r, side)
        k3x, k3r = self.rhs(x + 0.5 * h * k2x, rho + 0.5 * h * k2r, side)
        k4x, k4r = self.rhs(x + h * k3x, rho + h * k3r, side)
        x_new = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        rho_new = rho + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        return x_new, min(max(rho_new, 0.0), self.top)

    def current(self, x: float, rho: float) -> float:
        return float(self.rates(x)) * H(rho, self.ell)

    def direction(self, rho: float) -> float:
        return float(np.sign(H_prime(rho, self.ell)))


def _bisect_step(condition, h: float, tolerance: float) -> float:
    """Smallest sub-step (to ``tolerance``) at which ``condition`` becomes true."""
    lo, hi = 0.0, h
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if condition(mid):
            hi = mid
        else:
            lo = mid
    return hi


def trace_characteristic(
    x0: float,
    rho0: float,
    rates: RateProfile,
    ell: int,
    t_max: float = DEFAULT_TRACE_TIME,
    step: float | None = None,
) -> CharacteristicTrace:
    """
    Integrate the characteristic starting at ``(x0, rho0)``.

    The trace ends when it leaves [0, 1], when ``dx/dt`` changes sign
    (reversal, located by bisection to 1e-9 in time), or at ``t_max``. At
    kinks of a piecewise-linear rate profile the slope on the side of travel
    is used.

    Args:
        x0: Starting position in [0, 1]
        rho0: Starting density in [0, 1/ell]
        rates: Rate profile
        ell: Particle size
        t_max: Time limit
        step: Fixed step (default ``min(1e-3, a/2)`` with a = 1/N)

    Returns:
        CharacteristicTrace with one sample per step

    Raises:
        DomainError: For a start outside the domain or a nonpositive step
        IntegrationError: If the current drifts by more than 1e-6 (relative)
    """
    if not 0.0 <= x0 <= 1.0:
        raise DomainError(f"x0={x0} outside [0, 1]")
    if t_max <= 0:
        raise DomainError("t_max must be positive")
    h = step if step is not None else min(CHARACTERISTIC_STEP, 0.5 * rates.lattice_spacing)
    if h <= 0:
        raise DomainError("integration step must be positive")

    flow = _Integrator(rates, ell)
    if not 0.0 <= rho0 <= flow.top + DOMAIN_TOLERANCE:
        raise DomainError(f"rho0={rho0} outside [0, 1/ell]")
    rho = float(np.clip(rho0, 0.0, flow.top))
    j0 = flow.current(x0, rho)
    scale = j0 if j0 > 0 else 1.0
    direction = flow.direction(rho)

    times, positions, densities = [0.0], [float(x0)], [rho]
    t, x = 0.0, float(x0)
    max_drift = 0.0
    outcome = TraceOutcome.MAX_TIME
    reversal_time = reversal_position = exit_time = exit_position = None

    while t < t_max:
        dt = min(h, t_max - t)
        side = direction if direction != 0 else 1.0
        x_new, rho_new = flow.step(x, rho, dt, side)
        new_direction = flow.direction(rho_new)

        if direction != 0 and new_direction == -direction:
            theta = _bisect_step(
                lambda s: flow.direction(flow.step(x, rho, s, side)[1]) != direction,
                dt,
                REVERSAL_TIME_TOLERANCE,
            )
            x_rev, rho_rev = flow.step(x, rho, theta, side)
            if 0.0 <= x_rev <= 1.0:
                t += theta
                x, rho = x_rev, rho_rev
                times.append(t)
                positions.append(x)
                densities.append(rho)
                outcome = TraceOutcome.REVERSED
                reversal_time, reversal_position = t, x
                break

        if not 0.0 <= x_new <= 1.0:
            boundary = 1.0 if x_new > 1.0 else 0.0
            theta = _bisect_step(
                lambda s: not 0.0 <= flow.step(x, rho, s, side)[0] <= 1.0,
                dt,
                1e-14,
            )
            _, rho = flow.step(x, rho, theta, side)
            t += theta
            x = boundary
            times.append(t)
            positions.append(x)
            densities.append(rho)
            outcome = TraceOutcome.REACHED_END
            exit_time, exit_position = t, x
            break

        t += dt
        x, rho = x_new, rho_new
        drift = abs(flow.current(x, rho) - j0)
        max_drift = max(max_drift, drift)
        if drift > CHARACTERISTIC_DRIFT_TOLERANCE * scale:
            raise IntegrationError(
                f"current drifted by {drift:.3e} at t={t:.6g}, x={x:.6g}; reduce the step below {h:g}"
            )
        if direction == 0:
            direction = new_direction
        times.append(t)
        positions.append(x)
        densities.append(rho)

    logger.debug("Characteristic from x0=%g, rho0=%g ended with %s at t=%.6g", x0, rho0, outcome, t)
    return CharacteristicTrace(
        times=np.asarray(times),
        positions=np.asarray(positions),
        densities=np.asarray(densities),
        outcome=outcome,
        current=j0,
        max_current_drift=max_drift,
        reversal_time=reversal_time,
        reversal_position=reversal_position,
        exit_time=exit_time,
        exit_position=exit_position,
    )


def _path_minimum(rates: RateProfile, a: float, b: float) -> float:
    grid = np.linspace(a, b, 2001)
    inside = [p for p in (*rates.argmin, *np.asarray(rates.nodes)) if a <= p <= b]
    return float(np.min(rates(np.concatenate([grid, inside]))))


def travel_time(
    x0: float, rho0: float, x_target: float, rates: RateProfile, ell: int
) -> float:
    """
    Time for the characteristic from ``(x0, rho0)`` to reach ``x_target``.

    Separating variables gives ``dt = dy / (lambda(y) H'(H^-1(J / lambda(y))))``
    with the branch of H^-1 fixed by rho0 (lower iff rho0 < rho*). The
    integral is evaluated by adaptive quadrature.

    Returns:
        Travel time, ``math.inf`` if the characteristic stalls on the way
        (the current reaches the local capacity)

    Raises:
        DomainError: If the target lies against the direction of travel
    """
    if x_target == x0:
        return 0.0
    for name, value in (("x0", x0), ("x_target", x_target)):
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"{name}={value} outside [0, 1]")
    speed = H_prime(rho0, ell)
    if speed == 0:
        return math.inf
    if (x_target - x0) * speed < 0:
        raise DomainError(
            f"characteristic from x0={x0} with rho0={rho0} moves away from {x_target}"
        )

    current = float(rates(x0)) * H(rho0, ell)
    lo, hi = sorted((x0, x_target))
    capacity = _path_minimum(rates, lo, hi) * max_normalized_current(ell)
    if current >= capacity * (1.0 - 1e-9):
        logger.warning("Characteristic stalls between %g and %g: infinite travel time", lo, hi)
        return math.inf
    branch = Branch.LOWER if rho0 < critical_density(ell) else Branch.UPPER

    def integrand(y: float) -> float:
        lam = float(rates(y))
        return 1.0 / (lam * H_prime(H_inverse(current / lam, ell, branch), ell))

    breaks = []
    if rates.interpolation is not Interpolation.ANALYTIC:
        breaks = [float(p) for p in np.asarray(rates.nodes) if lo < p < hi]
    value, _ = quad(integrand, lo, hi, points=breaks or None, limit=max(200, 4 * len(breaks)))
    return abs(float(value))


def shock_speed(rho_left: float, rho_right: float, j_left: float, j_right: float) -> float:
    """
    Rankine-Hugoniot speed ``(J_right - J_left) / (rho_right - rho_left)``.

    Raises:
        DomainError: If the two densities coincide
    """
    if rho_right == rho_left:
        raise DomainError("shock speed is undefined for equal densities")
    return (j_right - j_left) / (rho_right - rho_left)


def boundary_characteristics(
    spec: ModelSpec, t_max: float = DEFAULT_TRACE_TIME, step: float | None = None
) -> tuple[CharacteristicTrace, CharacteristicTrace]:
    """Trace the characteristics issued from the entry density at x=0 and the exit density at x=1."""
    if not spec.is_open:
        raise DomainError("boundary characteristics need an open lattice")
    ell = spec.ell
    rho_left = min(rho_zero(float(spec.alpha or 0.0), spec.rates.lambda0, ell), 1.0 / ell)
    rho_right = exit_densities(float(spec.beta or 0.0), spec.rates.lambda1, ell)[2]
    return (
        trace_characteristic(0.0, rho_left, spec.rates, ell, t_max, step),
        trace_characteristic(1.0, rho_right, spec.rates, ell, t_max, step),
    )


def trace_to_frame(*traces: CharacteristicTrace) -> pd.DataFrame:
    """Stack traces into one table with columns ``trace, t, x, rho``."""
    frames = [trace.to_frame().assign(trace=i) for i, trace in enumerate(traces)]
    if not frames:
        return pd.DataFrame(columns=["trace", "t", "x", "rho"])
    return pd.concat(frames, ignore_index=True)[["trace", "t", "x", "rho"]]

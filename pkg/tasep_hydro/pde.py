"""Finite-volume relaxation of the hydrodynamic conservation law.

Cell averages evolve with the supply/demand (Godunov) flux for the concave
current ``lambda H``: the demand of the upstream cell is ``lambda H(min(rho, rho*))``,
the supply of the downstream cell ``lambda H(max(rho, rho*))``, and the
interface carries the smaller of the two. Boundary reservoirs are ghost cells
at x=0 (rate lambda0) and x=1 (rate lambda1).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from tasep_hydro.constants import LOGGER_NAME
from tasep_hydro.core import ModelSpec, RateProfile, critical_density
from tasep_hydro.errors import ConvergenceError, DomainError
from tasep_hydro.hydro import classify_phase, exit_densities, rho_zero
from tasep_hydro.models import Branch, InitialCondition, PhaseReport, StationaryProfile

logger = logging.getLogger(LOGGER_NAME)

# Residual checks between progress reports
REPORT_EVERY = 100_000


@njit(cache=True)
def _h(r, ell):
    return r * (1.0 - ell * r) / (1.0 - (ell - 1) * r)


@njit(cache=True)
def _g(r, ell):
    return (1.0 - ell * r) / (1.0 - (ell - 1) * r)


@njit(cache=True)
def _interface_fluxes(rho, lam, ell, rho_star, nu, dx, out):
    m = rho.shape[0] - 2
    for i in range(m + 1):
        demand = lam[i] * _h(min(rho[i], rho_star), ell)
        supply = lam[i + 1] * _h(max(rho[i + 1], rho_star), ell)
        value = min(demand, supply)
        if nu > 0.0:
            value += nu * (lam[i + 1] * _g(rho[i + 1], ell) - lam[i] * _g(rho[i], ell)) / dx
        out[i] = value


@njit(cache=True)
def _evolve(rho, lam, ell, rho_star, nu, dx, dt, max_steps, tol, transmissive):
    """
    Advance ``rho`` (ghosts at both ends) by up to ``max_steps`` steps in place.

    Stops early once ``max |drho| / dt`` drops below ``tol``; a negative
    ``tol`` runs all steps. Returns (steps, residual).
    """
    m = rho.shape[0] - 2
    flux = np.empty(m + 1)
    top = 1.0 / ell
    residual = np.inf
    steps = 0
    while steps < max_steps:
        if transmissive:
            rho[0] = rho[1]
            rho[m + 1] = rho[m]
        _interface_fluxes(rho, lam, ell, rho_star, nu, dx, flux)
        change = 0.0
        for i in range(1, m + 1):
            new = rho[i] + dt / dx * (flux[i - 1] - flux[i])
            if new < 0.0:
                new = 0.0
            elif new > top:
                new = top
            delta = abs(new - rho[i])
            if delta > change:
                change = delta
            rho[i] = new
        steps += 1
        residual = change / dt
        if residual < tol:
            break
    return steps, residual


@dataclass
class PdeGrid:
    """
    Cell-centred grid on [0, 1] with one ghost cell at each end.

    ``rho`` and ``lam`` have length ``cells + 2``; index 0 is the entry
    reservoir and index ``cells + 1`` the exit reservoir.
    """

    cells: int
    ell: int
    rho: np.ndarray
    lam: np.ndarray
    viscosity: float = 0.0
    cfl: float = 0.9
    transmissive: bool = False
    time: float = field(default=0.0, init=False)

    def __post_init__(self) -> None:
        if self.cells < 2:
            raise DomainError("the finite-volume grid needs at least two cells")
        if not 0 < self.cfl <= 1:
            raise DomainError(f"CFL number must lie in (0, 1], got {self.cfl}")
        self.rho = np.ascontiguousarray(self.rho, dtype=float)
        self.lam = np.ascontiguousarray(self.lam, dtype=float)
        if self.rho.shape != (self.cells + 2,) or self.lam.shape != (self.cells + 2,):
            raise DomainError("grid arrays must hold cells + 2 values")
        top = 1.0 / self.ell
        if np.any(self.rho < 0) or np.any(self.rho > top + 1e-12):
            raise DomainError("grid densities must lie in [0, 1/ell]")

    @classmethod
    def create(
        cls,
        rates: RateProfile,
        ell: int,
        cells: int,
        left_density: float,
        right_density: float,
        initial: InitialCondition | str | np.ndarray = InitialCondition.EMPTY,
        viscosity: float = 0.0,
        cfl: float = 0.9,
        transmissive: bool = False,
    ) -> "PdeGrid":
        """
        Build a grid with reservoir densities and an initial condition.

        ``initial`` is ``empty`` (rho = 0), ``step`` (0 left of x = 1/2 and
        1/ell to the right) or an explicit array of cell densities.
        """
        x = (np.arange(cells) + 0.5) / cells
        lam = np.empty(cells + 2)
        lam[1:-1] = rates(x)
        lam[0] = rates.lambda0
        lam[-1] = rates.lambda1
        rho = np.zeros(cells + 2)
        if isinstance(initial, np.ndarray):
            rho[1:-1] = initial
        elif InitialCondition(initial) is InitialCondition.STEP:
            rho[1:-1] = np.where(x < 0.5, 0.0, 1.0 / ell)
        rho[0] = left_density
        rho[-1] = right_density
        return cls(cells, ell, rho, lam, viscosity, cfl, transmissive)

    @property
    def dx(self) -> float:
        return 1.0 / self.cells

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.cells) + 0.5) / self.cells

    @property
    def density(self) -> np.ndarray:
        return self.rho[1:-1].copy()

    def time_step(self) -> float:
        """Largest stable step: the CFL bound for wave speeds up to ``ell lambda_max``, and the diffusive bound."""
        lam_max = float(self.lam.max())
        dt = self.cfl * self.dx / (self.ell * lam_max)
        if self.viscosity > 0:
            dt = min(dt, 0.4 * self.dx**2 / (self.viscosity * lam_max * self.ell**2))
        return dt

    def interface_fluxes(self) -> np.ndarray:
        flux = np.empty(self.cells + 1)
        _interface_fluxes(
            self.rho,
            self.lam,
            self.ell,
            critical_density(self.ell),
            self.viscosity,
            self.dx,
            flux,
        )
        return flux


class PdeSolver:
    """Explicit time stepping on a :class:`PdeGrid`."""

    def __init__(self, grid: PdeGrid) -> None:
        self.grid = grid
        self.dt = grid.time_step()
        self.steps = 0
        self.residual = math.inf

    def _run(self, dt: float, max_steps: int, tol: float) -> int:
        grid = self.grid
        steps, residual = _evolve(
            grid.rho,
            grid.lam,
            grid.ell,
            critical_density(grid.ell),
            grid.viscosity,
            grid.dx,
            dt,
            max_steps,
            tol,
            grid.transmissive,
        )
        steps = int(steps)
        self.steps += steps
        self.residual = float(residual)
        grid.time += steps * dt
        return steps

    def step(self) -> float:
        """One explicit step; returns ``max |drho/dt|``."""
        self._run(self.dt, 1, -1.0)
        return self.residual

    def advance(self, t: float) -> None:
        """Evolve the grid by a time span ``t``."""
        if t < 0:
            raise DomainError("cannot advance by a negative time")
        full = int(t // self.dt)
        if full:
            self._run(self.dt, full, -1.0)
        rest = t - full * self.dt
        if rest > 1e-15:
            self._run(rest, 1, -1.0)

    def relax(self, tol: float = 1e-7, max_steps: int = 5_000_000) -> int:
        """
        Step until ``max |drho/dt| < tol``.

        Returns:
            Number of steps taken

        Raises:
            ConvergenceError: If the tolerance is not reached within ``max_steps``
        """
        taken = 0
        while taken < max_steps:
            chunk = min(REPORT_EVERY, max_steps - taken)
            done = self._run(self.dt, chunk, tol)
            taken += done
            if self.residual < tol:
                logger.info("Finite-volume solver converged after %d steps (residual %.3e)", taken, self.residual)
                return taken
            logger.debug("Finite-volume residual %.3e after %d steps", self.residual, taken)
        raise ConvergenceError(
            f"no steady state after {max_steps} steps (residual {self.residual:.3e})",
            residual=self.residual,
        )


def boundary_reservoirs(spec: ModelSpec, report: PhaseReport | None = None) -> tuple[float, float]:
    """
    Ghost-cell densities at the two ends.

    The entry reservoir holds rho0 when ``alpha < alpha*`` and rho* otherwise,
    so its demand is ``J_L`` or the full capacity ``lambda0 H(rho*)``. The exit
    reservoir holds ``(1 - beta/lambda1)/ell`` when ``beta < beta*`` and rho*
    otherwise, so its supply is ``J_R`` or ``lambda1 H(rho*)``.
    """
    report = report or classify_phase(spec)
    ell = spec.ell
    rho_star = critical_density(ell)
    alpha, beta = report.alpha, report.beta
    left = rho_zero(alpha, report.lambda0, ell) if alpha < report.alpha_star else rho_star
    right = exit_densities(beta, report.lambda1, ell)[2] if beta < report.beta_star else rho_star
    return left, right


def _branch_labels(rho: np.ndarray, ell: int) -> list[Branch]:
    rho_star = critical_density(ell)
    return [Branch.LOWER if value < rho_star else Branch.UPPER for value in rho]


def solve_steady(
    spec: ModelSpec,
    cells: int = 1000,
    tol: float = 1e-7,
    max_steps: int = 5_000_000,
    cfl: float = 0.9,
    viscosity: bool = False,
    initial: InitialCondition | str = InitialCondition.EMPTY,
    report: PhaseReport | None = None,
) -> StationaryProfile:
    """
    Relax the open lattice's conservation law to its steady state.

    Args:
        spec: Open-lattice model
        cells: Number of finite-volume cells
        tol: Convergence threshold on ``max |drho/dt|``
        max_steps: Step limit
        cfl: CFL number in (0, 1]
        viscosity: Add the ``a/2`` second-order correction (a = 1/N)
        initial: ``empty`` or ``step``
        report: Precomputed phase classification

    Returns:
        StationaryProfile on the cell centres with ``source="pde"``. Branch
        labels follow rho < rho* (lower) or rho >= rho* (upper); label
        changes are listed as discontinuities.

    Raises:
        ConvergenceError: If the steady state is not reached
    """
    report = report or classify_phase(spec)
    left, right = boundary_reservoirs(spec, report)
    nu = 0.5 * spec.rates.lattice_spacing if viscosity else 0.0
    grid = PdeGrid.create(spec.rates, spec.ell, cells, left, right, initial, nu, cfl)
    solver = PdeSolver(grid)
    logger.info("Relaxing %d cells (dt=%.3e, viscosity=%s)", cells, solver.dt, viscosity)
    steps = solver.relax(tol, max_steps)

    x = grid.x
    rho = grid.density
    branch = _branch_labels(rho, spec.ell)
    flux = grid.interface_fluxes()
    changes = [
        0.5 * (x[i] + x[i + 1]) for i in range(cells - 1) if branch[i] is not branch[i + 1]
    ]
    return StationaryProfile(
        x=x,
        rho=rho,
        branch=branch,
        current=float(np.mean(flux)),
        ell=spec.ell,
        phase=report.phase,
        discontinuities=changes,
        interface_flux=flux,
        residual=solver.residual,
        steps=steps,
        source="pde",
    )

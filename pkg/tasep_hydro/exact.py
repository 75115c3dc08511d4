"""Exact stationary distribution of small lattices by state-space enumeration."""

import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.sparse.linalg import spsolve

from tasep_hydro.constants import (
    EXACT_DENSE_LIMIT,
    EXACT_MAX_STATES,
    EXACT_RESIDUAL_TOLERANCE,
    LOGGER_NAME,
)
from tasep_hydro.core import ModelSpec
from tasep_hydro.errors import ExactSolveError, ReducibleChainError, StateSpaceTooLargeError
from tasep_hydro.models import EventKind, Geometry
from tasep_hydro.simulate.lattice import apply_event, enabled_events

logger = logging.getLogger(LOGGER_NAME)

State = tuple[int, ...]


@dataclass
class StateSpace:
    """All admissible configurations of one lattice, with an ordinal index."""

    n_sites: int
    ell: int
    geometry: Geometry
    particles: int | None
    states: list[State]
    index: dict[State, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self.index:
            self.index = {state: i for i, state in enumerate(self.states)}

    def __len__(self) -> int:
        return len(self.states)

    def occupancy_matrix(self) -> np.ndarray:
        """(states x sites) 0/1 matrix."""
        tau = np.zeros((len(self.states), self.n_sites))
        for row, state in enumerate(self.states):
            for site in state:
                tau[row, site - 1] = 1.0
        return tau


def state_count(n_sites: int, ell: int, geometry: Geometry | str, particles: int | None = None) -> int:
    """
    Number of admissible configurations.

    Open lattice: ``sum_k C(N - (k-1)(ell-1), k)``. Ring with M >= 1 particles:
    ``(N/M) C(N - M ell + M - 1, M - 1)``.
    """
    if Geometry(geometry) is Geometry.OPEN:
        total = 0
        for k in range(n_sites + 1):
            free = n_sites - max(k - 1, 0) * (ell - 1)
            if free < k:
                break
            total += math.comb(free, k)
        return total
    m = int(particles or 0)
    if m == 0:
        return 1
    return n_sites * math.comb(n_sites - m * ell + m - 1, m - 1) // m


def _open_states(n_sites: int, ell: int) -> Iterator[State]:
    prefix: list[int] = []

    def extend(start: int) -> Iterator[State]:
        yield tuple(prefix)
        for site in range(start, n_sites + 1):
            prefix.append(site)
            yield from extend(site + ell)
            prefix.pop()

    yield from extend(1)


def _ring_states(n_sites: int, ell: int, particles: int) -> Iterator[State]:
    if particles == 0:
        yield ()
        return
    prefix: list[int] = []

    def extend(start: int, remaining: int) -> Iterator[State]:
        if remaining == 0:
            if prefix[0] + n_sites - prefix[-1] >= ell:
                yield tuple(prefix)
            return
        for site in range(start, n_sites + 1):
            prefix.append(site)
            yield from extend(site + ell, remaining - 1)
            prefix.pop()

    yield from extend(1, particles)


def enumerate_states(spec: ModelSpec) -> StateSpace:
    """
    Raises:
        StateSpaceTooLargeError: Beyond one million configurations
    """
    count = state_count(spec.n_sites, spec.ell, spec.geometry, spec.particles)
    if count > EXACT_MAX_STATES:
        raise StateSpaceTooLargeError(
            f"{count} states exceed the enumeration limit of {EXACT_MAX_STATES}"
        )
    if spec.is_open:
        states = list(_open_states(spec.n_sites, spec.ell))
    else:
        states = list(_ring_states(spec.n_sites, spec.ell, int(spec.particles or 0)))
    return StateSpace(spec.n_sites, spec.ell, spec.geometry, spec.particles, states)


def generator_matrix(spec: ModelSpec, space: StateSpace) -> sparse.csr_matrix:
    """Generator Q with ``Q[i, j]`` the rate from state i to state j and zero row sums."""
    rows: list[int] = []
    cols: list[int] = []
    values: list[float] = []
    for i, state in enumerate(space.states):
        outflow = 0.0
        for event, rate in enabled_events(state, spec):
            target = apply_event(state, event, spec.n_sites, spec.geometry)
            rows.append(i)
            cols.append(space.index[target])
            values.append(rate)
            outflow += rate
        rows.append(i)
        cols.append(i)
        values.append(-outflow)
    size = len(space)
    return sparse.csr_matrix((values, (rows, cols)), shape=(size, size))


def stationary_distribution(spec: ModelSpec) -> tuple[np.ndarray, StateSpace]:
    """
    Solve ``pi Q = 0`` with ``sum(pi) = 1``.

    The last balance equation is replaced by the normalization. Systems up to
    a few thousand states are solved densely, larger ones with a sparse direct
    solver.

    Returns:
        (pi, state space)

    Raises:
        ReducibleChainError: For a completely packed ring (every state absorbing)
        StateSpaceTooLargeError: Beyond the enumeration limit
        ExactSolveError: If the residual exceeds 1e-10
    """
    if spec.geometry is Geometry.RING and spec.particles and spec.particles * spec.ell == spec.n_sites:
        raise ReducibleChainError(
            "packed ring: every configuration is absorbing, no unique stationary law"
        )
    space = enumerate_states(spec)
    q = generator_matrix(spec, space)
    size = len(space)
    rhs = np.zeros(size)
    rhs[-1] = 1.0

    if size <= EXACT_DENSE_LIMIT:
        system = q.T.toarray()
        system[-1, :] = 1.0
        try:
            pi = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError as e:
            raise ExactSolveError(f"singular generator: {e}") from e
    else:
        system = q.T.tolil()
        system[-1, :] = np.ones(size)
        pi = spsolve(system.tocsc(), rhs)

    residual = float(np.max(np.abs(q.T @ pi))) if size > 1 else 0.0
    if not np.all(np.isfinite(pi)) or residual >= EXACT_RESIDUAL_TOLERANCE:
        raise ExactSolveError(f"stationary residual {residual:.3e} above tolerance")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    logger.info("Exact stationary law over %d states (residual %.2e)", size, residual)
    return pi, space


def exact_site_densities(pi: np.ndarray, space: StateSpace) -> np.ndarray:
    return pi @ space.occupancy_matrix()


def exact_bond_currents(pi: np.ndarray, space: StateSpace, spec: ModelSpec) -> np.ndarray:
    """
    Stationary current across the bond leaving each site 1..N.

    On the open lattice the entry for site N is the exit current.
    """
    currents = np.zeros(spec.n_sites)
    for probability, state in zip(pi, space.states, strict=True):
        for event, rate in enabled_events(state, spec):
            if event.kind is not EventKind.ENTRY:
                currents[event.site - 1] += probability * rate
    return currents


def exact_current(pi: np.ndarray, space: StateSpace, spec: ModelSpec) -> float:
    """
    Stationary current.

    Open lattice: ``alpha P(sites 1..ell empty)`` which must equal
    ``beta P(tau_N = 1)``. Ring: the common value of all bond currents.

    Raises:
        ExactSolveError: If the two sides disagree beyond 1e-10
    """
    if spec.is_open:
        entry = 0.0
        exit_ = 0.0
        for probability, state in zip(pi, space.states, strict=True):
            if not state or state[0] > spec.ell:
                entry += probability * float(spec.alpha or 0.0)
            if state and state[-1] == spec.n_sites:
                exit_ += probability * float(spec.beta or 0.0)
        if abs(entry - exit_) > EXACT_RESIDUAL_TOLERANCE:
            raise ExactSolveError(f"entry current {entry} differs from exit current {exit_}")
        return exit_

    currents = exact_bond_currents(pi, space, spec)
    if np.ptp(currents) > EXACT_RESIDUAL_TOLERANCE:
        raise ExactSolveError(f"ring bond currents differ by {np.ptp(currents):.3e}")
    return float(currents.mean())


def exact_profile_frame(pi: np.ndarray, space: StateSpace, spec: ModelSpec) -> pd.DataFrame:
    """Densities in the simulator's CSV schema (zero standard errors)."""
    return pd.DataFrame(
        {
            "site": np.arange(1, spec.n_sites + 1),
            "density": exact_site_densities(pi, space),
            "density_stderr": np.zeros(spec.n_sites),
            "bond_current": exact_bond_currents(pi, space, spec),
        }
    )

"""Lattice configurations, elementary events and the TASEP-ZRP correspondence."""

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from tasep_hydro.errors import SimulationError
from tasep_hydro.models import EventKind, Geometry

if TYPE_CHECKING:
    from tasep_hydro.core import ModelSpec


@dataclass(frozen=True)
class Event:
    """One executed move; ``site`` is the reference point before the move (1 for entry)."""

    kind: EventKind
    site: int


@dataclass
class LatticeState:
    """Reference points of all particles, in increasing order."""

    positions: list[int]
    n_sites: int
    ell: int
    geometry: Geometry = Geometry.OPEN
    time: float = 0.0

    def __post_init__(self) -> None:
        self.geometry = Geometry(self.geometry)
        self.positions = [int(p) for p in self.positions]
        self.validate()

    def validate(self) -> None:
        """
        Check the exclusion invariant.

        Raises:
            SimulationError: If positions are unordered, out of range or closer than ell
        """
        positions = self.positions
        if any(p < 1 or p > self.n_sites for p in positions):
            raise SimulationError(f"positions {positions} outside 1..{self.n_sites}")
        for left, right in zip(positions, positions[1:], strict=False):
            if right - left < self.ell:
                raise SimulationError(f"reference points {left} and {right} closer than {self.ell}")
        if (
            self.geometry is Geometry.RING
            and len(positions) > 1
            and positions[0] + self.n_sites - positions[-1] < self.ell
        ):
            raise SimulationError("wraparound gap smaller than ell")

    @property
    def particles(self) -> int:
        return len(self.positions)

    def occupancy(self) -> np.ndarray:
        """0/1 array over sites 1..N."""
        tau = np.zeros(self.n_sites, dtype=np.int8)
        if self.positions:
            tau[np.asarray(self.positions) - 1] = 1
        return tau


@dataclass
class ZrpState:
    """Gaps ahead of each TASEP particle plus the site of particle 1."""

    gaps: list[int]
    anchor: int

    def holes(self) -> int:
        return sum(self.gaps)


def enabled_events(
    positions: tuple[int, ...] | list[int], spec: "ModelSpec"
) -> list[tuple[Event, float]]:
    """
    All events enabled in a configuration with their rates.

    Open lattice: entry at rate alpha iff sites 1..ell hold no reference point;
    a particle at ``i < N`` hops at rate ``p_i`` iff ``i+1..i+ell`` hold no
    reference point; the particle at N exits at rate beta. Ring: the same hop
    rule with cyclic distances.
    """
    n, ell = spec.n_sites, spec.ell
    rates = spec.rates.site_rates
    events: list[tuple[Event, float]] = []
    count = len(positions)

    if spec.is_open:
        alpha, beta = float(spec.alpha or 0.0), float(spec.beta or 0.0)
        if count == 0 or positions[0] > ell:
            events.append((Event(EventKind.ENTRY, 1), alpha))
        for index, site in enumerate(positions):
            if site == n:
                events.append((Event(EventKind.EXIT, n), beta))
                continue
            ahead = positions[index + 1] if index + 1 < count else None
            if ahead is None or ahead - site > ell:
                events.append((Event(EventKind.HOP, site), float(rates[site - 1])))
        return events

    for index, site in enumerate(positions):
        if count == 1:
            distance = n
        else:
            ahead = positions[(index + 1) % count]
            distance = (ahead - site) % n
        if distance > ell:
            events.append((Event(EventKind.HOP, site), float(rates[site - 1])))
    return events


def apply_event(
    positions: tuple[int, ...] | list[int], event: Event, n_sites: int, geometry: Geometry
) -> tuple[int, ...]:
    """Configuration after ``event``; positions stay sorted."""
    if event.kind is EventKind.ENTRY:
        return (1, *positions)
    if event.kind is EventKind.EXIT:
        return tuple(positions[:-1])
    moved = [p + 1 if p == event.site else p for p in positions]
    if geometry is Geometry.RING and moved[-1] > n_sites:
        return (1, *moved[:-1])
    return tuple(moved)


def initial_ring_state(n_sites: int, ell: int, particles: int) -> LatticeState:
    """Spread ``particles`` evenly: particle i (0-based) at ``1 + floor(i N / M)``."""
    if particles == 0:
        return LatticeState([], n_sites, ell, Geometry.RING)
    positions = [1 + (i * n_sites) // particles for i in range(particles)]
    return LatticeState(positions, n_sites, ell, Geometry.RING)


def lattice_to_zrp(state: LatticeState) -> ZrpState:
    """
    Gaps of a ring configuration, particle 1 being the lowest reference point.

    ``gaps[i]`` counts the empty sites between particle i+1's extent and the next
    particle, so ``sum(gaps) = N - M ell``.

    Raises:
        SimulationError: For open lattices or an empty ring
    """
    if state.geometry is not Geometry.RING:
        raise SimulationError("the zero-range mapping is defined on the ring")
    positions = state.positions
    count = len(positions)
    if count == 0:
        raise SimulationError("an empty ring has no zero-range representation")
    gaps = [positions[i + 1] - positions[i] - state.ell for i in range(count - 1)]
    gaps.append(positions[0] + state.n_sites - positions[-1] - state.ell)
    return ZrpState(gaps=gaps, anchor=positions[0])


def zrp_to_lattice(zrp: ZrpState, n_sites: int, ell: int) -> LatticeState:
    """
    Rebuild reference points: particle i sits at ``anchor + sum_{j<i} gaps_j + ell (i - 1)``.

    Raises:
        SimulationError: If the gaps do not add up to ``N - M ell``
    """
    count = len(zrp.gaps)
    if count == 0 or any(g < 0 for g in zrp.gaps) or zrp.holes() != n_sites - count * ell:
        raise SimulationError(f"gaps {zrp.gaps} inconsistent with N={n_sites}, ell={ell}")
    if not 1 <= zrp.anchor <= n_sites:
        raise SimulationError(f"anchor {zrp.anchor} outside 1..{n_sites}")
    positions = []
    offset = 0
    for i in range(count):
        positions.append((zrp.anchor - 1 + offset + ell * i) % n_sites + 1)
        offset += zrp.gaps[i]
    return LatticeState(sorted(positions), n_sites, ell, Geometry.RING)

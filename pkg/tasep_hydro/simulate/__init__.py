"""Monte Carlo simulators of the l-TASEP and its zero-range representation."""

from tasep_hydro.simulate.lattice import (
    Event,
    LatticeState,
    ZrpState,
    apply_event,
    enabled_events,
    initial_ring_state,
    lattice_to_zrp,
    zrp_to_lattice,
)
from tasep_hydro.simulate.stats import SimStats
from tasep_hydro.simulate.tasep import next_event, replica_seeds, run_replicas, run_tasep
from tasep_hydro.simulate.zrp import run_zrp

__all__ = [
    "Event",
    "LatticeState",
    "SimStats",
    "ZrpState",
    "apply_event",
    "enabled_events",
    "initial_ring_state",
    "lattice_to_zrp",
    "next_event",
    "replica_seeds",
    "run_replicas",
    "run_tasep",
    "run_zrp",
    "zrp_to_lattice",
]

"""Continuous-time Monte Carlo of the inhomogeneous l-TASEP."""

import logging
from collections.abc import Callable
from dataclasses import replace

import numpy as np
from joblib import Parallel, delayed

from tasep_hydro.constants import DEFAULT_BATCHES, EVENT_COUNTER_LIMIT, LOGGER_NAME
from tasep_hydro.core import ModelSpec
from tasep_hydro.errors import AbsorbingStateError, SimulationError
from tasep_hydro.models import Geometry
from tasep_hydro.simulate import kernels
from tasep_hydro.simulate.lattice import (
    Event,
    LatticeState,
    apply_event,
    enabled_events,
    initial_ring_state,
)
from tasep_hydro.simulate.stats import SimStats, frozen_stats

logger = logging.getLogger(LOGGER_NAME)

Runner = Callable[..., SimStats]


def kernel_seed(seed: int) -> int:
    """32-bit seed for the compiled generator, derived from the user seed."""
    return int(np.random.SeedSequence(seed).generate_state(1)[0])


def replica_seeds(master_seed: int, replicas: int) -> list[int]:
    """
    Independent replica seeds.

    Child ``i`` of ``SeedSequence(master_seed).spawn(replicas)`` contributes
    the first 32-bit word of its state.
    """
    children = np.random.SeedSequence(master_seed).spawn(replicas)
    return [int(child.generate_state(1)[0]) for child in children]


def check_event_budget(burn_in_events: int, sample_events: int, batches: int) -> None:
    """
    Raises:
        SimulationError: For nonpositive counts, too few events per batch or
            counts the event counters cannot hold
    """
    if burn_in_events < 0 or sample_events <= 0:
        raise SimulationError("burn-in must be >= 0 and sample events > 0")
    if batches < 1 or sample_events < batches:
        raise SimulationError(f"cannot split {sample_events} events into {batches} batches")
    if burn_in_events + sample_events >= EVENT_COUNTER_LIMIT:
        raise SimulationError("event counts overflow the 64-bit event counter")


def padded_site_rates(spec: ModelSpec) -> np.ndarray:
    rates = np.zeros(spec.n_sites + 1)
    rates[1:] = spec.rates.site_rates
    return rates


def collect_kernel_output(
    spec: ModelSpec, result: tuple, seed: int, burn_in_events: int
) -> SimStats:
    occupancy, hops, times, elapsed, events, status = result
    if status == kernels.STATUS_ABSORBING:
        raise AbsorbingStateError(f"no enabled event after {events} events")
    stats = SimStats(
        n_sites=spec.n_sites,
        geometry=spec.geometry,
        batch_occupancy=occupancy[:, 1:],
        batch_hops=hops,
        batch_times=times,
        event_count=int(events) - burn_in_events,
        seeds=[seed],
        metadata={"burn_in_events": burn_in_events, "total_time": float(elapsed)},
    )
    logger.info(
        "Simulated %d events on %d sites (simulated time %.6g)",
        int(events),
        spec.n_sites,
        float(elapsed),
    )
    return stats


def run_tasep(
    spec: ModelSpec,
    burn_in_events: int,
    sample_events: int,
    batches: int = DEFAULT_BATCHES,
    initial: LatticeState | None = None,
) -> SimStats:
    """
    Simulate the lattice and return time-averaged statistics.

    Statistics are collected after ``burn_in_events`` executed events, over
    ``sample_events`` further events split into ``batches`` equal blocks. The
    open lattice starts empty and the ring starts from
    :func:`~tasep_hydro.simulate.lattice.initial_ring_state` unless ``initial``
    is given. The same ``spec.seed`` reproduces the same statistics bit for bit.

    Args:
        spec: Model parameters (open or ring)
        burn_in_events: Events discarded before sampling
        sample_events: Events sampled
        batches: Number of batches for standard errors
        initial: Optional starting configuration

    Returns:
        SimStats of the sampling window

    Raises:
        SimulationError: For invalid event counts or an initial state of another lattice
    """
    check_event_budget(burn_in_events, sample_events, batches)
    seed = kernel_seed(spec.seed)
    rates = padded_site_rates(spec)
    n, ell = spec.n_sites, spec.ell

    if initial is None:
        initial = (
            LatticeState([], n, ell, Geometry.OPEN)
            if spec.is_open
            else initial_ring_state(n, ell, int(spec.particles or 0))
        )
    if initial.n_sites != n or initial.ell != ell or initial.geometry is not spec.geometry:
        raise SimulationError("initial state does not belong to this lattice")

    logger.debug("Starting %s lattice run, kernel seed %d", spec.geometry.value, seed)
    if spec.is_open:
        tau = np.zeros(n + ell + 1, dtype=np.int8)
        tau[1 : n + 1] = initial.occupancy()
        result = kernels.run_open(
            n,
            ell,
            float(spec.alpha or 0.0),
            float(spec.beta or 0.0),
            rates,
            tau,
            burn_in_events,
            sample_events,
            batches,
            seed,
        )
        return collect_kernel_output(spec, result, spec.seed, burn_in_events)

    if not enabled_events(initial.positions, spec):
        return frozen_stats(initial.occupancy(), Geometry.RING, seed=spec.seed)
    tau = np.zeros(n + 1, dtype=np.int8)
    tau[1:] = initial.occupancy()
    result = kernels.run_ring(n, ell, rates, tau, burn_in_events, sample_events, batches, seed)
    return collect_kernel_output(spec, result, spec.seed, burn_in_events)


def next_event(
    state: LatticeState, spec: ModelSpec, rng: np.random.Generator
) -> tuple[Event, float]:
    """
    Advance a configuration by one event.

    Samples an exponential waiting time with the total enabled rate, picks an
    event proportionally to its rate and applies it to ``state`` in place.

    Raises:
        AbsorbingStateError: If no event is enabled
    """
    events = enabled_events(state.positions, spec)
    if not events:
        raise AbsorbingStateError(f"no event enabled in configuration {state.positions}")
    rates = np.array([rate for _, rate in events])
    total = float(rates.sum())
    waiting = float(rng.exponential(1.0 / total))
    index = int(np.searchsorted(np.cumsum(rates), rng.random() * total, side="right"))
    event = events[min(index, len(events) - 1)][0]
    state.positions = list(apply_event(state.positions, event, spec.n_sites, spec.geometry))
    state.time += waiting
    return event, waiting


def run_replicas(
    spec: ModelSpec,
    burn_in_events: int,
    sample_events: int,
    replicas: int,
    workers: int = 1,
    batches: int = DEFAULT_BATCHES,
    runner: Runner = run_tasep,
) -> SimStats:
    """
    Run independent replicas in parallel and pool their batches.

    Replica seeds come from :func:`replica_seeds` with ``spec.seed`` as master.
    """
    if replicas < 1:
        raise SimulationError("need at least one replica")
    if replicas == 1:
        return runner(spec, burn_in_events, sample_events, batches)
    seeds = replica_seeds(spec.seed, replicas)
    logger.info("Running %d replicas on %d workers", replicas, workers)
    results = Parallel(n_jobs=workers)(
        delayed(runner)(replace(spec, seed=seed), burn_in_events, sample_events, batches)
        for seed in seeds
    )
    pooled = results[0]
    for stats in results[1:]:
        pooled = pooled.merge(stats)
    pooled.metadata["master_seed"] = spec.seed
    return pooled

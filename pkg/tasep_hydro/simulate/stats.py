"""Time-averaged estimators collected by the simulators."""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from tasep_hydro.constants import LOGGER_NAME
from tasep_hydro.errors import SimulationError
from tasep_hydro.models import Geometry

logger = logging.getLogger(LOGGER_NAME)


def _batch_stderr(estimates: np.ndarray) -> np.ndarray:
    """Standard error of the mean over the first axis (NaN with a single batch)."""
    batches = estimates.shape[0]
    if batches < 2:
        return np.full(estimates.shape[1:], np.nan)
    return estimates.std(axis=0, ddof=1) / math.sqrt(batches)


@dataclass
class SimStats:
    """
    Per-batch occupancy integrals and hop counts of one or more trajectories.

    ``batch_occupancy`` has shape (B, N) and holds the time each site carried a
    reference point during the batch. ``batch_hops`` has shape (B, N + 1):
    column 0 counts entries, column k the moves leaving site k (exits when
    k = N on the open lattice, the wrap move on the ring).
    """

    n_sites: int
    geometry: Geometry
    batch_occupancy: np.ndarray
    batch_hops: np.ndarray
    batch_times: np.ndarray
    event_count: int
    seeds: list[int] = field(default_factory=list)
    absorbing: bool = False
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.geometry = Geometry(self.geometry)
        batches = len(self.batch_times)
        if self.batch_occupancy.shape != (batches, self.n_sites):
            raise SimulationError("occupancy batches do not match the lattice size")
        if self.batch_hops.shape != (batches, self.n_sites + 1):
            raise SimulationError("hop batches do not match the lattice size")

    @property
    def batches(self) -> int:
        return len(self.batch_times)

    @property
    def elapsed_time(self) -> float:
        return float(self.batch_times.sum())

    @property
    def occupancy_time_integral(self) -> np.ndarray:
        return self.batch_occupancy.sum(axis=0)

    @property
    def entry_count(self) -> int:
        return int(self.batch_hops[:, 0].sum())

    @property
    def exit_count(self) -> int:
        if self.geometry is Geometry.RING:
            return 0
        return int(self.batch_hops[:, self.n_sites].sum())

    @property
    def site_hop_counts(self) -> np.ndarray:
        """Moves leaving each site 1..N (site N counts exits on the open lattice)."""
        return self.batch_hops[:, 1:].sum(axis=0)

    @property
    def density(self) -> np.ndarray:
        if self.absorbing:
            return self.batch_occupancy[0].copy()
        return self.occupancy_time_integral / self.elapsed_time

    @property
    def density_stderr(self) -> np.ndarray:
        if self.absorbing:
            return np.zeros(self.n_sites)
        return _batch_stderr(self.batch_occupancy / self.batch_times[:, None])

    @property
    def bond_current(self) -> np.ndarray:
        """Current across the bond leaving each site 1..N."""
        if self.absorbing:
            return np.zeros(self.n_sites)
        return self.site_hop_counts / self.elapsed_time

    @property
    def bond_current_stderr(self) -> np.ndarray:
        if self.absorbing:
            return np.zeros(self.n_sites)
        return _batch_stderr(self.batch_hops[:, 1:] / self.batch_times[:, None])

    @property
    def entry_current(self) -> float:
        if self.absorbing or self.geometry is Geometry.RING:
            return 0.0
        return self.entry_count / self.elapsed_time

    def stationarity_check(self) -> float:
        """
        Largest z-score of a bond current against the pooled mean current.

        All bonds of the open lattice are included (entry, hops, exit). Values
        around or below 3 mean the bond currents agree within statistical error.
        """
        if self.absorbing:
            return 0.0
        hops = self.batch_hops if self.geometry is Geometry.OPEN else self.batch_hops[:, 1:]
        currents = hops.sum(axis=0) / self.elapsed_time
        stderr = _batch_stderr(hops / self.batch_times[:, None])
        deviation = np.abs(currents - currents.mean())
        z = np.divide(deviation, stderr, out=np.zeros_like(deviation), where=stderr > 0)
        return float(z.max())

    def merge(self, other: "SimStats") -> "SimStats":
        """Pool the batches of an independent replica."""
        if other.n_sites != self.n_sites or other.geometry is not self.geometry:
            raise SimulationError("cannot merge statistics of different lattices")
        if self.absorbing or other.absorbing:
            raise SimulationError("absorbing runs carry no batches to merge")
        return SimStats(
            n_sites=self.n_sites,
            geometry=self.geometry,
            batch_occupancy=np.vstack([self.batch_occupancy, other.batch_occupancy]),
            batch_hops=np.vstack([self.batch_hops, other.batch_hops]),
            batch_times=np.concatenate([self.batch_times, other.batch_times]),
            event_count=self.event_count + other.event_count,
            seeds=[*self.seeds, *other.seeds],
            metadata=dict(self.metadata),
        )

    def to_frame(self) -> pd.DataFrame:
        """Columns ``site, density, density_stderr, bond_current``."""
        return pd.DataFrame(
            {
                "site": np.arange(1, self.n_sites + 1),
                "density": self.density,
                "density_stderr": self.density_stderr,
                "bond_current": self.bond_current,
            }
        )

    def to_csv(self, path: Path | str) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.12g")

    def summary(self) -> dict[str, Any]:
        return {
            "n_sites": self.n_sites,
            "geometry": self.geometry.value,
            "event_count": self.event_count,
            "batches": self.batches,
            "elapsed_time": self.elapsed_time,
            "entry_count": self.entry_count,
            "exit_count": self.exit_count,
            "entry_current": self.entry_current,
            "mean_bond_current": float(np.mean(self.bond_current)),
            "absorbing": self.absorbing,
            "seeds": list(self.seeds),
            **self.metadata,
        }

    def write_metadata(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2, sort_keys=True))


def frozen_stats(
    occupancy: np.ndarray, geometry: Geometry, event_count: int = 0, seed: int | None = None
) -> SimStats:
    """Statistics of a configuration in which no event is ever enabled."""
    n_sites = occupancy.shape[0]
    logger.warning("Absorbing configuration on %d sites: no event is enabled", n_sites)
    return SimStats(
        n_sites=n_sites,
        geometry=geometry,
        batch_occupancy=occupancy.astype(float)[None, :],
        batch_hops=np.zeros((1, n_sites + 1), dtype=np.int64),
        batch_times=np.zeros(1),
        event_count=event_count,
        seeds=[] if seed is None else [seed],
        absorbing=True,
    )

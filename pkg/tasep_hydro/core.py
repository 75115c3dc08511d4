"""Scalar functions of the hydrodynamic limit and the site-rate profile.

Densities are reference-point densities ``rho = P(tau_k = 1)`` and live in
``[0, 1/ell]``. The coverage density ``ell * rho`` is available through
:func:`coverage_density` only.
"""

import json
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from tasep_hydro.constants import DOMAIN_TOLERANCE, LOGGER_NAME, MINIMUM_TOLERANCE
from tasep_hydro.errors import DomainError
from tasep_hydro.models import Branch, Geometry, Interpolation

logger = logging.getLogger(LOGGER_NAME)

ArrayLike = float | Sequence[float] | np.ndarray


def _check_ell(ell: int) -> int:
    if int(ell) != ell or ell < 1:
        raise DomainError(f"particle size must be a positive integer, got {ell!r}")
    return int(ell)


def _density(rho: ArrayLike, ell: int, top: float | None = None) -> np.ndarray:
    """Validate densities against [0, top] (default 1/ell), clamping within tolerance."""
    upper = 1.0 / ell if top is None else top
    arr = np.asarray(rho, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < -DOMAIN_TOLERANCE) or np.any(arr > upper + DOMAIN_TOLERANCE):
        raise DomainError(f"density {rho!r} outside [0, {upper:.12g}]")
    return np.clip(arr, 0.0, upper)


def _result(value: np.ndarray, like: ArrayLike) -> Any:
    if np.ndim(like) == 0:
        return float(value)
    return value


def critical_density(ell: int) -> float:
    """Density ``(ell + sqrt(ell))**-1`` at which H is maximal."""
    ell = _check_ell(ell)
    return 1.0 / (ell + math.sqrt(ell))


def max_normalized_current(ell: int) -> float:
    """``H(rho*) = (1 + sqrt(ell))**-2``."""
    ell = _check_ell(ell)
    return 1.0 / (1.0 + math.sqrt(ell)) ** 2


def coverage_density(rho: ArrayLike, ell: int) -> Any:
    """Fraction of sites covered by particles, ``ell * rho``."""
    ell = _check_ell(ell)
    return _result(ell * _density(rho, ell), rho)


def G(rho: ArrayLike, ell: int) -> Any:
    """
    Probability-like factor ``(1 - ell rho) / (1 - (ell - 1) rho)``.

    Args:
        rho: Reference-point density (scalar or array) in [0, 1/ell]
        ell: Particle size

    Returns:
        G(rho), same shape as ``rho``

    Raises:
        DomainError: If rho lies outside [0, 1/ell] by more than the tolerance
    """
    ell = _check_ell(ell)
    r = _density(rho, ell)
    return _result((1.0 - ell * r) / (1.0 - (ell - 1) * r), rho)


def G_prime(rho: ArrayLike, ell: int) -> Any:
    """Derivative of G, ``-1 / (1 - (ell - 1) rho)**2``."""
    ell = _check_ell(ell)
    r = _density(rho, ell)
    return _result(-1.0 / (1.0 - (ell - 1) * r) ** 2, rho)


def H(rho: ArrayLike, ell: int) -> Any:
    """Normalized current ``rho * G(rho)``."""
    ell = _check_ell(ell)
    r = _density(rho, ell)
    return _result(r * (1.0 - ell * r) / (1.0 - (ell - 1) * r), rho)


def H_prime(rho: ArrayLike, ell: int) -> Any:
    """Exact derivative of H; vanishes at the critical density."""
    ell = _check_ell(ell)
    r = _density(rho, ell)
    denominator = (1.0 - (ell - 1) * r) ** 2
    return _result((1.0 - 2.0 * ell * r + ell * (ell - 1) * r**2) / denominator, rho)


def H_second(rho: ArrayLike, ell: int) -> Any:
    """Second derivative of H, ``-2 / (1 - (ell - 1) rho)**3`` (strictly negative)."""
    ell = _check_ell(ell)
    r = _density(rho, ell)
    return _result(-2.0 / (1.0 - (ell - 1) * r) ** 3, rho)


def H_inverse(h: ArrayLike, ell: int, branch: Branch | str) -> Any:
    """
    Invert H on one side of the critical density.

    The preimages of ``h`` are the roots of ``ell rho^2 - (1 + h (ell - 1)) rho + h = 0``.
    The lower root is computed as ``(h / ell) / rho_upper`` to avoid cancellation.

    Args:
        h: Normalized current(s) in [0, H(rho*)]
        ell: Particle size
        branch: ``lower`` (rho <= rho*) or ``upper`` (rho >= rho*)

    Returns:
        Density on the requested branch

    Raises:
        DomainError: If h exceeds the maximum of H beyond tolerance
    """
    ell = _check_ell(ell)
    branch = Branch(branch)
    if branch is Branch.INDETERMINATE:
        raise DomainError("H_inverse needs the lower or the upper branch")
    values = _density(h, ell, top=max_normalized_current(ell))
    half_sum = (1.0 + values * (ell - 1)) / (2.0 * ell)
    radicand = half_sum**2 - values / ell
    if np.any(radicand < -DOMAIN_TOLERANCE):
        raise DomainError(f"current {h!r} exceeds the capacity of H for ell={ell}")
    upper = half_sum + np.sqrt(np.clip(radicand, 0.0, None))
    if branch is Branch.UPPER:
        return _result(np.minimum(upper, 1.0 / ell), h)
    return _result((values / ell) / upper, h)


def current_J(rho: ArrayLike, x: ArrayLike, rates: "RateProfile", ell: int) -> Any:
    """Systematic current ``lambda(x) H(rho)``."""
    return _result(rates(x) * np.asarray(H(rho, ell)), rho if np.ndim(rho) else x)


def diffusive_J_D(rho: ArrayLike, x: ArrayLike, rates: "RateProfile", ell: int) -> Any:
    """Diffusive current ``lambda(x) rho / (1 - (ell - 1) rho)``."""
    ell = _check_ell(ell)
    r = _density(rho, ell)
    value = rates(x) * r / (1.0 - (ell - 1) * r)
    return _result(value, rho if np.ndim(rho) else x)


def hole_current(rho_h: ArrayLike, x: ArrayLike, rates: "RateProfile", ell: int) -> Any:
    """
    Current carried by holes, ``lambda(x) rho_h (1 - rho_h) / (1 + (ell - 1) rho_h)``.

    With ``rho_h = 1 - ell rho`` this equals :func:`current_J` at ``rho``.
    """
    ell = _check_ell(ell)
    r = _density(rho_h, 1, top=1.0)
    value = rates(x) * r * (1.0 - r) / (1.0 + (ell - 1) * r)
    return _result(value, rho_h if np.ndim(rho_h) else x)


# --- Rate profiles -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RateProfile:
    """
    Site rates ``p_1..p_N`` with a continuum extension ``lambda(x)`` on [0, 1].

    Site k sits at ``x_k = k/N`` unless explicit ``nodes`` are given. The
    discrete interpolations hold ``p_1`` on ``[0, x_1]`` so ``lambda(x_k) = p_k``
    exactly. Analytic profiles carry a closed-form function and its derivative
    (see :mod:`tasep_hydro.generators`) and sample it at the nodes.
    """

    site_rates: np.ndarray
    interpolation: Interpolation = Interpolation.LINEAR
    function: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    derivative: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    minima: tuple[float, ...] = ()
    generator: dict[str, Any] | None = None
    nodes: np.ndarray | None = field(default=None, repr=False)
    _slopes: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        """Validate and freeze the arrays."""
        rates = np.array(self.site_rates, dtype=float)
        if rates.ndim != 1 or rates.size == 0:
            raise DomainError("rate profile needs at least one site rate")
        if not np.all(np.isfinite(rates)) or np.any(rates <= 0):
            raise DomainError("site rates must be finite and strictly positive")
        rates.setflags(write=False)
        object.__setattr__(self, "site_rates", rates)

        interpolation = Interpolation(self.interpolation)
        object.__setattr__(self, "interpolation", interpolation)
        if interpolation is Interpolation.ANALYTIC and (
            self.function is None or self.derivative is None
        ):
            raise DomainError("analytic rate profiles need a function and its derivative")

        if self.nodes is None:
            nodes = np.arange(1, rates.size + 1) / rates.size
        else:
            nodes = np.array(self.nodes, dtype=float)
            if nodes.shape != rates.shape or np.any(np.diff(nodes) <= 0):
                raise DomainError("nodes must be strictly increasing, one per site rate")
            if nodes[0] < 0 or nodes[-1] > 1:
                raise DomainError("nodes must lie in [0, 1]")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "minima", tuple(float(m) for m in self.minima))

        slopes = np.zeros(rates.size + 1)
        if rates.size > 1:
            slopes[1:-1] = np.diff(rates) / np.diff(nodes)
        object.__setattr__(self, "_slopes", slopes)

    @property
    def n_sites(self) -> int:
        return int(self.site_rates.size)

    @property
    def lattice_spacing(self) -> float:
        return 1.0 / self.n_sites

    @property
    def has_default_nodes(self) -> bool:
        return bool(np.allclose(self.nodes, np.arange(1, self.n_sites + 1) / self.n_sites))

    def __call__(self, x: ArrayLike) -> Any:
        """Evaluate lambda(x); arguments are clipped to [0, 1]."""
        arr = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        if self.interpolation is Interpolation.ANALYTIC:
            assert self.function is not None
            values = np.asarray(self.function(arr), dtype=float)
        elif self.interpolation is Interpolation.CONSTANT:
            index = np.searchsorted(self.nodes, arr - 1e-12, side="left")
            values = self.site_rates[np.minimum(index, self.n_sites - 1)]
        else:
            values = np.interp(arr, self.nodes, self.site_rates)
        return _result(values, x)

    def derivative_at(self, x: ArrayLike, side: float = 1.0) -> Any:
        """
        Derivative of lambda.

        At kinks of the piecewise-linear rule the one-sided slope is taken from
        the side given by the sign of ``side`` (the direction of travel).
        """
        arr = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        if self.interpolation is Interpolation.ANALYTIC:
            assert self.derivative is not None
            values = np.asarray(self.derivative(arr), dtype=float)
        elif self.interpolation is Interpolation.CONSTANT:
            values = np.zeros_like(arr)
        else:
            which = "right" if side >= 0 else "left"
            values = self._slopes[np.searchsorted(self.nodes, arr, side=which)]
        return _result(values, x)

    @property
    def lambda0(self) -> float:
        return float(self(0.0))

    @property
    def lambda1(self) -> float:
        return float(self(1.0))

    def _candidates(self) -> np.ndarray:
        if self.interpolation is not Interpolation.ANALYTIC:
            return np.asarray(self.nodes)
        points = np.concatenate([[0.0, 1.0], self.minima, self.nodes])
        return np.unique(np.round(points, 12))

    @property
    def lambda_min(self) -> float:
        """Global minimum of lambda on [0, 1]."""
        if self.interpolation is not Interpolation.ANALYTIC:
            return float(self.site_rates.min())
        return float(np.min(self(self._candidates())))

    @property
    def lambda_max(self) -> float:
        if self.interpolation is not Interpolation.ANALYTIC:
            return float(self.site_rates.max())
        grid = np.linspace(0.0, 1.0, 4 * self.n_sites + 1)
        return float(max(np.max(self(grid)), self.site_rates.max()))

    @property
    def argmin(self) -> list[float]:
        """Locations within a relative 1e-9 of the global minimum."""
        candidates = self._candidates()
        values = np.asarray(self(candidates))
        floor = self.lambda_min
        return [float(x) for x in candidates[values <= floor * (1.0 + MINIMUM_TOLERANCE)]]

    # --- Serialization -------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        """JSON object ``{"rates": [...], "interpolation": ...}`` plus generator settings."""
        data: dict[str, Any] = {
            "rates": [float(r) for r in self.site_rates],
            "interpolation": self.interpolation.value,
        }
        if self.generator is not None:
            data["generator"] = dict(self.generator)
        if not self.has_default_nodes:
            data["nodes"] = [float(x) for x in self.nodes]
        return data

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "RateProfile":
        """
        Rebuild a profile from :meth:`to_json` output.

        Analytic profiles are rebuilt from their generator settings; a bare
        ``rates`` array is interpolated with the stated rule.

        Raises:
            DomainError: If the object has no usable rates
        """
        interpolation = Interpolation(data.get("interpolation", Interpolation.LINEAR))
        generator = data.get("generator")
        if generator is not None and interpolation is Interpolation.ANALYTIC:
            from tasep_hydro.generators import create_rate_profile

            params = dict(generator)
            name = params.pop("name")
            return create_rate_profile(name, len(data["rates"]), **params)
        if "rates" not in data:
            raise DomainError("rate profile JSON needs a 'rates' array")
        return make_rate_profile(
            data["rates"],
            interpolation,
            nodes=data.get("nodes"),
        )

    def save_json(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2))

    @classmethod
    def load_json(cls, path: Path | str) -> "RateProfile":
        return cls.from_json(json.loads(Path(path).read_text()))

    def to_csv(self, path: Path | str) -> None:
        """Two-column ``site_index, rate`` table."""
        frame = pd.DataFrame(
            {"site_index": np.arange(1, self.n_sites + 1), "rate": self.site_rates}
        )
        frame.to_csv(path, index=False, float_format="%.17g")

    @classmethod
    def from_csv(
        cls,
        path: Path | str,
        interpolation: Interpolation | str = Interpolation.LINEAR,
    ) -> "RateProfile":
        frame = pd.read_csv(path)
        if not {"site_index", "rate"} <= set(frame.columns):
            raise DomainError(f"{path}: expected columns 'site_index' and 'rate'")
        frame = frame.sort_values("site_index")
        expected = np.arange(1, len(frame) + 1)
        if not np.array_equal(frame["site_index"].to_numpy(), expected):
            raise DomainError(f"{path}: site_index must run 1..N without gaps")
        return make_rate_profile(frame["rate"].to_numpy(dtype=float), interpolation)


def make_rate_profile(
    site_rates: ArrayLike,
    interpolation: Interpolation | str = Interpolation.LINEAR,
    nodes: ArrayLike | None = None,
) -> RateProfile:
    """
    Build a profile from site rates.

    Args:
        site_rates: Positive rates p_1..p_N
        interpolation: ``piecewise-linear`` (default) or ``piecewise-constant``
        nodes: Optional positions of the sites (default k/N)

    Raises:
        DomainError: If the list is empty, a rate is not positive, or an
            analytic rule is requested without a function
    """
    interpolation = Interpolation(interpolation)
    if interpolation is Interpolation.ANALYTIC:
        raise DomainError("analytic profiles are built by tasep_hydro.generators")
    return RateProfile(
        site_rates=np.asarray(site_rates, dtype=float),
        interpolation=interpolation,
        nodes=None if nodes is None else np.asarray(nodes, dtype=float),
    )


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Full parameterization of one lattice."""

    n_sites: int
    ell: int
    rates: RateProfile
    alpha: float | None = None
    beta: float | None = None
    geometry: Geometry = Geometry.OPEN
    particles: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        """Validate the parameter combination."""
        object.__setattr__(self, "geometry", Geometry(self.geometry))
        ell = _check_ell(self.ell)
        if self.n_sites < ell:
            raise DomainError(f"need N >= ell, got N={self.n_sites}, ell={ell}")
        if self.rates.n_sites != self.n_sites:
            raise DomainError(
                f"rate profile has {self.rates.n_sites} sites but N={self.n_sites}"
            )
        if self.seed < 0:
            raise DomainError("seed must be nonnegative")

        if self.geometry is Geometry.OPEN:
            if self.alpha is None or self.beta is None:
                raise DomainError("open geometry needs alpha and beta")
            if not (self.alpha > 0 and self.beta > 0):
                raise DomainError(f"alpha and beta must be positive, got {self.alpha}, {self.beta}")
        else:
            if self.particles is None:
                raise DomainError("ring geometry needs a particle count")
            if self.particles < 0 or self.particles * ell > self.n_sites:
                raise DomainError(
                    f"ring with N={self.n_sites}, ell={ell} cannot hold {self.particles} particles"
                )

    @property
    def is_open(self) -> bool:
        return self.geometry is Geometry.OPEN

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_sites": self.n_sites,
            "ell": self.ell,
            "alpha": self.alpha,
            "beta": self.beta,
            "geometry": self.geometry.value,
            "particles": self.particles,
            "seed": self.seed,
            "rates": self.rates.to_json(),
        }

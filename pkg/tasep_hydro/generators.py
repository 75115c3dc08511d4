"""Named smooth rate profiles.

Each generator returns an analytic :class:`~tasep_hydro.core.RateProfile`:
a closed-form ``lambda(x)`` with its exact derivative, sampled at the sites
``k/N``, plus the locations of its global minima.
"""

import math
from collections.abc import Callable
from typing import Any

import numpy as np

from tasep_hydro.core import RateProfile
from tasep_hydro.errors import DomainError
from tasep_hydro.models import Interpolation


def bump(u: np.ndarray) -> np.ndarray:
    """Smooth bump ``exp(1 - 1/(1 - u^2))`` on (-1, 1), zero outside, equal to 1 at 0."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    safe = np.where(inside, u, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe**2)), 0.0)


def bump_prime(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    safe = np.where(inside, u, 0.0)
    return np.where(inside, bump(safe) * (-2.0 * safe / (1.0 - safe**2) ** 2), 0.0)


def _profile(
    n_sites: int,
    function: Callable[[np.ndarray], np.ndarray],
    derivative: Callable[[np.ndarray], np.ndarray],
    minima: tuple[float, ...],
    settings: dict[str, Any],
) -> RateProfile:
    if n_sites < 1:
        raise DomainError(f"need at least one site, got {n_sites}")
    nodes = np.arange(1, n_sites + 1) / n_sites
    return RateProfile(
        site_rates=function(nodes),
        interpolation=Interpolation.ANALYTIC,
        function=function,
        derivative=derivative,
        minima=minima,
        generator=settings,
    )


def constant(n_sites: int, value: float = 1.0) -> RateProfile:
    """Homogeneous lattice."""
    if value <= 0:
        raise DomainError("constant rate must be positive")
    return _profile(
        n_sites,
        lambda x: np.full_like(np.asarray(x, dtype=float), value),
        lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        (),
        {"name": "constant", "value": value},
    )


def linear(n_sites: int, s: float) -> RateProfile:
    """``lambda(x) = s (x - 1) + 1``; positive for ``s < 1``."""
    if s >= 1:
        raise DomainError(f"linear profile needs s < 1 to stay positive, got {s}")
    if s > 0:
        minima: tuple[float, ...] = (0.0,)
    elif s < 0:
        minima = (1.0,)
    else:
        minima = ()
    return _profile(
        n_sites,
        lambda x: s * (np.asarray(x, dtype=float) - 1.0) + 1.0,
        lambda x: np.full_like(np.asarray(x, dtype=float), s),
        minima,
        {"name": "linear", "s": s},
    )


def single_bump(n_sites: int, center: float = 0.5, width: float = 0.1, depth: float = 0.5) -> RateProfile:
    """A smooth defect ``1 - depth * bump((x - center) / width)`` with minimum ``1 - depth``."""
    _check_bump(center, width, depth)
    return _profile(
        n_sites,
        lambda x: 1.0 - depth * bump((np.asarray(x, dtype=float) - center) / width),
        lambda x: -depth * bump_prime((np.asarray(x, dtype=float) - center) / width) / width,
        (center,),
        {"name": "bump", "center": center, "width": width, "depth": depth},
    )


def two_bump(
    n_sites: int,
    centers: tuple[float, float] | list[float] = (0.3, 0.7),
    width: float = 0.1,
    depth: float = 0.5,
) -> RateProfile:
    """Two equal, non-overlapping defects: two global minima of value ``1 - depth``."""
    first, second = sorted(float(c) for c in centers)
    _check_bump(first, width, depth)
    _check_bump(second, width, depth)
    if second - first < 2 * width:
        raise DomainError("two_bump defects overlap; need |c1 - c2| >= 2 * width")

    def function(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 1.0 - depth * (bump((x - first) / width) + bump((x - second) / width))

    def derivative(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        slopes = bump_prime((x - first) / width) + bump_prime((x - second) / width)
        return -depth * slopes / width

    return _profile(
        n_sites,
        function,
        derivative,
        (first, second),
        {"name": "two_bump", "centers": [first, second], "width": width, "depth": depth},
    )


def valley(
    n_sites: int,
    lambda0: float,
    lambda1: float,
    lambda_min: float,
    x_min: float = 0.5,
) -> RateProfile:
    """
    Cosine valley through ``(0, lambda0)``, ``(x_min, lambda_min)`` and ``(1, lambda1)``.

    Continuously differentiable with a flat minimum; realizes any boundary/minimum
    triple with ``lambda_min <= min(lambda0, lambda1)``.
    """
    if not 0.0 < x_min < 1.0:
        raise DomainError("valley minimum must lie strictly inside (0, 1)")
    if lambda_min <= 0 or lambda_min > min(lambda0, lambda1):
        raise DomainError("valley needs 0 < lambda_min <= min(lambda0, lambda1)")
    right_width = 1.0 - x_min

    def function(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        left = lambda_min + (lambda0 - lambda_min) * 0.5 * (1.0 + np.cos(math.pi * x / x_min))
        right = lambda_min + (lambda1 - lambda_min) * 0.5 * (
            1.0 - np.cos(math.pi * (x - x_min) / right_width)
        )
        return np.where(x <= x_min, left, right)

    def derivative(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        left = -(lambda0 - lambda_min) * 0.5 * (math.pi / x_min) * np.sin(math.pi * x / x_min)
        right = (
            (lambda1 - lambda_min)
            * 0.5
            * (math.pi / right_width)
            * np.sin(math.pi * (x - x_min) / right_width)
        )
        return np.where(x <= x_min, left, right)

    minima: list[float] = [x_min]
    if lambda0 == lambda_min:
        minima.insert(0, 0.0)
    if lambda1 == lambda_min:
        minima.append(1.0)
    return _profile(
        n_sites,
        function,
        derivative,
        tuple(minima),
        {
            "name": "valley",
            "lambda0": lambda0,
            "lambda1": lambda1,
            "lambda_min": lambda_min,
            "x_min": x_min,
        },
    )


def _check_bump(center: float, width: float, depth: float) -> None:
    if not 0.0 < depth < 1.0:
        raise DomainError(f"bump depth must lie in (0, 1), got {depth}")
    if width <= 0:
        raise DomainError("bump width must be positive")
    if not 0.0 <= center <= 1.0:
        raise DomainError("bump center must lie in [0, 1]")


GENERATOR_REGISTRY: dict[str, Callable[..., RateProfile]] = {
    "constant": constant,
    "linear": linear,
    "bump": single_bump,
    "two_bump": two_bump,
    "valley": valley,
}


def create_rate_profile(name: str, n_sites: int, **params: Any) -> RateProfile:
    """
    Build a named profile.

    Args:
        name: One of ``constant``, ``linear``, ``bump``, ``two_bump``, ``valley``
        n_sites: Number of lattice sites
        **params: Generator parameters

    Raises:
        DomainError: For unknown names or invalid parameters
    """
    try:
        factory = GENERATOR_REGISTRY[name]
    except KeyError as e:
        raise DomainError(
            f"Unknown rate generator '{name}'; available: {', '.join(GENERATOR_REGISTRY)}"
        ) from e
    try:
        return factory(n_sites, **params)
    except TypeError as e:
        raise DomainError(f"Invalid parameters for generator '{name}': {e}") from e

"""Pytest configuration and shared fixtures."""

import logging

import pytest

from tasep_hydro.constants import LOGGER_NAME
from tasep_hydro.core import ModelSpec, make_rate_profile
from tasep_hydro.generators import constant


@pytest.fixture(autouse=True)
def quiet_logger():
    """Keep library logging at warning level for each test."""
    logger = logging.getLogger(LOGGER_NAME)
    previous = logger.level
    logger.setLevel(logging.WARNING)
    yield
    logger.setLevel(previous)


@pytest.fixture
def open_spec():
    """Factory for open lattices with constant rates."""

    def make(n_sites=20, ell=1, alpha=0.2, beta=0.7, rate=1.0, seed=0):
        return ModelSpec(n_sites, ell, constant(n_sites, rate), alpha=alpha, beta=beta, seed=seed)

    return make


@pytest.fixture
def ring_spec():
    """Factory for rings with explicit site rates."""

    def make(site_rates, ell=1, particles=1, seed=0):
        rates = make_rate_profile(site_rates)
        return ModelSpec(
            len(site_rates), ell, rates, geometry="ring", particles=particles, seed=seed
        )

    return make

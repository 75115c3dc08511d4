"""Pytest configuration for integration tests."""

import os

import pytest

SLOW_ENV = "TASEP_HYDRO_RUN_SLOW"


def slow_runs_enabled() -> bool:
    """Check if long Monte Carlo runs were requested."""
    return os.environ.get(SLOW_ENV) == "1"


def pytest_collection_modifyitems(config, items):
    """Skip slow tests unless TASEP_HYDRO_RUN_SLOW=1."""
    if slow_runs_enabled():
        return

    skip_marker = pytest.mark.skip(reason=f"set {SLOW_ENV}=1 to run slow acceptance tests")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_marker)

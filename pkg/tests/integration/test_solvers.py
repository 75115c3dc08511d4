"""Finite-volume, characteristic and inference solvers against the closed form."""

import numpy as np
import pytest

from tasep_hydro.characteristics import trace_characteristic
from tasep_hydro.core import H, ModelSpec, critical_density, max_normalized_current
from tasep_hydro.generators import linear, single_bump
from tasep_hydro.hydro import classify_phase, stationary_profile
from tasep_hydro.infer import infer_rates
from tasep_hydro.models import DensityProfile, Phase, TraceOutcome
from tasep_hydro.pde import solve_steady

BUMP = single_bump(800, center=0.5, width=0.2, depth=0.5)

TRIMER_CASES = [
    (0.02, 0.5, Phase.LD_I),
    (0.02, 0.04, Phase.LD_II),
    (0.5, 0.02, Phase.HD_I),
    (0.04, 0.02, Phase.HD_II),
    (0.5, 0.5, Phase.MC),
]

MONOMER_CASES = [
    (0.1, 0.8, Phase.LD_I),
    (0.05, 0.1, Phase.LD_II),
    (0.8, 0.1, Phase.HD_I),
    (0.1, 0.05, Phase.HD_II),
    (0.8, 0.8, Phase.MC),
]


@pytest.mark.slow
@pytest.mark.parametrize(("alpha", "beta", "phase"), TRIMER_CASES)
def test_finite_volume_matches_closed_form(alpha, beta, phase) -> None:
    """Test the relaxed steady state on 1000 cells away from the slowest site."""
    spec = ModelSpec(800, 3, BUMP, alpha=alpha, beta=beta)
    profile = solve_steady(spec, cells=1000)
    theory = stationary_profile(spec, grid=profile.x)
    away = np.abs(profile.x - 0.5) > 0.02

    assert profile.phase is phase
    assert np.max(np.abs(profile.rho[away] - theory.rho[away])) < 1e-3
    if phase is Phase.MC:
        centre = int(np.argmin(np.abs(profile.x - 0.5)))
        assert profile.rho[centre] == pytest.approx(critical_density(3), abs=5e-3)


@pytest.mark.slow
def test_characteristic_dichotomy() -> None:
    """Test exits and reversals on random starts and profiles with tight current conservation."""
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 100:
        ell = int(rng.integers(1, 4))
        if rng.random() < 0.5:
            center = float(rng.uniform(0.3, 0.7))
            rates = single_bump(
                200,
                center=center,
                width=float(rng.uniform(0.25, 0.3)),
                depth=float(rng.uniform(0.2, 0.6)),
            )
            minima = [center]
        else:
            rates = linear(200, float(rng.uniform(-0.5, 0.5)))
            minima = []
        rho_star = critical_density(ell)
        x0 = float(rng.uniform(0.02, 0.98))
        rho0 = float(rng.uniform(0.02, 0.98)) / ell
        if abs(rho0 - rho_star) < 0.05 / ell:
            continue

        lo, hi = (x0, 1.0) if rho0 < rho_star else (0.0, x0)
        path = np.concatenate([np.linspace(lo, hi, 2001), [m for m in minima if lo <= m <= hi]])
        capacity = float(np.min(rates(path))) * max_normalized_current(ell)
        current = float(rates(x0)) * H(rho0, ell)
        if abs(current - capacity) < 1e-6 * capacity:
            continue

        trace = trace_characteristic(x0, rho0, rates, ell, t_max=500.0, step=2e-4)
        expected = TraceOutcome.REACHED_END if current < capacity else TraceOutcome.REVERSED
        assert trace.outcome is expected, f"start ({x0}, {rho0}), ell={ell}"
        assert trace.max_current_drift < 1e-8
        checked += 1


@pytest.mark.parametrize("ell", [1, 3])
@pytest.mark.parametrize("case", range(5))
def test_inference_round_trip(ell, case) -> None:
    """Test rates and identified boundary rates are recovered from closed-form profiles."""
    alpha, beta, phase = (MONOMER_CASES if ell == 1 else TRIMER_CASES)[case]
    spec = ModelSpec(800, ell, BUMP, alpha=alpha, beta=beta)
    assert classify_phase(spec).phase is phase

    profile = stationary_profile(spec, grid_size=401)
    result = infer_rates(DensityProfile.from_stationary(profile), ell)
    scale = float(BUMP(0.5))

    assert result.reliable.all()
    np.testing.assert_allclose(result.lambda_values, BUMP(result.x) / scale, rtol=1e-6)
    if result.alpha_identified:
        assert result.alpha_estimate * scale == pytest.approx(alpha, rel=1e-8)
    if result.beta_identified:
        assert result.beta_estimate * scale == pytest.approx(beta, rel=1e-8)
    assert result.alpha_identified == phase.is_low_density
    assert result.beta_identified == phase.is_high_density

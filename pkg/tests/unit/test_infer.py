"""Tests for rate inference from density profiles."""

import numpy as np
import pytest

from tasep_hydro.core import ModelSpec, make_rate_profile
from tasep_hydro.errors import DomainError, InferenceError
from tasep_hydro.generators import single_bump
from tasep_hydro.hydro import classify_phase, stationary_profile
from tasep_hydro.infer import infer_rates, naive_estimate
from tasep_hydro.models import DensityProfile


def flat_profile(value: float, points: int = 101) -> DensityProfile:
    x = np.linspace(0.0, 1.0, points)
    return DensityProfile(x=x, density=np.full(points, value))


def closed_form_profile(spec: ModelSpec) -> DensityProfile:
    return DensityProfile.from_stationary(stationary_profile(spec, grid_size=201))


class TestInferRates:
    """Tests for the hydrodynamic inversion."""

    def test_flat_low_density(self) -> None:
        """Test a plateau at 0.2 of monomers."""
        result = infer_rates(flat_profile(0.2), 1)

        np.testing.assert_allclose(result.lambda_values, 1.0)
        assert result.current == pytest.approx(0.16)
        assert result.alpha_estimate == pytest.approx(0.2)
        assert result.beta_estimate == pytest.approx(0.8)
        assert result.alpha_identified
        assert not result.beta_identified
        assert result.diagnostics == []

    def test_low_density_round_trip(self) -> None:
        """Test rates and the entry rate are recovered up to the anchor scale."""
        rates = single_bump(200, center=0.5, width=0.2, depth=0.5)
        spec = ModelSpec(200, 3, rates, alpha=0.02, beta=0.3)
        assert classify_phase(spec).phase.is_low_density
        result = infer_rates(closed_form_profile(spec), 3)
        scale = float(rates(0.5))

        np.testing.assert_allclose(result.lambda_values, rates(result.x) / scale, rtol=1e-6)
        assert result.alpha_estimate * scale == pytest.approx(0.02, rel=1e-9)
        assert result.alpha_identified
        assert not result.beta_identified

    def test_high_density_round_trip(self) -> None:
        """Test the exit rate through the periodic part of the exit density."""
        rates = single_bump(200, center=0.5, width=0.2, depth=0.5)
        spec = ModelSpec(200, 2, rates, alpha=0.3, beta=0.02)
        assert classify_phase(spec).phase.is_high_density
        result = infer_rates(closed_form_profile(spec), 2)
        scale = float(rates(0.5))

        np.testing.assert_allclose(result.lambda_values, rates(result.x) / scale, rtol=1e-6)
        assert result.beta_estimate * scale == pytest.approx(0.02, rel=1e-9)
        assert result.beta_identified
        assert not result.alpha_identified

    def test_anchor_normalization(self) -> None:
        """Test the estimate interpolates to 1 at the anchor."""
        x = np.linspace(0.0, 1.0, 51)
        profile = DensityProfile(x=x, density=0.1 + 0.1 * x)
        result = infer_rates(profile, 1, x0_anchor=0.3)

        assert float(result.lambda_estimate(0.3)) == pytest.approx(1.0)
        assert result.x0_anchor == 0.3

    def test_anchor_only_fixes_the_scale(self) -> None:
        """Test rate ratios and the entry rate do not depend on the anchor."""
        rates = single_bump(200, center=0.5, width=0.2, depth=0.5)
        profile = closed_form_profile(ModelSpec(200, 2, rates, alpha=0.05, beta=0.8))
        near = infer_rates(profile, 2, x0_anchor=0.3)
        far = infer_rates(profile, 2, x0_anchor=0.8)
        ratio = near.lambda_values / far.lambda_values

        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-9)
        assert near.alpha_estimate / far.alpha_estimate == pytest.approx(ratio[0], rel=1e-9)
        assert near.current / far.current == pytest.approx(ratio[0], rel=1e-9)

    def test_uniform_rescaling_of_rates(self) -> None:
        """Test scaling every rate by one factor leaves the normalized estimate unchanged."""
        site_rates = single_bump(200, center=0.5, width=0.2, depth=0.5).site_rates
        base = ModelSpec(200, 2, make_rate_profile(site_rates), alpha=0.05, beta=0.8)
        scaled = ModelSpec(
            200, 2, make_rate_profile(3.7 * site_rates), alpha=3.7 * 0.05, beta=3.7 * 0.8
        )
        expected = infer_rates(closed_form_profile(base), 2)
        result = infer_rates(closed_form_profile(scaled), 2)

        np.testing.assert_allclose(result.lambda_values, expected.lambda_values, rtol=1e-9)
        assert result.alpha_estimate == pytest.approx(expected.alpha_estimate, rel=1e-9)
        assert result.alpha_estimate * float(scaled.rates(0.5)) == pytest.approx(3.7 * 0.05, rel=1e-9)

    def test_unreliable_sites(self) -> None:
        """Test empty sites are skipped and reported."""
        density = np.full(21, 0.2)
        density[3] = 0.0
        result = infer_rates(DensityProfile(x=np.linspace(0, 1, 21), density=density), 1)

        assert not result.reliable[3]
        assert np.isnan(result.lambda_values[3])
        assert "1 sites" in result.diagnostics[0]
        frame = result.to_frame()
        assert not frame["reliable"][3]

    def test_anchor_outside_range(self) -> None:
        """Test anchors beyond the observed positions."""
        profile = DensityProfile(x=np.linspace(0.0, 0.4, 5), density=np.full(5, 0.2))

        with pytest.raises(InferenceError, match="outside the profile range"):
            infer_rates(profile, 1)

    def test_anchor_density_singular(self) -> None:
        """Test an empty anchor site cannot fix the scale."""
        density = np.full(11, 0.2)
        density[5] = 0.0

        with pytest.raises(InferenceError, match="too close"):
            infer_rates(DensityProfile(x=np.linspace(0, 1, 11), density=density), 1)

    def test_full_entry(self) -> None:
        """Test a jammed entry site leaves the entry balance singular."""
        density = np.full(11, 0.2)
        density[0] = 0.5

        with pytest.raises(InferenceError, match="no holes"):
            infer_rates(DensityProfile(x=np.linspace(0, 1, 11), density=density), 2)

    def test_short_profile_exit_fallback(self) -> None:
        """Test the last reliable rate is used when the exit window is empty."""
        result = infer_rates(flat_profile(0.2, points=3), 1)

        assert result.beta_estimate == pytest.approx(0.8)
        assert "too few reliable sites" in result.diagnostics[0]

    def test_smoothing(self) -> None:
        """Test smoothing leaves a plateau unchanged and needs an odd window."""
        result = infer_rates(flat_profile(0.2), 1, smoothing_window=5)

        assert result.current == pytest.approx(0.16)
        with pytest.raises(DomainError, match="odd"):
            infer_rates(flat_profile(0.2), 1, smoothing_window=4)

    def test_serialization(self) -> None:
        """Test the JSON summary and the table."""
        result = infer_rates(flat_profile(0.2), 1)
        summary = result.to_json()

        assert summary["J_estimate"] == pytest.approx(0.16)
        assert summary["alpha_identified"] is True
        assert list(result.to_frame().columns) == ["x", "lambda_estimate", "lambda_naive", "reliable"]


class TestNaiveEstimate:
    """Tests for the collision-free estimate."""

    def test_inverse_density(self) -> None:
        """Test lambda is the density ratio to the anchor."""
        x = np.linspace(0.0, 1.0, 5)
        estimate = naive_estimate(DensityProfile(x=x, density=[0.4, 0.2, 0.1, 0.2, 0.4]))

        np.testing.assert_allclose(estimate.site_rates, [0.25, 0.5, 1.0, 0.5, 0.25])

    def test_zero_density(self) -> None:
        """Test empty sites are rejected."""
        profile = DensityProfile(x=np.linspace(0, 1, 3), density=[0.1, 0.0, 0.1])

        with pytest.raises(InferenceError, match="positive"):
            naive_estimate(profile)

    def test_differs_from_exclusion_estimate(self) -> None:
        """Test the naive estimate misses the exclusion correction."""
        x = np.linspace(0.0, 1.0, 51)
        profile = DensityProfile(x=x, density=0.1 + 0.2 * x)
        result = infer_rates(profile, 1)

        assert not np.allclose(result.lambda_naive, result.lambda_values, rtol=1e-3)

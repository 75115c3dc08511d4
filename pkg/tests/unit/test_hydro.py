"""Tests for the closed-form stationary hydrodynamics."""

import math

import numpy as np
import pytest
from scipy.optimize import bisect

from tasep_hydro.core import ModelSpec, critical_density, make_rate_profile
from tasep_hydro.errors import DomainError
from tasep_hydro.generators import linear, single_bump, two_bump, valley
from tasep_hydro.hydro import (
    boundary_current,
    boundary_currents,
    boundary_table,
    branch_density,
    classify_phase,
    critical_entry_rate,
    critical_exit_rate,
    exit_densities,
    hd_ld_separation,
    hole_current_balance,
    phase_scan,
    profile_current,
    rho_zero,
    stationary_profile,
)
from tasep_hydro.models import Branch, Phase


class TestBoundaryDensities:
    """Tests for entry and exit densities."""

    def test_rho_zero(self) -> None:
        """Test the entry density for monomers and trimers."""
        assert rho_zero(0.1, 1.0, 1) == pytest.approx(0.1)
        assert rho_zero(0.1, 1.0, 3) == pytest.approx(0.1 / 1.2)

    def test_rho_zero_rejects_nonpositive(self) -> None:
        """Test nonpositive rates are rejected."""
        with pytest.raises(DomainError, match="alpha"):
            rho_zero(0.0, 1.0, 1)

    def test_exit_densities(self) -> None:
        """Test the periodic part, the troughs and their average."""
        plus, minus, rho1 = exit_densities(0.2, 1.0, 3)

        assert plus == pytest.approx(0.8 / 1.4)
        assert minus == pytest.approx(0.2 * 0.8 / 1.4)
        assert rho1 == pytest.approx((1 - 0.2) / 3, abs=1e-12)

    def test_monomer_exit_density(self) -> None:
        """Test the ell = 1 high-density boundary 1 - beta."""
        plus, _, rho1 = exit_densities(0.3, 1.0, 1)

        assert plus == pytest.approx(0.7)
        assert rho1 == pytest.approx(0.7)

    def test_instant_exit(self) -> None:
        """Test beta = lambda1 empties the exit."""
        assert exit_densities(0.5, 0.5, 4) == pytest.approx((0.0, 0.0, 0.0))

    def test_beta_above_exit_rate(self) -> None:
        """Test beta > lambda1 clamps to zero."""
        assert exit_densities(2.0, 1.0, 2) == (0.0, 0.0, 0.0)

    def test_hole_current_balance(self) -> None:
        """Test the hole current at the entry matches alpha times the hole density."""
        for alpha, lambda0, ell in ((0.1, 1.0, 1), (0.3, 0.9, 3), (0.05, 2.0, 10)):
            current, inflow = hole_current_balance(alpha, lambda0, ell)
            assert current == pytest.approx(inflow, rel=1e-12)


class TestCriticalRates:
    """Tests for the critical entry and exit rates."""

    def test_homogeneous_monomers(self) -> None:
        """Test alpha* = beta* = 1/2 and J_max = 1/4 for the classical lattice."""
        assert critical_entry_rate(1.0, 1.0, 1) == pytest.approx(0.5, abs=1e-12)
        assert critical_exit_rate(1.0, 1.0, 1) == pytest.approx(0.5, abs=1e-12)
        _, _, j_max = boundary_currents(0.1, 0.1, make_rate_profile([1.0]), 1)
        assert j_max == pytest.approx(0.25, abs=1e-12)

    def test_defect(self) -> None:
        """Test a single slow region between unit boundary rates."""
        for lambda_min in (0.1, 0.3, 0.5, 0.9):
            expected = (1 - math.sqrt(1 - lambda_min)) / 2
            assert critical_entry_rate(1.0, lambda_min, 1) == pytest.approx(expected, abs=1e-10)

    def test_linear_profile(self) -> None:
        """Test alpha* = (1 - s)/2 and beta* = (1 - sqrt(s))/2 for a linear ramp."""
        for s in (0.1, 0.36, 0.5, 0.8):
            rates = linear(50, s)
            assert critical_entry_rate(rates.lambda0, rates.lambda_min, 1) == pytest.approx(
                (1 - s) / 2, abs=1e-10
            )
            assert critical_exit_rate(rates.lambda1, rates.lambda_min, 1) == pytest.approx(
                (1 - math.sqrt(s)) / 2, abs=1e-10
            )

    def test_large_particles(self) -> None:
        """Test ell = 10 critical rates against an independent bisection."""
        j_max = 0.1 / (1 + math.sqrt(10)) ** 2
        alpha_star = critical_entry_rate(0.9, 0.1, 10)
        beta_star = critical_exit_rate(0.3, 0.1, 10)
        alpha_check = bisect(lambda a: boundary_current(a, 0.9, 10) - j_max, 0.0, 0.01, xtol=1e-14)
        beta_check = bisect(lambda b: boundary_current(b, 0.3, 10) - j_max, 0.0, 0.01, xtol=1e-14)

        assert j_max == pytest.approx(5.7722e-3, rel=1e-4)
        assert alpha_star == pytest.approx(6.1705e-3, rel=1e-4)
        assert beta_star == pytest.approx(7.1895e-3, rel=1e-4)
        assert alpha_star == pytest.approx(alpha_check, abs=1e-8)
        assert beta_star == pytest.approx(beta_check, abs=1e-8)

    def test_critical_current_identity(self) -> None:
        """Test J_L(alpha*) = J_max on random rate triples."""
        rng = np.random.default_rng(2024)
        for _ in range(50):
            ell = int(rng.integers(1, 11))
            lambda0, lambda_min = rng.uniform(0.1, 2.0), rng.uniform(0.05, 1.0)
            lambda_min = min(lambda_min, lambda0)
            j_max = lambda_min / (1 + math.sqrt(ell)) ** 2
            alpha_star = critical_entry_rate(lambda0, lambda_min, ell)
            assert boundary_current(alpha_star, lambda0, ell) == pytest.approx(j_max, abs=1e-10)

    def test_monotone_in_minimum(self) -> None:
        """Test alpha* grows with lambda_min."""
        values = [critical_entry_rate(1.0, m, 3) for m in np.linspace(0.05, 1.0, 20)]

        assert np.all(np.diff(values) >= 0)

    def test_minimum_above_boundary_rate(self) -> None:
        """Test lambda_min cannot exceed the boundary rate."""
        with pytest.raises(DomainError, match="exceeds"):
            critical_entry_rate(0.5, 0.8, 1)


class TestBoundaryCurrents:
    """Tests for the reservoir currents."""

    def test_entry_current(self) -> None:
        """Test J_L for trimers."""
        j_left, _, _ = boundary_currents(0.1, 0.5, make_rate_profile([1.0, 1.0]), 3)

        assert j_left == pytest.approx(0.075)

    def test_capacity_for_large_particles(self) -> None:
        """Test J_max = lambda_min / (1 + sqrt(ell))^2."""
        rates = valley(100, 0.9, 0.3, 0.1)
        _, _, j_max = boundary_currents(0.1, 0.1, rates, 10)

        assert j_max == pytest.approx(5.7722e-3, rel=1e-4)


class TestClassifyPhase:
    """Tests for phase classification."""

    @pytest.mark.parametrize(
        ("alpha", "beta", "phase", "j_c"),
        [
            (0.2, 0.7, Phase.LD_I, 0.16),
            (0.7, 0.2, Phase.HD_I, 0.16),
            (0.7, 0.7, Phase.MC, 0.25),
            (0.1, 0.2, Phase.LD_II, 0.09),
            (0.2, 0.1, Phase.HD_II, 0.09),
        ],
    )
    def test_homogeneous_phases(self, open_spec, alpha, beta, phase, j_c) -> None:
        """Test the classical phase diagram."""
        report = classify_phase(open_spec(alpha=alpha, beta=beta))

        assert report.phase is phase
        assert report.j_c == pytest.approx(j_c)

    def test_shock_moves_towards_larger_current(self, open_spec) -> None:
        """Test the shock speed sign in the two-sided phases."""
        assert classify_phase(open_spec(alpha=0.1, beta=0.2)).shock_speed == pytest.approx(0.1)
        assert classify_phase(open_spec(alpha=0.2, beta=0.1)).shock_speed == pytest.approx(-0.1)
        assert classify_phase(open_spec(alpha=0.2, beta=0.7)).shock_speed is None

    def test_shock_speed_at_slowest_site(self) -> None:
        """Test the shock densities are taken at the rate minimum, not mid-lattice."""
        rates = single_bump(200, center=0.3, width=0.1, depth=0.5)
        report = classify_phase(ModelSpec(200, 1, rates, alpha=0.1, beta=0.12))
        rho_left = (1 - math.sqrt(1 - 4 * 0.09 / 0.5)) / 2
        rho_right = (1 + math.sqrt(1 - 4 * 0.1056 / 0.5)) / 2

        assert report.resolved_phase is Phase.LD_II
        assert report.shock_position == pytest.approx(0.3)
        assert report.shock_speed == pytest.approx((0.1056 - 0.09) / (rho_right - rho_left))
        assert report.to_json()["shock_position"] == pytest.approx(0.3)

    def test_coexistence(self, open_spec) -> None:
        """Test equal boundary currents give a stationary shock."""
        report = classify_phase(open_spec(alpha=0.2, beta=0.2))

        assert report.phase is Phase.COEXISTENCE
        assert report.shock_speed == pytest.approx(0.0, abs=1e-12)

    def test_transition_line(self, open_spec) -> None:
        """Test parameters on alpha* are tagged with the strict phase kept."""
        report = classify_phase(open_spec(alpha=0.5, beta=0.7))

        assert report.phase is Phase.TRANSITION
        assert report.resolved_phase is Phase.MC
        assert report.j_c == pytest.approx(0.25)

    def test_nonphysical_entry_density(self) -> None:
        """Test alpha > lambda0 is flagged for ell > 1."""
        spec = ModelSpec(10, 2, make_rate_profile([1.0] * 10), alpha=1.5, beta=1.0)
        report = classify_phase(spec)

        assert report.rho_0 > 0.5
        assert any("exceeds 1/ell" in message for message in report.diagnostics)

    def test_ring_is_rejected(self, ring_spec) -> None:
        """Test classification needs open boundaries."""
        with pytest.raises(DomainError, match="open"):
            classify_phase(ring_spec([1.0] * 4, particles=1))

    def test_report_quantities(self) -> None:
        """Test the report carries the boundary quantities of the rate profile."""
        rates = single_bump(200, center=0.4, width=0.1, depth=0.5)
        report = classify_phase(ModelSpec(200, 2, rates, alpha=0.05, beta=0.6))

        assert report.lambda_min == pytest.approx(0.5)
        assert report.x_min_set == pytest.approx([0.4])
        assert report.alpha_star == pytest.approx(critical_entry_rate(1.0, 0.5, 2))
        assert report.rho_0 == pytest.approx(rho_zero(0.05, 1.0, 2))


class TestStationaryProfile:
    """Tests for the closed-form density profile."""

    def test_homogeneous_densities(self, open_spec) -> None:
        """Test LD, HD and MC densities alpha, 1 - beta and 1/2."""
        low = stationary_profile(open_spec(alpha=0.2, beta=0.7))
        high = stationary_profile(open_spec(alpha=0.7, beta=0.2))
        maximal = stationary_profile(open_spec(alpha=0.7, beta=0.7))

        np.testing.assert_allclose(low.rho, 0.2, atol=1e-12)
        np.testing.assert_allclose(high.rho, 0.8, atol=1e-12)
        np.testing.assert_allclose(maximal.rho, 0.5, atol=1e-12)
        assert len(low.x) == 21

    def test_branch_switch_at_minimum(self) -> None:
        """Test the MC profile passes through rho* at the single rate minimum."""
        rates = single_bump(200, center=0.5, width=0.2, depth=0.5)
        spec = ModelSpec(200, 3, rates, alpha=0.8, beta=0.8)
        profile = stationary_profile(spec)
        middle = 100
        rho_star = critical_density(3)

        assert profile.phase is Phase.MC
        assert profile.rho[middle] == pytest.approx(rho_star)
        assert np.all(profile.rho[:middle] >= rho_star - 1e-12)
        assert np.all(profile.rho[middle + 1 :] <= rho_star + 1e-12)
        assert profile.branch[0] is Branch.UPPER
        assert profile.branch[-1] is Branch.LOWER
        assert profile.discontinuities == pytest.approx([0.5])

    def test_current_is_constant(self) -> None:
        """Test lambda(x) H(rho(x)) equals J_c at every grid point."""
        rates = valley(150, 1.2, 0.9, 0.4, x_min=0.6)
        for alpha, beta in ((0.05, 0.8), (0.8, 0.05), (0.8, 0.8)):
            spec = ModelSpec(150, 2, rates, alpha=alpha, beta=beta)
            profile = stationary_profile(spec, grid_size=301)
            np.testing.assert_allclose(profile_current(profile, rates), profile.current, atol=1e-10)

    def test_branch_labels_match_density(self) -> None:
        """Test lower labels lie below rho* and upper labels above."""
        rates = linear(100, 0.36)
        rho_star = critical_density(1)
        for alpha, beta in ((0.1, 0.9), (0.9, 0.1)):
            profile = stationary_profile(ModelSpec(100, 1, rates, alpha=alpha, beta=beta))
            for rho, branch in zip(profile.rho, profile.branch, strict=True):
                if branch is Branch.LOWER:
                    assert rho <= rho_star + 1e-12
                else:
                    assert rho >= rho_star - 1e-12

    def test_two_minima_leave_middle_indeterminate(self) -> None:
        """Test the segment between two global minima is not determined."""
        rates = two_bump(100, centers=(0.3, 0.7), width=0.1, depth=0.5)
        profile = stationary_profile(ModelSpec(100, 1, rates, alpha=1.0, beta=1.0))
        x = profile.x

        assert profile.discontinuities == pytest.approx([0.3, 0.7])
        assert np.all(np.isnan(profile.rho[(x > 0.31) & (x < 0.69)]))
        assert np.all(np.isfinite(profile.rho[x < 0.3]))
        assert Branch.INDETERMINATE in profile.branch

    def test_coexistence_is_indeterminate(self, open_spec) -> None:
        """Test the coexistence line only returns the two branch curves."""
        profile = stationary_profile(open_spec(alpha=0.2, beta=0.2))

        assert np.all(np.isnan(profile.rho))
        np.testing.assert_allclose(profile.lower, 0.2)
        np.testing.assert_allclose(profile.upper, 0.8)

    def test_explicit_grid(self, open_spec) -> None:
        """Test an explicit grid overrides the grid size."""
        profile = stationary_profile(open_spec(), grid=np.array([0.25, 0.75]))

        np.testing.assert_allclose(profile.x, [0.25, 0.75])

    def test_grid_too_small(self, open_spec) -> None:
        """Test at least two points are needed."""
        with pytest.raises(DomainError, match="two grid points"):
            stationary_profile(open_spec(), grid_size=1)

    def test_branch_density_above_capacity(self) -> None:
        """Test currents above the local capacity are rejected."""
        with pytest.raises(DomainError, match="capacity"):
            branch_density(0.3, np.array([1.0, 1.0]), 1, Branch.LOWER)


class TestSeparationCurve:
    """Tests for the coexistence curve."""

    def test_symmetric_boundary_rates(self) -> None:
        """Test beta = alpha when both boundary rates agree."""
        assert hd_ld_separation(1.0, 1.0, 2, 0.1) == pytest.approx(0.1, abs=1e-10)

    def test_linear_ramp(self) -> None:
        """Test the ell = 1 balance alpha (1 - alpha - s) = beta (1 - beta)(1 - s)."""
        s, alpha = 0.36, 0.1
        beta = hd_ld_separation(1 - s, 1.0, 1, alpha)

        assert alpha * (1 - alpha - s) == pytest.approx(beta * (1 - beta) * (1 - s), abs=1e-10)
        assert 0 < beta < 0.5

    def test_meets_critical_rates(self) -> None:
        """Test alpha = alpha* maps to beta = beta*."""
        alpha_star = critical_entry_rate(0.9, 0.1, 10)

        assert hd_ld_separation(0.9, 0.3, 10, alpha_star) == pytest.approx(
            critical_exit_rate(0.3, 0.1, 10), abs=1e-8
        )

    def test_unreachable_current(self) -> None:
        """Test an inflow larger than any outflow has no partner."""
        with pytest.raises(DomainError, match="no exit rate"):
            hd_ld_separation(1.0, 0.1, 1, 0.3)


class TestBoundaryTable:
    """Tests for the boundary densities per phase."""

    def test_low_density_row(self, open_spec) -> None:
        """Test the LD row uses J_L."""
        table = boundary_table(open_spec(alpha=0.1, beta=0.7))

        assert table.j_c == pytest.approx(0.09)
        assert table.rho_0 == pytest.approx(0.1)
        assert table.rho_1_plus == pytest.approx(0.09 / 0.7)
        assert table.rho_1_minus == pytest.approx(0.09)
        assert table.residual < 1e-12

    def test_high_density_row(self) -> None:
        """Test the HD row reproduces the exit densities."""
        spec = ModelSpec(10, 3, make_rate_profile([1.0] * 10), alpha=0.9, beta=0.2)
        table = boundary_table(spec)
        plus, minus, _ = exit_densities(0.2, 1.0, 3)

        assert table.phase is Phase.HD_I
        assert table.rho_1_plus == pytest.approx(plus)
        assert table.rho_1_minus == pytest.approx(minus)
        assert table.residual < 1e-12

    def test_maximal_current_row(self) -> None:
        """Test the MC exit trough density lambda_min / (lambda1 (1 + sqrt(ell))^2)."""
        rates = valley(100, 1.0, 0.8, 0.3)
        table = boundary_table(ModelSpec(100, 2, rates, alpha=0.9, beta=0.7))

        assert table.phase is Phase.MC
        assert table.rho_1_minus == pytest.approx(0.3 / (0.8 * (1 + math.sqrt(2)) ** 2))
        assert table.residual < 1e-12


class TestPhaseScan:
    """Tests for the phase diagram scan."""

    def test_four_regions(self) -> None:
        """Test a 2 x 2 scan of the classical lattice."""
        frame = phase_scan(make_rate_profile([1.0] * 5), 1, [0.1, 0.7], [0.2, 0.9])

        assert list(frame.columns) == ["alpha", "beta", "phase"]
        assert frame["phase"].tolist() == ["LD_II", "LD_I", "HD_I", "MC"]

    def test_parallel_scan_matches_serial(self) -> None:
        """Test workers do not change the labels."""
        rates = valley(50, 0.9, 0.3, 0.1)
        alphas = np.linspace(0.001, 0.02, 4)
        betas = np.linspace(0.001, 0.02, 4)

        serial = phase_scan(rates, 10, alphas, betas)
        parallel = phase_scan(rates, 10, alphas, betas, workers=2)
        assert serial.equals(parallel)

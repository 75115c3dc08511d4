"""Tests for characteristic curves."""

import math

import numpy as np
import pytest

from tasep_hydro.characteristics import (
    boundary_characteristics,
    shock_speed,
    trace_characteristic,
    trace_to_frame,
    travel_time,
)
from tasep_hydro.core import H, critical_density, make_rate_profile
from tasep_hydro.errors import DomainError, IntegrationError
from tasep_hydro.generators import constant, linear, single_bump
from tasep_hydro.models import TraceOutcome


class TestTraceCharacteristic:
    """Tests for characteristic integration."""

    def test_straight_line_on_flat_profile(self) -> None:
        """Test constant rates give straight characteristics at speed H'(rho)."""
        trace = trace_characteristic(0.0, 0.2, constant(50), 1)

        assert trace.outcome is TraceOutcome.REACHED_END
        assert trace.exit_position == 1.0
        assert trace.exit_time == pytest.approx(1 / 0.6, rel=1e-9)
        np.testing.assert_allclose(trace.densities, 0.2)

    def test_upper_branch_moves_left(self) -> None:
        """Test densities above rho* travel towards the entry."""
        trace = trace_characteristic(1.0, 0.8, constant(50), 1)

        assert trace.outcome is TraceOutcome.REACHED_END
        assert trace.exit_position == 0.0
        assert np.all(np.diff(trace.positions) <= 0)

    def test_current_is_conserved(self) -> None:
        """Test lambda(x) H(rho) stays constant along a trace through a defect."""
        rates = single_bump(100, center=0.5, width=0.3, depth=0.4)
        trace = trace_characteristic(0.1, 0.1, rates, 2)

        currents = np.asarray(rates(trace.positions)) * np.asarray(H(trace.densities, 2))
        assert trace.outcome is TraceOutcome.REACHED_END
        assert trace.max_current_drift < 1e-7
        np.testing.assert_allclose(currents, trace.current, atol=1e-7)

    def test_reversal_where_capacity_binds(self) -> None:
        """Test an upper-branch trace turns back where lambda H(rho*) equals its current."""
        rates = linear(100, 0.5)
        trace = trace_characteristic(1.0, 0.6, rates, 1)

        assert trace.outcome is TraceOutcome.REVERSED
        assert trace.reversal_position == pytest.approx(0.92, abs=1e-4)
        assert trace.densities[-1] == pytest.approx(critical_density(1), abs=1e-4)

    def test_reaches_end_iff_below_path_capacity(self) -> None:
        """Test the exit/reversal dichotomy on random starts."""
        rates = single_bump(100, center=0.5, width=0.3, depth=0.5)
        rho_star = critical_density(1)
        rng = np.random.default_rng(17)
        checked = 0
        while checked < 6:
            x0 = float(rng.uniform(0.05, 0.95))
            rho0 = float(rng.uniform(0.02, 0.98))
            if abs(rho0 - rho_star) < 0.05:
                continue
            lo, hi = (x0, 1.0) if rho0 < rho_star else (0.0, x0)
            path = np.linspace(lo, hi, 2001)
            if lo <= 0.5 <= hi:
                path = np.append(path, 0.5)
            capacity = float(np.min(rates(path))) * 0.25
            current = float(rates(x0)) * H(rho0, 1)
            if abs(current - capacity) < 1e-3 * capacity:
                continue
            trace = trace_characteristic(x0, rho0, rates, 1, t_max=200.0)
            expected = TraceOutcome.REACHED_END if current < capacity else TraceOutcome.REVERSED
            assert trace.outcome is expected
            assert trace.max_current_drift < 1e-7
            checked += 1

    def test_kinks_of_site_rates(self) -> None:
        """Test traces cross the kinks of a piecewise-linear profile."""
        rates = make_rate_profile([1.0, 0.8, 1.2, 1.0])
        trace = trace_characteristic(0.0, 0.1, rates, 1)

        assert trace.outcome is TraceOutcome.REACHED_END
        assert trace.exit_time == pytest.approx(travel_time(0.0, 0.1, 1.0, rates, 1), rel=1e-4)

    def test_time_limit(self) -> None:
        """Test the trace stops at t_max."""
        trace = trace_characteristic(0.0, 0.1, constant(50), 1, t_max=0.5)

        assert trace.outcome is TraceOutcome.MAX_TIME
        assert trace.times[-1] == pytest.approx(0.5)
        assert trace.positions[-1] == pytest.approx(0.4)

    def test_drift_beyond_tolerance(self, monkeypatch) -> None:
        """Test integration errors are reported instead of returned."""
        monkeypatch.setattr("tasep_hydro.characteristics.CHARACTERISTIC_DRIFT_TOLERANCE", -1.0)

        with pytest.raises(IntegrationError, match="reduce the step"):
            trace_characteristic(0.0, 0.2, constant(10), 1)

    @pytest.mark.parametrize(
        ("x0", "rho0", "kwargs"),
        [
            (1.5, 0.1, {}),
            (0.5, 0.6, {}),
            (0.5, 0.1, {"t_max": 0.0}),
            (0.5, 0.1, {"step": -1e-3}),
        ],
    )
    def test_invalid_arguments(self, x0, rho0, kwargs) -> None:
        """Test starts and settings outside the domain."""
        with pytest.raises(DomainError):
            trace_characteristic(x0, rho0, constant(10), 2, **kwargs)


class TestTravelTime:
    """Tests for the quadrature travel time."""

    def test_flat_profile(self) -> None:
        """Test the travel time 1/H'(rho) across a flat lattice."""
        assert travel_time(0.0, 0.2, 1.0, constant(10), 1) == pytest.approx(1 / 0.6, rel=1e-10)

    def test_agrees_with_trace(self) -> None:
        """Test quadrature and integration agree on a linear ramp."""
        rates = linear(100, 0.5)
        trace = trace_characteristic(0.2, 0.1, rates, 1)

        assert trace.exit_time - trace.times[0] == pytest.approx(
            travel_time(0.2, 0.1, 1.0, rates, 1), rel=1e-6
        )

    def test_same_point(self) -> None:
        """Test no time is needed to stay put."""
        assert travel_time(0.3, 0.2, 0.3, constant(10), 1) == 0.0

    def test_critical_density_stalls(self) -> None:
        """Test characteristics at rho* do not move."""
        assert math.isinf(travel_time(0.2, 0.5, 0.8, constant(10), 1))

    def test_capacity_stall(self) -> None:
        """Test a current above the path capacity never arrives."""
        assert math.isinf(travel_time(1.0, 0.6, 0.0, linear(100, 0.5), 1))

    def test_wrong_direction(self) -> None:
        """Test lower-branch characteristics cannot travel left."""
        with pytest.raises(DomainError, match="moves away"):
            travel_time(0.8, 0.2, 0.1, constant(10), 1)


class TestShockSpeed:
    """Tests for the Rankine-Hugoniot speed."""

    def test_speed(self) -> None:
        """Test a shock between an LD and an HD state."""
        assert shock_speed(0.2, 0.9, 0.16, 0.09) == pytest.approx(-0.1)

    def test_equal_densities(self) -> None:
        """Test equal densities carry no shock."""
        with pytest.raises(DomainError):
            shock_speed(0.3, 0.3, 0.21, 0.21)


class TestBoundaryCharacteristics:
    """Tests for characteristics issued from the reservoirs."""

    def test_high_density_exit_characteristic(self, open_spec) -> None:
        """Test the exit density travels to the entry in the high-density phase."""
        left, right = boundary_characteristics(open_spec(alpha=0.7, beta=0.2))

        assert right.outcome is TraceOutcome.REACHED_END
        assert right.exit_position == 0.0
        assert right.exit_time == pytest.approx(1 / 0.6, rel=1e-9)
        assert left.exit_position == 0.0

    def test_ring_is_rejected(self, ring_spec) -> None:
        """Test reservoirs only exist on open lattices."""
        with pytest.raises(DomainError, match="open"):
            boundary_characteristics(ring_spec([1.0] * 4, particles=1))

    def test_frame(self, open_spec) -> None:
        """Test traces stack into one table."""
        traces = boundary_characteristics(open_spec(alpha=0.2, beta=0.7), t_max=0.1)
        frame = trace_to_frame(*traces)

        assert list(frame.columns) == ["trace", "t", "x", "rho"]
        assert set(frame["trace"]) == {0, 1}
        assert trace_to_frame().empty

"""Tests for the classical Emden oscillator and its branched Hamiltonians."""

import math

import numpy as np
import pytest

from branched.core import classical
from branched.core.classical import (
    ClassicalState,
    HamiltonianState,
    branch_crossings,
    branch_variable,
    canonical_to_velocity,
    detect_period,
    emden_to_canonical,
    hamiltonian_energy,
    integrate_emden,
    integrate_hamiltonian,
    isochronicity_condition_g,
    natural_period,
)
from branched.core.errors import (
    BranchBoundaryError,
    DetectionError,
    DomainError,
    IntegrationAbort,
)
from branched.core.model import Branch, ModelParams
from branched.core.polyalgebra import Polynomial


def test_natural_period():
    """Test T = 2 pi / omega."""
    assert natural_period(10.0) == pytest.approx(2.0 * math.pi / 10.0)


@pytest.mark.parametrize("amplitude", [0.1, 1.0, 5.0])
def test_emden_period_is_amplitude_independent(amplitude):
    """Test the measured period equals 2 pi / omega for every amplitude."""
    params = ModelParams(omega=10.0, k=1.0)
    period = natural_period(10.0)
    trajectory = integrate_emden(amplitude, 0.0, params, 3.0 * period)
    assert detect_period(trajectory) == pytest.approx(period, rel=1e-6)


def test_emden_period_small_omega():
    """Test isochronicity for omega = 1, k = 0.1."""
    params = ModelParams(omega=1.0, k=0.1)
    period = natural_period(1.0)
    for amplitude in (0.1, 1.0, 5.0):
        trajectory = integrate_emden(amplitude, 0.0, params, 3.0 * period)
        assert detect_period(trajectory) == pytest.approx(period, rel=1e-6)


def test_emden_trajectory_grid():
    """Test the step is adjusted to land exactly on t_end."""
    params = ModelParams(omega=10.0, k=1.0)
    trajectory = integrate_emden(1.0, 0.0, params, 0.5)
    assert trajectory.t[0] == 0.0
    assert trajectory.t[-1] == pytest.approx(0.5)
    assert trajectory.x[0] == 1.0
    assert trajectory.v[0] == 0.0
    frame = trajectory.to_frame()
    assert frame.columns == ["t", "x", "v"]


def test_emden_harmonic_limit():
    """Test k = 0 reduces to x = x0 cos(omega t)."""
    params = ModelParams(omega=10.0, k=0.0)
    trajectory = integrate_emden(2.0, 0.0, params, natural_period(10.0))
    np.testing.assert_allclose(trajectory.x, 2.0 * np.cos(10.0 * trajectory.t), atol=1e-8)


def test_time_step_guards():
    """Test steps larger than T/200 and non-positive end times are refused."""
    params = ModelParams(omega=10.0, k=1.0)
    with pytest.raises(DomainError, match="dt must lie"):
        integrate_emden(1.0, 0.0, params, 1.0, dt=0.01)
    with pytest.raises(DomainError, match="t_end"):
        integrate_emden(1.0, 0.0, params, 0.0)


def test_emden_overflow_guard(monkeypatch):
    """Test the integration aborts once |x| passes the overflow limit."""
    monkeypatch.setattr(classical, "OVERFLOW_LIMIT", 0.5)
    params = ModelParams(omega=10.0, k=1.0)
    with pytest.raises(IntegrationAbort, match="exceeded"):
        integrate_emden(1.0, 0.0, params, 1.0)


def test_detect_period_needs_oscillation():
    """Test a trajectory shorter than one oscillation cannot be timed."""
    params = ModelParams(omega=10.0, k=1.0)
    trajectory = integrate_emden(1.0, 0.0, params, 0.5 * natural_period(10.0))
    with pytest.raises(DetectionError, match="sign changes"):
        detect_period(trajectory)


def test_canonical_map_selects_plus_branch():
    """Test (x, v) = (1, 0) maps onto the Plus sheet with p = -1/(2 u^2)."""
    params = ModelParams(omega=10.0, k=1.0)
    u = 300.0 + 1.0 / 3.0
    assert float(branch_variable(1.0, 0.0, params)) == pytest.approx(u)
    state = emden_to_canonical(ClassicalState(1.0, 0.0), params)
    assert state.branch is Branch.PLUS
    assert state.p == pytest.approx(-1.0 / (2.0 * u * u))
    assert canonical_to_velocity(state, params) == pytest.approx(0.0, abs=1e-9)
    assert hamiltonian_energy(state, params) == pytest.approx(-1.0 / (2.0 * u), rel=1e-9)


def test_canonical_map_selects_minus_branch():
    """Test a large negative velocity lands on the Minus sheet and maps back."""
    params = ModelParams(omega=10.0, k=1.0)
    state = emden_to_canonical(ClassicalState(0.5, -400.0), params)
    assert state.branch is Branch.MINUS
    assert canonical_to_velocity(state, params) == pytest.approx(-400.0, rel=1e-12)


def test_canonical_map_guards():
    """Test the map is refused at k = 0 and at u = 0."""
    with pytest.raises(DomainError, match="k = 0"):
        emden_to_canonical(ClassicalState(1.0, 0.0), ModelParams(omega=10.0, k=0.0))
    params = ModelParams(omega=1.0, k=3.0)
    # u = v + 3 omega^2 / k + k x^2 / 3 = v + 1 at x = 0
    with pytest.raises(DomainError, match="u = 0"):
        emden_to_canonical(ClassicalState(0.0, -1.0), params)


def test_hamiltonian_state_validation():
    """Test the canonical momentum must be negative."""
    with pytest.raises(DomainError, match="negative"):
        HamiltonianState(1.0, 0.0, Branch.PLUS)
    assert HamiltonianState(1.0, -1.0, "minus").branch is Branch.MINUS


def test_hamiltonian_flow_reproduces_emden_orbit():
    """Test Hamilton's equations on the Plus sheet retrace the Emden trajectory."""
    params = ModelParams(omega=10.0, k=1.0)
    period = natural_period(10.0)
    emden = integrate_emden(1.0, 0.0, params, period)
    state = emden_to_canonical(ClassicalState(1.0, 0.0), params)
    flow = integrate_hamiltonian(state, params, period)
    assert flow.branch is Branch.PLUS
    assert flow.t.size == emden.t.size
    np.testing.assert_allclose(flow.x, emden.x, atol=1e-6)
    assert flow.relative_drift < 1e-9
    assert flow.energy[0] == pytest.approx(hamiltonian_energy(state, params))
    assert flow.to_frame().columns == ["t", "x", "p", "H"]


def test_hamiltonian_branch_boundary():
    """Test the flow stops when p reaches the edge of its sheet."""
    params = ModelParams(omega=10.0, k=1.0)
    state = HamiltonianState(1.0, -1e-13, Branch.PLUS)
    with pytest.raises(BranchBoundaryError) as excinfo:
        integrate_hamiltonian(state, params, 0.1)
    assert excinfo.value.p > -1e-12
    assert excinfo.value.time > 0.0


def test_bounded_orbits_stay_on_one_branch():
    """Test orbits of amplitude 0.1 to 5 never cross between sheets."""
    params = ModelParams(omega=10.0, k=1.0)
    for amplitude in (0.1, 1.0, 5.0):
        trajectory = integrate_emden(amplitude, 0.0, params, natural_period(10.0))
        assert branch_crossings(trajectory, params) == 0


def test_isochronicity_condition_polynomial():
    """Test f = kx gives g = omega^2 x + k^2 x^3 / 9."""
    g = isochronicity_condition_g(Polynomial.parse("3*x"), 2.0)
    assert g == Polynomial.parse("4*x + x^3")
    assert g(0.5) == pytest.approx(4.0 * 0.5 + 0.125)


def test_isochronicity_condition_callable():
    """Test the quadrature route agrees with the exact polynomial one."""
    exact = isochronicity_condition_g(Polynomial.parse("3*x"), 2.0)
    numeric = isochronicity_condition_g(lambda s: 3.0 * s, 2.0)
    for x in (-1.2, 0.3, 2.0):
        assert numeric(x) == pytest.approx(exact(x), rel=1e-12)
    assert numeric(0.0) == 0.0


def test_isochronicity_condition_rejects_bad_input():
    """Test omega must be positive and x f(x) integrable."""
    with pytest.raises(DomainError, match="omega"):
        isochronicity_condition_g(Polynomial.x(), 0.0)
    g = isochronicity_condition_g(lambda s: 1.0 / s**2, 1.0)
    with pytest.raises(DomainError, match="integrable"):
        g(1.0)

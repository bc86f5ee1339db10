"""Tests for model parameters, potentials and the exactly solvable limits."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from branched.core.eigensolver import count_sign_changes
from branched.core.errors import DomainError, OrderTooLargeError
from branched.core.model import (
    Branch,
    EnergyMap,
    ModelParams,
    effective_potential,
    hermite_bound_state,
    hermite_bound_state_function,
    hermite_truncation_scan,
    isotonic_eigenfunction,
    isotonic_exact_energy,
    potential_table,
)


def test_model_params_defaults_and_derived_values():
    """Test the derived displacement and branch centre."""
    params = ModelParams(omega=10.0, k=1.0)
    assert params.epsilon == 0.25
    assert params.branch is Branch.PLUS
    assert params.xi0 == pytest.approx(math.sqrt(1.0 / 6.0) * 0.04)
    assert params.center == params.xi0
    assert params.with_branch("minus").center == -params.xi0
    assert params.sqrt_epsilon == 0.5


def test_model_params_validation():
    """Test out-of-range parameters are rejected."""
    with pytest.raises(DomainError, match="omega"):
        ModelParams(omega=0.0, k=1.0)
    with pytest.raises(DomainError, match="k must be non-negative"):
        ModelParams(omega=10.0, k=-1.0)
    with pytest.raises(DomainError, match="epsilon"):
        ModelParams(omega=10.0, k=1.0, epsilon=-0.1)
    with pytest.raises(ValueError):
        ModelParams(omega=10.0, k=1.0, branch="sideways")


def test_branch_signs():
    """Test the branch sign convention."""
    assert Branch.PLUS.sign == 1
    assert Branch.MINUS.sign == -1
    assert Branch("minus") is Branch.MINUS


def test_model_params_dict_round_trip():
    """Test parameters survive their JSON object form."""
    params = ModelParams(omega=7.5, k=2.0, epsilon=0.5, branch=Branch.MINUS)
    data = params.to_dict()
    assert data == {"omega": 7.5, "k": 2.0, "epsilon": 0.5, "branch": "minus"}
    assert ModelParams.from_dict(data) == params


def test_model_params_from_dict_errors():
    """Test missing keys and unknown branches raise DomainError."""
    with pytest.raises(DomainError, match="missing keys"):
        ModelParams.from_dict({"omega": 1.0, "k": 1.0})
    with pytest.raises(DomainError, match="Unknown branch"):
        ModelParams.from_dict({"omega": 1.0, "k": 1.0, "epsilon": 0.25, "branch": "up"})


def test_energy_map_is_affine_and_invertible():
    """Test lambda and mu map back to the same energy."""
    energy_map = EnergyMap(omega=10.0, k=1.0)
    for energy in (14.8, 55.3, 116.5):
        assert energy_map.energy_of_lambda(energy_map.lambda_of_energy(energy)) == pytest.approx(
            energy
        )
        assert energy_map.energy_of_mu(energy_map.mu_of_energy(energy)) == pytest.approx(energy)
    # At k = 0 the maps reduce to E/4 and E/omega - 1/2.
    flat = EnergyMap(omega=10.0, k=0.0)
    assert flat.lambda_of_energy(20.0) == 5.0
    assert flat.mu_of_energy(15.0) == 1.0


def test_effective_potential_minimum_and_branches():
    """Test the potential minimum sits at +xi0 on Plus and is absent on Minus."""
    params = ModelParams(omega=10.0, k=1.0)
    xi0 = params.xi0
    shift = 1.0 / (24.0 * 100.0)
    assert effective_potential(params, xi0) == pytest.approx(-shift)
    minus = params.with_branch(Branch.MINUS)
    # The Minus well is centred at -xi0, so it is higher everywhere on xi > 0.
    xi = np.linspace(0.01, 5.0, 50)
    assert np.all(effective_potential(minus, xi) > effective_potential(params, xi))


def test_effective_potential_inverse_square_term():
    """Test the epsilon - 1/4 barrier term."""
    params = ModelParams(omega=10.0, k=0.0, epsilon=1.25)
    xi = 0.5
    expected = 100.0 * xi**2 / 64.0 + 1.0 / xi**2
    assert effective_potential(params, xi) == pytest.approx(expected)
    assert isinstance(effective_potential(params, xi), float)


def test_effective_potential_rejects_origin():
    """Test the potential is only defined on xi > 0."""
    params = ModelParams(omega=10.0, k=1.0)
    with pytest.raises(DomainError, match="xi > 0"):
        effective_potential(params, 0.0)
    with pytest.raises(DomainError):
        effective_potential(params, np.array([0.5, -0.1]))


def test_potential_table_columns():
    """Test the potential table holds both branches on a uniform grid."""
    params = ModelParams(omega=10.0, k=1.0, epsilon=0.5)
    frame = potential_table(params, 0.05, 4.0, n_points=50)
    assert frame.columns == ["xi", "v_plus", "v_minus"]
    assert frame.height == 50
    assert frame["xi"][0] == pytest.approx(0.05)
    assert frame["xi"][-1] == pytest.approx(4.0)
    assert (frame["v_minus"] > frame["v_plus"]).all()

    with pytest.raises(DomainError):
        potential_table(params, 2.0, 1.0)


def test_hermite_truncation_scan_finds_exact_level():
    """Test k = 1500, omega = 10 truncates at n = 2 (argument 1/sqrt(2))."""
    params = ModelParams(omega=10.0, k=1500.0)
    scan = hermite_truncation_scan(params, 6)
    assert scan.argument == pytest.approx(1.0 / math.sqrt(2.0))
    assert 2 in scan.levels
    assert 0 not in scan.levels
    assert 1 not in scan.levels
    assert not scan.degenerate


def test_hermite_truncation_scan_degenerate_at_k_zero():
    """Test every odd order qualifies when xi0 = 0."""
    scan = hermite_truncation_scan(ModelParams(omega=10.0, k=0.0), 7)
    assert scan.degenerate
    assert scan.levels == (1, 3, 5, 7)


def test_hermite_truncation_scan_order_guard():
    """Test scans beyond order 200 are refused."""
    with pytest.raises(OrderTooLargeError):
        hermite_truncation_scan(ModelParams(omega=10.0, k=1.0), 201)


def test_hermite_bound_state_on_both_branches():
    """Test the exact n = 2 state: E = 22.5 with one interior node on Plus, none on Minus."""
    params = ModelParams(omega=10.0, k=1500.0)
    plus = hermite_bound_state(params, 2)
    minus = hermite_bound_state(params.with_branch(Branch.MINUS), 2)
    assert plus.energy == pytest.approx(22.5)
    assert minus.energy == pytest.approx(22.5)
    assert plus.interior_nodes == 1
    assert minus.interior_nodes == 0


def test_hermite_bound_state_function_vanishes_at_origin():
    """Test the polynomial state satisfies the Dirichlet condition."""
    params = ModelParams(omega=10.0, k=1500.0)
    assert abs(hermite_bound_state_function(params, 2, 0.0)) < 1e-12
    assert abs(hermite_bound_state_function(params, 2, 2.0 * params.xi0)) < 1e-12
    assert hermite_bound_state_function(params, 2, params.xi0) != 0.0


def test_hermite_bound_state_requires_truncation():
    """Test bound states are refused off the truncation condition or off epsilon = 1/4."""
    with pytest.raises(DomainError, match="does not vanish"):
        hermite_bound_state(ModelParams(omega=10.0, k=1.0), 2)
    with pytest.raises(DomainError, match="epsilon = 1/4"):
        hermite_bound_state(ModelParams(omega=10.0, k=1500.0, epsilon=0.5), 2)


def test_isotonic_energy_ladder():
    """Test the k = 0 spectrum is equispaced by 2 omega."""
    assert isotonic_exact_energy(0, 10.0, 0.25) == pytest.approx(15.0)
    assert isotonic_exact_energy(2, 10.0, 0.25) == pytest.approx(55.0)
    assert isotonic_exact_energy(1, 10.0, 0.5) - isotonic_exact_energy(0, 10.0, 0.5) == (
        pytest.approx(20.0)
    )


def test_isotonic_eigenfunctions_are_orthonormal():
    """Test the k = 0 eigenfunctions have unit norm and are mutually orthogonal."""
    omega, epsilon = 10.0, 0.5
    for n in (0, 1, 3):
        norm, _ = quad(
            lambda x: isotonic_eigenfunction(n, omega, epsilon, x) ** 2,
            0.0,
            8.0,
            epsabs=1e-13,
            epsrel=1e-12,
        )
        assert norm == pytest.approx(1.0, rel=1e-8)
    overlap, _ = quad(
        lambda x: isotonic_eigenfunction(0, omega, epsilon, x)
        * isotonic_eigenfunction(2, omega, epsilon, x),
        0.0,
        8.0,
        epsabs=1e-13,
        epsrel=1e-12,
    )
    assert abs(overlap) < 1e-8


def test_isotonic_eigenfunction_shape():
    """Test phi_n vanishes at the origin, is positive just beyond it and works on arrays."""
    xi = np.linspace(0.0, 3.0, 31)
    values = isotonic_eigenfunction(1, 10.0, 0.25, xi)
    assert values.shape == xi.shape
    assert values[0] == 0.0
    assert values[1] > 0.0
    with pytest.raises(DomainError):
        isotonic_eigenfunction(0, 10.0, 0.25, -1.0)


def test_energy_map_round_trip_on_random_energies():
    """Test both maps invert to 1e-14 over many energies."""
    energy_map = EnergyMap(omega=10.0, k=1.0)
    energies = np.random.default_rng(7).uniform(1.0, 200.0, 1000)
    for energy in energies:
        assert energy_map.energy_of_lambda(energy_map.lambda_of_energy(energy)) == pytest.approx(
            energy, rel=1e-14
        )
        assert energy_map.energy_of_mu(energy_map.mu_of_energy(energy)) == pytest.approx(
            energy, rel=1e-14
        )


def test_hermite_truncation_scan_is_empty_at_small_k():
    """Test omega = 10, k = 1 has no polynomial bound state up to order 50."""
    assert hermite_truncation_scan(ModelParams(omega=10.0, k=1.0), 50).levels == ()


def test_hermite_truncation_scan_single_level_at_k_1500():
    """Test order 2 is the only truncation for omega = 10, k = 1500 up to order 50."""
    assert hermite_truncation_scan(ModelParams(omega=10.0, k=1500.0), 50).levels == (2,)


@pytest.mark.parametrize("omega", [1.0, 10.0])
@pytest.mark.parametrize("k", [0.5, 1.0, 100.0, 1500.0])
def test_hermite_truncation_picks_at_most_one_order(omega, k):
    """Test a positive xi0 admits at most one truncating order."""
    params = ModelParams(omega=omega, k=k)
    assert params.xi0 > 0.0
    assert len(hermite_truncation_scan(params, 50).levels) <= 1


def test_isotonic_eigenfunction_node_count():
    """Test phi_n has exactly n sign changes on the half line."""
    xi = np.linspace(1e-3, 6.0, 4001)
    for n in range(6):
        values = isotonic_eigenfunction(n, 10.0, 0.5, xi)
        assert count_sign_changes(values) == n

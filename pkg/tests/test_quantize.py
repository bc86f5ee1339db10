"""Tests for parabolic-cylinder quantization."""

import math
from unittest.mock import patch

import numpy as np
import pytest

from branched.core.eigensolver import Method, default_domain, solve_levels
from branched.core.errors import (
    ConfigurationError,
    DomainError,
    OrderTooLargeError,
    QuantizationError,
)
from branched.core.model import Branch, ModelParams
from branched.core.quantize import (
    ROOT_RTOL,
    QuantizeConfig,
    boundary_argument,
    quantize_pcf,
    quantize_spectrum,
    roots_at_argument,
)
from branched.core.specfun import parabolic_cylinder_d


def test_quantize_config_validation():
    """Test scan settings are checked."""
    with pytest.raises(ConfigurationError, match="mu_step"):
        QuantizeConfig(mu_step=0.0)
    with pytest.raises(ConfigurationError, match="mu_step"):
        QuantizeConfig(mu_step=1.5)
    with pytest.raises(ConfigurationError, match="mu_tol"):
        QuantizeConfig(mu_tol=-1.0)


def test_boundary_argument_branch_symmetry():
    """Test the two branches quantize at opposite arguments."""
    params = ModelParams(omega=10.0, k=1.0)
    z_plus = boundary_argument(params)
    z_minus = boundary_argument(params.with_branch(Branch.MINUS))
    assert z_plus < 0.0
    assert z_minus == -z_plus
    assert abs(z_plus) == pytest.approx(math.sqrt(2.5) * params.xi0)


def test_harmonic_limit_roots_are_odd_integers():
    """Test k = 0 gives mu = 1, 3, 5 and E = 15, 35, 55 for omega = 10."""
    roots = quantize_pcf(ModelParams(omega=10.0, k=0.0), 3)
    assert [r.n for r in roots] == [0, 1, 2]
    np.testing.assert_allclose([r.mu for r in roots], [1.0, 3.0, 5.0], atol=1e-12)
    np.testing.assert_allclose([r.energy for r in roots], [15.0, 35.0, 55.0], atol=1e-10)


def test_roots_have_small_residuals():
    """Test |D_mu(z)| at every refined root is below 1e-10."""
    for branch in (Branch.PLUS, Branch.MINUS):
        params = ModelParams(omega=10.0, k=1.0, branch=branch)
        roots = quantize_pcf(params, 6)
        z = boundary_argument(params)
        for root in roots:
            assert root.residual <= 1e-10
            assert abs(parabolic_cylinder_d(root.mu, z)) <= 1e-10
            lo, hi = root.bracket
            assert lo <= root.mu <= hi
            assert hi - lo <= 1e-12 * max(1.0, root.mu)


def test_plus_branch_quantizes_below_minus():
    """Test the Plus roots lie below the Minus roots."""
    params = ModelParams(omega=10.0, k=1.0)
    plus = quantize_pcf(params, 6)
    minus = quantize_pcf(params.with_branch(Branch.MINUS), 6)
    for p, m in zip(plus, minus):
        assert p.mu < m.mu
        assert p.energy < m.energy


def test_quantization_agrees_with_finite_differences():
    """Test both spectral routes agree to 1e-3 at epsilon = 1/4."""
    for branch in (Branch.PLUS, Branch.MINUS):
        params = ModelParams(omega=10.0, k=1.0, epsilon=0.25, branch=branch)
        pcf = quantize_spectrum(params, 6)
        fd = solve_levels(params, default_domain(params, 6), 6)
        assert pcf.method is Method.PARABOLIC_CYLINDER
        np.testing.assert_allclose(pcf.energies, fd.energies, atol=1e-3)


def test_quantize_spectrum_error_estimate():
    """Test the error estimate is omega times the final bracket width."""
    params = ModelParams(omega=10.0, k=1.0)
    spectrum = quantize_spectrum(params, 3)
    roots = quantize_pcf(params, 3)
    for err, root in zip(spectrum.est_error, roots):
        assert err == pytest.approx(10.0 * (root.bracket[1] - root.bracket[0]))
        assert err < 1e-9


def test_quantize_requires_epsilon_one_quarter():
    """Test other epsilon values are refused."""
    with pytest.raises(DomainError, match="epsilon = 1/4"):
        quantize_pcf(ModelParams(omega=10.0, k=1.0, epsilon=0.5), 3)


def test_quantize_level_limits():
    """Test the level count must lie in 1..20."""
    params = ModelParams(omega=10.0, k=1.0)
    with pytest.raises(OrderTooLargeError):
        quantize_pcf(params, 0)
    with pytest.raises(OrderTooLargeError):
        quantize_pcf(params, 21)


def test_roots_at_argument_reports_missing_roots():
    """Test a scan range that is too short raises QuantizationError."""
    with pytest.raises(QuantizationError, match="found 1 of 3"):
        roots_at_argument(0.0, 3, 2.0)


def test_root_serialisation():
    """Test the dict form of a root."""
    root = quantize_pcf(ModelParams(omega=10.0, k=0.0), 1)[0]
    data = root.to_dict()
    assert data["n"] == 0
    assert data["mu"] == 1.0
    assert data["bracket"] == [1.0, 1.0]
    assert data["residual"] == 0.0


def test_roots_are_refined_to_a_few_ulps():
    """Test the final bracket is the scipy bisection stopping width around the root."""
    roots = quantize_pcf(ModelParams(omega=10.0, k=1.0), 4)
    for root in roots:
        lo, hi = root.bracket
        half_width = 1e-15 + ROOT_RTOL * root.mu
        assert hi - lo == pytest.approx(2.0 * half_width, rel=1e-6)


def test_failed_bisection_raises_quantization_error():
    """Test a scipy root-finding failure surfaces as QuantizationError."""
    with patch("branched.core.quantize.bisect", side_effect=RuntimeError("Failed to converge")):
        with pytest.raises(QuantizationError, match="bisection") as excinfo:
            quantize_pcf(ModelParams(omega=10.0, k=1.0), 2)
    assert excinfo.value.level == 0

"""First-order perturbation theory on the exact k = 0 (isotonic) basis.

The branched potentials differ from the isotonic one, to first order in sqrt(k), by
-+ sqrt(k/24) xi, so the level shifts are -+ sqrt(k/24) times the first moment
<n| xi |n> of the isotonic eigenfunctions.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.integrate import simpson

try:
    import polars as pl
except ImportError:
    pl = None

from .eigensolver import Method, Spectrum
from .errors import (
    ConditioningWarning,
    ConfigurationError,
    ConvergenceError,
    DomainError,
    OrderTooLargeError,
)
from .model import Branch, ModelParams, isotonic_eigenfunction, isotonic_exact_energy
from .specfun import log_gamma

logger = logging.getLogger(__name__)

MAX_CLOSED_ORDER = 60
MAX_DOUBLE_SUM_ORDER = 12
CONDITIONING_RATIO = 1e12
VALIDITY_MARGIN = 100.0


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings of the composite Simpson oracle.

    Attributes:
        rel_tol: Relative change between successive doublings that ends refinement
        max_panels: Panel count after which refinement gives up
        tail_tol: Integrand size, relative to its peak, at which the range is cut
    """

    rel_tol: float = 1e-12
    max_panels: int = 2**20
    tail_tol: float = 1e-18

    def __post_init__(self) -> None:
        """Validate the quadrature settings."""
        if not 0.0 < self.rel_tol < 1e-3:
            raise ConfigurationError(f"rel_tol must lie in (0, 1e-3), got {self.rel_tol}")
        if self.max_panels < 64:
            raise ConfigurationError(f"max_panels must be at least 64, got {self.max_panels}")
        if not 0.0 < self.tail_tol < 1e-6:
            raise ConfigurationError(f"tail_tol must lie in (0, 1e-6), got {self.tail_tol}")


DEFAULT_QUADRATURE = QuadratureConfig()


@dataclass(frozen=True)
class PerturbationResult:
    """First-order corrected level of one branch.

    Attributes:
        n: Level index
        branch: Branch the correction belongs to
        e0: Unperturbed energy omega (2n + sqrt(eps) + 1)
        moment: Integral of xi phi_n^2 over the half-line
        delta: -+ sqrt(k/24) * moment
        e1: e0 + delta
        valid: Whether k is at least two decades below the smallness bound for n
        bound_ratio: k divided by the smallness bound for n
    """

    n: int
    branch: Branch
    e0: float
    moment: float
    delta: float
    e1: float
    valid: bool
    bound_ratio: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "branch": self.branch.value,
            "e0": self.e0,
            "moment": self.moment,
            "delta": self.delta,
            "e1": self.e1,
            "valid": self.valid,
            "bound_ratio": self.bound_ratio,
        }


def _log_abs_pochhammer(a: float, j: int) -> tuple[float, int]:
    """log|(a)_j| and the sign of (a)_j for (a)_j != 0."""
    log_mag = 0.0
    sign = 1
    for m in range(j):
        factor = a + m
        if factor < 0.0:
            sign = -sign
        log_mag += math.log(abs(factor))
    return log_mag, sign


def _check_moment_args(n: int, epsilon: float, omega: float, limit: int) -> None:
    if n < 0:
        raise DomainError(f"level must be non-negative, got {n}")
    if n > limit:
        raise OrderTooLargeError(f"level must not exceed {limit}, got {n}")
    if epsilon < 0.0:
        raise DomainError(f"epsilon must be non-negative, got {epsilon}")
    if not omega > 0.0:
        raise DomainError(f"omega must be positive, got {omega}")


def _signed_fsum(log_terms: list[float], signs: list[int], log_prefactor: float) -> float:
    """Compensated sum of sign * exp(log_term + log_prefactor), with a cancellation check."""
    terms = [s * math.exp(t + log_prefactor) for t, s in zip(log_terms, signs)]
    result = math.fsum(terms)
    largest = max(abs(t) for t in terms)
    if largest > CONDITIONING_RATIO * abs(result):
        message = (
            f"moment sum cancels {largest / abs(result):.2e} fold; "
            "the result has lost significant digits"
        )
        logger.warning(message)
        warnings.warn(message, ConditioningWarning, stacklevel=3)
    return result


def first_moment_closed(n: int, epsilon: float, omega: float) -> float:
    """First moment of the isotonic eigenfunction phi_n from its Laguerre expansion.

    Expanding both Laguerre factors and integrating term by term gives a double sum
    over (j, l); the inner sum is a terminating Gauss series at unit argument
    (Chu-Vandermonde), which leaves

        (8/omega)^(1/2) / (n! Gamma(a+1))
            * sum_j (-n)_j Gamma(a+3/2+j) (-1/2-j)_n / ((a+1)_j j!),   a = sqrt(eps)

    summed in log-magnitude/sign form.

    Args:
        n: Level index, at most 60
        epsilon: Ordering parameter, non-negative
        omega: Angular frequency

    Returns:
        The moment, positive

    Raises:
        OrderTooLargeError: If n > 60
    """
    _check_moment_args(n, epsilon, omega, MAX_CLOSED_ORDER)
    alpha = math.sqrt(epsilon)

    log_terms = []
    signs = []
    for j in range(n + 1):
        log_neg_n, sign_neg_n = _log_abs_pochhammer(-n, j)
        log_half, sign_half = _log_abs_pochhammer(-0.5 - j, n)
        log_terms.append(
            log_neg_n
            + log_gamma(alpha + 1.5 + j)
            + log_half
            - (log_gamma(alpha + 1.0 + j) - log_gamma(alpha + 1.0))
            - log_gamma(j + 1.0)
        )
        signs.append(sign_neg_n * sign_half)

    log_prefactor = 0.5 * math.log(8.0 / omega) - log_gamma(n + 1.0) - log_gamma(alpha + 1.0)
    return _signed_fsum(log_terms, signs, log_prefactor)


def first_moment_double_sum(n: int, epsilon: float, omega: float) -> float:
    """The uncollapsed double sum over Laguerre coefficient pairs.

    The terms alternate and grow like Gamma(2n), so this is only kept for small n
    as a cross-check of first_moment_closed.

    Raises:
        OrderTooLargeError: If n > 12
    """
    _check_moment_args(n, epsilon, omega, MAX_DOUBLE_SUM_ORDER)
    alpha = math.sqrt(epsilon)

    coeff_logs = []
    coeff_signs = []
    for j in range(n + 1):
        log_neg_n, sign_neg_n = _log_abs_pochhammer(-n, j)
        coeff_logs.append(
            log_neg_n - (log_gamma(alpha + 1.0 + j) - log_gamma(alpha + 1.0)) - log_gamma(j + 1.0)
        )
        coeff_signs.append(sign_neg_n)

    log_terms = []
    signs = []
    for j in range(n + 1):
        for l in range(n + 1):
            log_terms.append(coeff_logs[j] + coeff_logs[l] + log_gamma(alpha + 1.5 + j + l))
            signs.append(coeff_signs[j] * coeff_signs[l])

    # N_n^2 times the squared Laguerre normalisation (a+1)_n / n!
    log_prefactor = (
        0.5 * math.log(8.0 / omega)
        + log_gamma(n + alpha + 1.0)
        - log_gamma(n + 1.0)
        - 2.0 * log_gamma(alpha + 1.0)
    )
    return _signed_fsum(log_terms, signs, log_prefactor)


def _moment_integrand(n: int, epsilon: float, omega: float, xi: np.ndarray) -> np.ndarray:
    phi = isotonic_eigenfunction(n, omega, epsilon, xi)
    return xi * phi**2


def _cutoff(n: int, epsilon: float, omega: float, config: QuadratureConfig) -> float:
    """Smallest xi past the peak where the integrand falls below tail_tol of its peak."""
    # t = omega xi^2 / 8 carries the weight t^(2n + a + 1/2) exp(-t); start past its peak.
    t_peak = 2.0 * n + math.sqrt(epsilon) + 1.0
    xi = math.sqrt(8.0 * t_peak / omega)
    samples = np.linspace(xi / 200.0, 2.0 * xi, 400)
    peak = float(np.max(_moment_integrand(n, epsilon, omega, samples)))
    while float(_moment_integrand(n, epsilon, omega, np.array([xi]))[0]) * xi > (
        config.tail_tol * peak
    ):
        xi *= 1.1
    return xi


def first_moment_quadrature(
    n: int, epsilon: float, omega: float, config: QuadratureConfig = DEFAULT_QUADRATURE
) -> float:
    """First moment by composite Simpson with panel doubling.

    Args:
        n: Level index
        epsilon: Ordering parameter
        omega: Angular frequency
        config: Tolerance and panel cap

    Returns:
        The moment

    Raises:
        ConvergenceError: If max_panels is reached before successive estimates agree
    """
    _check_moment_args(n, epsilon, omega, MAX_CLOSED_ORDER)
    xi_cut = _cutoff(n, epsilon, omega, config)

    panels = 64
    xi = np.linspace(0.0, xi_cut, panels + 1)
    previous = simpson(_moment_integrand(n, epsilon, omega, xi), x=xi)
    while panels < config.max_panels:
        panels *= 2
        xi = np.linspace(0.0, xi_cut, panels + 1)
        current = simpson(_moment_integrand(n, epsilon, omega, xi), x=xi)
        if abs(current - previous) <= config.rel_tol * abs(current):
            logger.debug("Moment n=%d converged with %d panels on (0, %.4g]", n, panels, xi_cut)
            return float(current)
        previous = current
    raise ConvergenceError(
        f"Simpson refinement for level {n} did not converge within {config.max_panels} panels",
        level=n,
    )


def smallness_bound(omega: float, epsilon: float, n_max: int) -> float:
    """3 omega^3 / (n_max + sqrt(eps)); infinite when the denominator vanishes."""
    denominator = n_max + math.sqrt(epsilon)
    if denominator == 0.0:
        return math.inf
    return 3.0 * omega**3 / denominator


def corrected_energies(params: ModelParams, n_levels: int) -> list[PerturbationResult]:
    """First-order energies of the selected branch for levels 0..n_levels-1.

    Args:
        params: Model parameters
        n_levels: Number of levels

    Returns:
        One result per level
    """
    if n_levels < 1:
        raise DomainError(f"n_levels must be positive, got {n_levels}")
    scale = math.sqrt(params.k / 24.0)
    results = []
    for n in range(n_levels):
        e0 = isotonic_exact_energy(n, params.omega, params.epsilon)
        moment = first_moment_closed(n, params.epsilon, params.omega)
        delta = -params.branch.sign * scale * moment
        bound = smallness_bound(params.omega, params.epsilon, n)
        ratio = params.k / bound
        results.append(
            PerturbationResult(
                n=n,
                branch=params.branch,
                e0=e0,
                moment=moment,
                delta=delta,
                e1=e0 + delta,
                valid=ratio <= 1.0 / VALIDITY_MARGIN,
                bound_ratio=ratio,
            )
        )
    invalid = [r.n for r in results if not r.valid]
    if invalid:
        logger.warning("k = %g is outside the perturbative regime for levels %s", params.k, invalid)
    return results


def perturbative_spectrum(params: ModelParams, n_levels: int) -> Spectrum:
    """corrected_energies packed as a Spectrum.

    The error estimate is the size of the neglected O(k) term, taken as delta^2 / (2 omega).
    """
    results = corrected_energies(params, n_levels)
    return Spectrum(
        params=params,
        method=Method.PERTURBATION,
        energies=tuple(r.e1 for r in results),
        est_error=tuple(r.delta**2 / (2.0 * params.omega) for r in results),
    )


def perturbation_table(params: ModelParams, n_levels: int) -> "pl.DataFrame":
    """Both branches side by side: columns n, e0, delta_plus, e1_plus, e1_minus."""
    if pl is None:
        raise ImportError("Polars is required but not installed")
    plus = corrected_energies(params.with_branch(Branch.PLUS), n_levels)
    minus = corrected_energies(params.with_branch(Branch.MINUS), n_levels)
    return pl.DataFrame(
        {
            "n": [r.n for r in plus],
            "e0": [r.e0 for r in plus],
            "delta_plus": [r.delta for r in plus],
            "e1_plus": [r.e1 for r in plus],
            "e1_minus": [r.e1 for r in minus],
        }
    )

"""Special functions used by the spectral routes.

Gamma and reciprocal gamma come from the standard library and ``scipy.special``;
the orthogonal polynomials, Kummer's function and the parabolic cylinder function
of real order are evaluated here by recurrences and power series.
"""

import logging
import math
from dataclasses import dataclass

from scipy.special import rgamma

from .errors import ConvergenceError, DomainError, OrderTooLargeError

logger = logging.getLogger(__name__)

MAX_HERMITE_ORDER = 200


@dataclass(frozen=True)
class SpecFunConfig:
    """Truncation controls for the power series.

    Attributes:
        series_tol: Relative size below which a series term counts as negligible
        max_terms: Number of terms after which a series is declared divergent
    """

    series_tol: float = 1e-15
    max_terms: int = 500

    def __post_init__(self) -> None:
        """Validate the tolerances."""
        if not 0.0 < self.series_tol <= 1e-6:
            raise DomainError(f"series_tol must lie in (0, 1e-6], got {self.series_tol}")
        if self.max_terms < 100:
            raise DomainError(f"max_terms must be at least 100, got {self.max_terms}")


DEFAULT_SPECFUN = SpecFunConfig()


def log_gamma(x: float) -> float:
    """Natural logarithm of the gamma function for positive arguments.

    Args:
        x: Positive real argument

    Returns:
        ln Γ(x)

    Raises:
        DomainError: If x is not positive
    """
    if not x > 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def reciprocal_gamma(x: float) -> float:
    """1/Γ(x), exactly zero at the poles of Γ."""
    return float(rgamma(x))


def pochhammer(a: float, j: int) -> float:
    """Rising factorial (a)_j = a(a+1)...(a+j-1), with (a)_0 = 1."""
    if j < 0:
        raise DomainError(f"pochhammer requires j >= 0, got {j}")
    value = 1.0
    for m in range(j):
        value *= a + m
    return value


def hermite_terms(n: int, x: float) -> tuple[float, float]:
    """Physicists' Hermite polynomial together with its cancellation scale.

    The scale is the larger magnitude of the two recurrence terms 2x·H_{n-1} and
    2(n-1)·H_{n-2} that combine into H_n, so a zero of H_n can be judged relative
    to the numbers that cancelled to produce it.

    Args:
        n: Polynomial order, at most 200
        x: Evaluation point

    Returns:
        Tuple (H_n(x), scale)
    """
    if n < 0:
        raise DomainError(f"Hermite order must be non-negative, got {n}")
    if n > MAX_HERMITE_ORDER:
        raise OrderTooLargeError(
            f"Hermite order {n} exceeds the recurrence guard {MAX_HERMITE_ORDER}"
        )
    if n == 0:
        return 1.0, 1.0

    h_prev, h_curr = 1.0, 2.0 * x
    scale = abs(2.0 * x)
    for m in range(1, n):
        lead = 2.0 * x * h_curr
        back = 2.0 * m * h_prev
        h_prev, h_curr = h_curr, lead - back
        scale = max(abs(lead), abs(back))
    return h_curr, scale


def hermite(n: int, x: float) -> float:
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    return hermite_terms(n, x)[0]


def laguerre_assoc(n: int, alpha: float, t: float) -> float:
    """Associated Laguerre polynomial from its terminating hypergeometric series.

    L_n^alpha(t) = (alpha+1)_n / n! * sum_j (-n)_j / (alpha+1)_j * t^j / j!

    Args:
        n: Degree
        alpha: Order, greater than -1
        t: Argument

    Returns:
        L_n^alpha(t)
    """
    if n < 0:
        raise DomainError(f"Laguerre degree must be non-negative, got {n}")
    if not alpha > -1.0:
        raise DomainError(f"Laguerre order must exceed -1, got {alpha}")

    term = 1.0
    terms = [term]
    for j in range(n):
        term *= (j - n) / ((alpha + 1.0 + j) * (j + 1.0)) * t
        terms.append(term)
    return math.fsum(terms) * pochhammer(alpha + 1.0, n) / math.factorial(n)


def laguerre_recurrence(n: int, alpha: float, t):
    """Associated Laguerre polynomial by the three-term recurrence.

    Works elementwise on numpy arrays and is the stable evaluator for
    eigenfunctions on grids.
    """
    if n < 0:
        raise DomainError(f"Laguerre degree must be non-negative, got {n}")
    l_prev = t * 0.0 + 1.0
    if n == 0:
        return l_prev
    l_curr = 1.0 + alpha - t
    for m in range(1, n):
        l_prev, l_curr = l_curr, ((2 * m + 1 + alpha - t) * l_curr - (m + alpha) * l_prev) / (
            m + 1
        )
    return l_curr


def kummer_m(a: float, b: float, z: float, config: SpecFunConfig = DEFAULT_SPECFUN) -> float:
    """Kummer's confluent hypergeometric function M(a, b, z) by its power series.

    The series stops once two consecutive terms are below ``series_tol`` times the
    partial sum.

    Raises:
        DomainError: If b is a non-positive integer or |z| > 50
        ConvergenceError: If ``max_terms`` terms do not reach the tolerance
    """
    if b <= 0 and float(b).is_integer():
        raise DomainError(f"Kummer M is undefined for b = {b}")
    if abs(z) > 50.0:
        raise DomainError(f"Kummer series is restricted to |z| <= 50, got {z}")

    term = 1.0
    partial = 1.0
    small_in_a_row = 0
    for k in range(config.max_terms):
        term *= (a + k) / (b + k) * z / (k + 1)
        partial += term
        if abs(term) <= config.series_tol * abs(partial):
            small_in_a_row += 1
            if small_in_a_row == 2:
                return partial
        else:
            small_in_a_row = 0
    raise ConvergenceError(
        f"Kummer series M({a}, {b}, {z}) did not converge in {config.max_terms} terms"
    )


def parabolic_cylinder_terms(
    mu: float, z: float, config: SpecFunConfig = DEFAULT_SPECFUN
) -> tuple[float, float]:
    """The even and odd parts whose sum is D_mu(z).

    D_mu(z) = 2^(mu/2) sqrt(pi) exp(-z^2/4) [ M(-mu/2, 1/2, z^2/2) / Γ((1-mu)/2)
              - sqrt(2) z M((1-mu)/2, 3/2, z^2/2) / Γ(-mu/2) ]
    """
    if abs(z) > 50.0:
        raise DomainError(f"parabolic cylinder series is restricted to |z| <= 50, got {z}")
    half_z_sq = 0.5 * z * z
    prefactor = 2.0 ** (0.5 * mu) * math.sqrt(math.pi) * math.exp(-0.25 * z * z)

    even = kummer_m(-0.5 * mu, 0.5, half_z_sq, config) * reciprocal_gamma(0.5 * (1.0 - mu))
    odd = 0.0
    if z != 0.0:
        odd = (
            -math.sqrt(2.0)
            * z
            * kummer_m(0.5 * (1.0 - mu), 1.5, half_z_sq, config)
            * reciprocal_gamma(-0.5 * mu)
        )
    return prefactor * even, prefactor * odd


def parabolic_cylinder_d(mu: float, z: float, config: SpecFunConfig = DEFAULT_SPECFUN) -> float:
    """Parabolic cylinder function D_mu(z) of real order.

    Args:
        mu: Real order
        z: Real argument with |z| <= 50
        config: Series controls

    Returns:
        D_mu(z)
    """
    even, odd = parabolic_cylinder_terms(mu, z, config)
    return even + odd

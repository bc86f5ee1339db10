"""Parabolic-cylinder quantization of the epsilon = 1/4 problem.

With epsilon = 1/4 the displaced half-line oscillator is solved by D_mu, and the
Dirichlet condition at the origin becomes D_mu(z) = 0 with z = -+ sqrt(omega/4) xi0.
Roots mu_n are bracketed on a uniform scan and refined by bisection.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.optimize import bisect

from .eigensolver import Method, Spectrum
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    OrderTooLargeError,
    QuantizationError,
)
from .model import ModelParams
from .specfun import DEFAULT_SPECFUN, SpecFunConfig, parabolic_cylinder_d

logger = logging.getLogger(__name__)

# Relative stopping width of the bisection, the smallest scipy accepts.
ROOT_RTOL = 4.0 * np.finfo(float).eps
BISECT_MAXITER = 100


@dataclass(frozen=True)
class QuantizeConfig:
    """Root scan settings.

    Attributes:
        mu_step: Spacing of the bracketing scan in mu
        mu_tol: Largest acceptable final bracket width
    """

    mu_step: float = 0.25
    mu_tol: float = 1e-12

    def __post_init__(self) -> None:
        """Validate the scan settings."""
        if not 0.0 < self.mu_step <= 1.0:
            raise ConfigurationError(f"mu_step must lie in (0, 1], got {self.mu_step}")
        if not self.mu_tol > 0.0:
            raise ConfigurationError(f"mu_tol must be positive, got {self.mu_tol}")


DEFAULT_QUANTIZE = QuantizeConfig()


@dataclass(frozen=True)
class QuantizationRoot:
    """One root of mu -> D_mu(z) and the energy it quantizes.

    Attributes:
        n: Level index
        mu: Root order
        energy: omega (mu + 1/2) - k / (6 omega^2)
        bracket: Final (mu_lo, mu_hi) bracket
        residual: |D_mu(z)| at the root
    """

    n: int
    mu: float
    energy: float
    bracket: tuple[float, float]
    residual: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "mu": self.mu,
            "energy": self.energy,
            "bracket": list(self.bracket),
            "residual": self.residual,
        }


def boundary_argument(params: ModelParams) -> float:
    """z = -sqrt(omega/4) xi0 on the Plus branch, +sqrt(omega/4) xi0 on the Minus branch."""
    return -params.branch.sign * math.sqrt(params.omega / 4.0) * params.xi0


def _refine(
    lo: float, hi: float, z: float, config: QuantizeConfig, specfun: SpecFunConfig, level: int
) -> tuple[float, float, float]:
    """Bisect a sign-changing bracket with scipy down to a few ulps of the root."""
    xtol = 1e-3 * config.mu_tol
    try:
        root = bisect(
            parabolic_cylinder_d,
            lo,
            hi,
            args=(z, specfun),
            xtol=xtol,
            rtol=ROOT_RTOL,
            maxiter=BISECT_MAXITER,
        )
    except (ValueError, RuntimeError) as e:
        raise QuantizationError(
            f"bisection of D_mu({z:.6g}) on [{lo}, {hi}] failed: {e}", level=level
        ) from e
    half_width = xtol + ROOT_RTOL * abs(root)
    return root, max(lo, root - half_width), min(hi, root + half_width)


def roots_at_argument(
    z: float,
    n_roots: int,
    mu_max: float,
    config: QuantizeConfig = DEFAULT_QUANTIZE,
    specfun: SpecFunConfig = DEFAULT_SPECFUN,
) -> list[tuple[float, tuple[float, float], float]]:
    """The lowest n_roots zeros of mu -> D_mu(z) on [0, mu_max].

    A scan point where D_mu is exactly zero counts as a root; otherwise roots are
    bracketed by sign changes between neighbouring scan points.

    Returns:
        List of (mu, (mu_lo, mu_hi), residual)

    Raises:
        QuantizationError: If the scan range holds fewer than n_roots zeros
    """
    n_steps = int(round(mu_max / config.mu_step))
    found = []
    mu_prev = 0.0
    f_prev = parabolic_cylinder_d(mu_prev, z, specfun)
    for i in range(1, n_steps + 1):
        if len(found) == n_roots:
            break
        mu_next = i * config.mu_step
        f_next = parabolic_cylinder_d(mu_next, z, specfun)
        if f_prev == 0.0:
            found.append((mu_prev, (mu_prev, mu_prev), 0.0))
        elif f_next != 0.0 and (f_prev < 0.0) != (f_next < 0.0):
            root, lo, hi = _refine(mu_prev, mu_next, z, config, specfun, len(found))
            if hi - lo > config.mu_tol * max(1.0, abs(root)):
                raise ConvergenceError(
                    f"bisection stalled with bracket width {hi - lo:.3e}", level=len(found)
                )
            found.append((root, (lo, hi), abs(parabolic_cylinder_d(root, z, specfun))))
        mu_prev, f_prev = mu_next, f_next
    if len(found) < n_roots and f_prev == 0.0:
        found.append((mu_prev, (mu_prev, mu_prev), 0.0))

    if len(found) < n_roots:
        raise QuantizationError(
            f"found {len(found)} of {n_roots} roots of D_mu({z:.6g}) on [0, {mu_max}]",
            level=len(found),
        )
    return found


def quantize_pcf(
    params: ModelParams,
    n_levels: int,
    config: QuantizeConfig = DEFAULT_QUANTIZE,
    specfun: SpecFunConfig = DEFAULT_SPECFUN,
) -> list[QuantizationRoot]:
    """Energies of the epsilon = 1/4 problem from the zeros of D_mu(-+ sqrt(omega/4) xi0).

    Args:
        params: Model parameters, epsilon must be exactly 1/4
        n_levels: Number of levels, 1 to 20
        config: Scan settings
        specfun: Series settings for D_mu

    Returns:
        Roots ordered by n

    Raises:
        DomainError: If epsilon != 1/4
        QuantizationError: If the scan on [0, 2 n_levels + 2] finds too few roots
    """
    if params.epsilon != 0.25:
        raise DomainError(
            f"parabolic-cylinder quantization needs epsilon = 1/4, got {params.epsilon}"
        )
    if not 1 <= n_levels <= 20:
        raise OrderTooLargeError(f"n_levels must lie in [1, 20], got {n_levels}")

    z = boundary_argument(params)
    mu_max = 2.0 * n_levels + 2.0
    logger.debug("Scanning D_mu(%.6g) on [0, %g] in steps of %g", z, mu_max, config.mu_step)
    energy_map = params.energy_map
    roots = [
        QuantizationRoot(
            n=n,
            mu=mu,
            energy=energy_map.energy_of_mu(mu),
            bracket=bracket,
            residual=residual,
        )
        for n, (mu, bracket, residual) in enumerate(
            roots_at_argument(z, n_levels, mu_max, config, specfun)
        )
    ]
    logger.info("Quantized %d levels on the %s branch", len(roots), params.branch.value)
    return roots


def quantize_spectrum(
    params: ModelParams,
    n_levels: int,
    config: QuantizeConfig = DEFAULT_QUANTIZE,
    specfun: SpecFunConfig = DEFAULT_SPECFUN,
) -> Spectrum:
    """quantize_pcf packed as a Spectrum; the error estimate is omega times the bracket width."""
    roots = quantize_pcf(params, n_levels, config, specfun)
    return Spectrum(
        params=params,
        method=Method.PARABOLIC_CYLINDER,
        energies=tuple(r.energy for r in roots),
        est_error=tuple(params.omega * (r.bracket[1] - r.bracket[0]) for r in roots),
    )

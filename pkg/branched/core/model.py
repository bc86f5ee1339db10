"""Physical parameters, effective potentials and the exactly solvable limits."""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

try:
    import polars as pl
except ImportError:
    pl = None

from .errors import DomainError, OrderTooLargeError
from .specfun import MAX_HERMITE_ORDER, hermite, hermite_terms, laguerre_recurrence, log_gamma

logger = logging.getLogger(__name__)

HERMITE_ZERO_TOL = 1e-9


class Branch(str, Enum):
    """Sign choice in front of the square root of the branched Hamiltonians."""

    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> int:
        """+1 for the Plus branch (potential centred at +xi0), -1 otherwise."""
        return 1 if self is Branch.PLUS else -1


@dataclass(frozen=True)
class EnergyMap:
    """Affine maps between the energy E and the spectral variables lambda and mu.

    lambda = E/4 + k/(24 omega^2),  mu = E/omega + k/(6 omega^3) - 1/2
    """

    omega: float
    k: float

    def lambda_of_energy(self, energy: float) -> float:
        return energy / 4.0 + self.k / (24.0 * self.omega**2)

    def energy_of_lambda(self, lam: float) -> float:
        return 4.0 * (lam - self.k / (24.0 * self.omega**2))

    def mu_of_energy(self, energy: float) -> float:
        return energy / self.omega + self.k / (6.0 * self.omega**3) - 0.5

    def energy_of_mu(self, mu: float) -> float:
        return self.omega * (mu + 0.5) - self.k / (6.0 * self.omega**2)


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one branched effective problem.

    Attributes:
        omega: Angular frequency, positive
        k: Anharmonicity, non-negative
        epsilon: Ordering parameter 4*alpha*gamma, non-negative
        branch: Which of the two branched Hamiltonians
    """

    omega: float
    k: float
    epsilon: float = 0.25
    branch: Branch = Branch.PLUS

    def __post_init__(self) -> None:
        """Validate the parameter ranges and coerce the branch."""
        if not self.omega > 0.0:
            raise DomainError(f"omega must be positive, got {self.omega}")
        if not self.k >= 0.0:
            raise DomainError(f"k must be non-negative, got {self.k}")
        if not self.epsilon >= 0.0:
            raise DomainError(f"epsilon must be non-negative, got {self.epsilon}")
        object.__setattr__(self, "branch", Branch(self.branch))

    @property
    def xi0(self) -> float:
        """Displacement of the harmonic centre, sqrt(k/6)*4/omega^2."""
        return math.sqrt(self.k / 6.0) * 4.0 / self.omega**2

    @property
    def sqrt_epsilon(self) -> float:
        return math.sqrt(self.epsilon)

    @property
    def center(self) -> float:
        """Signed position of the potential minimum for this branch."""
        return self.branch.sign * self.xi0

    @property
    def energy_map(self) -> EnergyMap:
        return EnergyMap(self.omega, self.k)

    def validity_bound(self, n_max: int) -> float:
        """Perturbative smallness bound 3 omega^3 / (n_max + sqrt(epsilon))."""
        from .perturbation import smallness_bound

        return smallness_bound(self.omega, self.epsilon, n_max)

    def with_branch(self, branch: Branch | str) -> "ModelParams":
        """Copy of these parameters on the other (or same) branch."""
        return ModelParams(self.omega, self.k, self.epsilon, Branch(branch))

    def to_dict(self) -> dict[str, Any]:
        return {
            "omega": self.omega,
            "k": self.k,
            "epsilon": self.epsilon,
            "branch": self.branch.value,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ModelParams":
        """Build parameters from their JSON object form.

        Raises:
            DomainError: If a key is missing or a value is out of range
        """
        missing = {"omega", "k", "epsilon", "branch"} - set(data)
        if missing:
            raise DomainError(f"Model parameters are missing keys: {sorted(missing)}")
        try:
            branch = Branch(str(data["branch"]).lower())
        except ValueError as e:
            raise DomainError(f"Unknown branch: {data['branch']!r}") from e
        return cls(float(data["omega"]), float(data["k"]), float(data["epsilon"]), branch)


def displaced_potential(omega: float, k: float, epsilon: float, center: float, xi):
    """omega^2 (xi - center)^2 / 64 + (epsilon - 1/4) / xi^2 - k / (24 omega^2)."""
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr <= 0.0):
        raise DomainError("effective potential is defined for xi > 0 only")
    value = (
        omega**2 * (xi_arr - center) ** 2 / 64.0
        + (epsilon - 0.25) / xi_arr**2
        - k / (24.0 * omega**2)
    )
    return float(value) if value.ndim == 0 else value


def effective_potential(params: ModelParams, xi):
    """Effective half-line potential of the selected branch.

    Args:
        params: Model parameters
        xi: Positive coordinate (scalar or numpy array)

    Returns:
        V_eff(xi), same shape as ``xi``
    """
    return displaced_potential(params.omega, params.k, params.epsilon, params.center, xi)


def potential_table(
    params: ModelParams, xi_min: float, xi_max: float, n_points: int = 400
) -> "pl.DataFrame":
    """Effective potentials of both branches on a uniform grid.

    Returns:
        DataFrame with columns xi, v_plus, v_minus
    """
    if pl is None:
        raise ImportError("Polars is required but not installed")
    if not 0.0 < xi_min < xi_max:
        raise DomainError(f"Need 0 < xi_min < xi_max, got {xi_min}, {xi_max}")
    xi = np.linspace(xi_min, xi_max, n_points)
    return pl.DataFrame(
        {
            "xi": xi,
            "v_plus": effective_potential(params.with_branch(Branch.PLUS), xi),
            "v_minus": effective_potential(params.with_branch(Branch.MINUS), xi),
        }
    )


@dataclass(frozen=True)
class TruncationScan:
    """Orders n for which a Hermite polynomial bound state exists.

    Attributes:
        argument: sqrt(omega xi0^2 / 8)
        levels: Orders with H_n(argument) = 0 within tolerance
        degenerate: True when xi0 = 0 (every odd order qualifies)
    """

    argument: float
    levels: tuple[int, ...]
    degenerate: bool


def hermite_truncation_scan(params: ModelParams, n_max: int) -> TruncationScan:
    """Scan n <= n_max for the polynomial truncation condition H_n(sqrt(omega xi0^2/8)) = 0.

    Epsilon is ignored; the condition belongs to the epsilon = 1/4 problem.
    """
    if n_max > MAX_HERMITE_ORDER:
        raise OrderTooLargeError(f"n_max must not exceed {MAX_HERMITE_ORDER}, got {n_max}")
    argument = math.sqrt(params.omega * params.xi0**2 / 8.0)
    levels = []
    for n in range(n_max + 1):
        value, scale = hermite_terms(n, argument)
        if abs(value) <= HERMITE_ZERO_TOL * scale:
            levels.append(n)
    logger.debug("Hermite truncation scan at argument %.6g: %s", argument, levels)
    return TruncationScan(argument=argument, levels=tuple(levels), degenerate=params.xi0 == 0.0)


@dataclass(frozen=True)
class HermiteBoundState:
    """Exact polynomial bound state of the epsilon = 1/4 problem.

    Attributes:
        n: Hermite order
        energy: omega (n + 1/2) - k / (6 omega^2)
        interior_nodes: Nodes of the Hermite function strictly inside (0, inf)
    """

    n: int
    energy: float
    interior_nodes: int


def hermite_bound_state(params: ModelParams, n: int) -> HermiteBoundState:
    """The bound state that exists when the truncation condition holds for order n.

    Raises:
        DomainError: If epsilon != 1/4 or H_n does not vanish at the boundary
    """
    if params.epsilon != 0.25:
        raise DomainError("Hermite bound states exist for epsilon = 1/4 only")
    scan = hermite_truncation_scan(params, n)
    if n not in scan.levels:
        raise DomainError(f"H_{n} does not vanish at {scan.argument:.6g}")

    # Zeros of H_n(sqrt(omega/8)(xi - c)) lying at xi > 0, excluding the boundary one.
    roots = np.polynomial.hermite.hermroots([0.0] * n + [1.0])
    positions = params.center + roots / math.sqrt(params.omega / 8.0)
    interior = int(np.sum(positions > 1e-9 * max(1.0, params.xi0)))
    energy = params.omega * (n + 0.5) - params.k / (6.0 * params.omega**2)
    return HermiteBoundState(n=n, energy=energy, interior_nodes=interior)


def hermite_bound_state_function(params: ModelParams, n: int, xi):
    """Unnormalised exp(-omega (xi-c)^2/16) H_n(sqrt(omega/8) (xi-c))."""
    y = np.asarray(xi, dtype=float) - params.center
    values = np.exp(-params.omega * y**2 / 16.0) * np.vectorize(lambda s: hermite(n, s))(
        math.sqrt(params.omega / 8.0) * y
    )
    return float(values) if values.ndim == 0 else values


def isotonic_exact_energy(n: int, omega: float, epsilon: float) -> float:
    """Equispaced k = 0 spectrum omega (2n + sqrt(epsilon) + 1)."""
    return omega * (2 * n + math.sqrt(epsilon) + 1.0)


def isotonic_norm(n: int, omega: float, epsilon: float) -> float:
    """Normalisation N_n of the k = 0 eigenfunctions."""
    alpha = math.sqrt(epsilon)
    log_sq = (
        math.log(2.0)
        + (alpha + 1.0) * math.log(omega / 8.0)
        + log_gamma(n + 1.0)
        - log_gamma(n + alpha + 1.0)
    )
    return math.exp(0.5 * log_sq)


def isotonic_eigenfunction(n: int, omega: float, epsilon: float, xi):
    """Normalised k = 0 eigenfunction on the half-line.

    phi_n(xi) = N_n xi^(1/2 + sqrt(eps)) exp(-omega xi^2 / 16) L_n^sqrt(eps)(omega xi^2 / 8)

    Args:
        n: Level index
        omega: Angular frequency
        epsilon: Ordering parameter, non-negative
        xi: Non-negative coordinate (scalar or numpy array)
    """
    if epsilon < 0.0:
        raise DomainError(f"epsilon must be non-negative, got {epsilon}")
    alpha = math.sqrt(epsilon)
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr < 0.0):
        raise DomainError("isotonic eigenfunctions live on xi >= 0")
    t = omega * xi_arr**2 / 8.0
    values = (
        isotonic_norm(n, omega, epsilon)
        * xi_arr ** (0.5 + alpha)
        * np.exp(-omega * xi_arr**2 / 16.0)
        * laguerre_recurrence(n, alpha, t)
    )
    return float(values) if values.ndim == 0 else values

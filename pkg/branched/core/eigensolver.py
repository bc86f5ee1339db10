"""Finite-difference eigenvalues and eigenfunctions of the half-line problems.

The operator -d^2/dxi^2 + V_eff(xi) + k/(24 omega^2) is discretised with second-order
central differences on a uniform grid with Dirichlet nodes at xi = 0 and xi = xi_max.
Its eigenvalues are lambda = E/4 + k/(24 omega^2); energies are converted back only
when a Spectrum is built.
"""

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
from numpy.linalg import LinAlgError
from scipy.integrate import trapezoid
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal

try:
    import polars as pl
except ImportError:
    pl = None

from .errors import (
    AttractiveSingularityWarning,
    ConfigurationError,
    ConsistencyError,
    ConvergenceError,
    DomainError,
    OrderTooLargeError,
)
from .model import Branch, ModelParams, effective_potential, isotonic_exact_energy

logger = logging.getLogger(__name__)

MAX_LEVELS = 20
MIN_GRID_POINTS = 500
NODE_THRESHOLD = 1e-6


class Method(str, Enum):
    """Route by which a spectrum was obtained."""

    FINITE_DIFFERENCE = "FiniteDifference"
    PARABOLIC_CYLINDER = "ParabolicCylinder"
    PERTURBATION = "Perturbation"


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the finite-difference solver.

    Attributes:
        n_points: Number of grid intervals on (0, xi_max]
        richardson: Whether to extrapolate with a second solve on twice as many points
        bisection_tol: Absolute bisection tolerance in lambda
        extra_levels: Levels beyond the requested ones used to size the default domain
    """

    n_points: int = 4000
    richardson: bool = True
    bisection_tol: float = 1e-12
    extra_levels: int = 4

    def __post_init__(self) -> None:
        """Validate the solver settings."""
        if self.n_points < MIN_GRID_POINTS:
            raise ConfigurationError(
                f"n_points must be at least {MIN_GRID_POINTS}, got {self.n_points}"
            )
        if not self.bisection_tol > 0.0:
            raise ConfigurationError(f"bisection_tol must be positive, got {self.bisection_tol}")
        if self.extra_levels < 0:
            raise ConfigurationError(
                f"extra_levels must be non-negative, got {self.extra_levels}"
            )


DEFAULT_SOLVER = SolverConfig()


@dataclass(frozen=True)
class Grid:
    """Uniform grid over (0, xi_max] with step h = xi_max / n_points.

    Attributes:
        xi_max: Position of the outer Dirichlet wall
        n_points: Number of intervals; interior nodes are i*h for i = 1..n_points-1
    """

    xi_max: float
    n_points: int = 4000

    def __post_init__(self) -> None:
        """Validate the grid extent and resolution."""
        if not self.xi_max > 0.0:
            raise ConfigurationError(f"xi_max must be positive, got {self.xi_max}")
        if self.n_points < MIN_GRID_POINTS:
            raise ConfigurationError(
                f"n_points must be at least {MIN_GRID_POINTS}, got {self.n_points}"
            )

    @property
    def step(self) -> float:
        return self.xi_max / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        """All nodes including the two Dirichlet boundaries."""
        return np.arange(self.n_points + 1) * self.step

    @property
    def interior(self) -> np.ndarray:
        return np.arange(1, self.n_points) * self.step

    def refined(self) -> "Grid":
        """The same domain with twice as many intervals."""
        return Grid(self.xi_max, 2 * self.n_points)


@dataclass(frozen=True)
class TridiagonalOperator:
    """Symmetric tridiagonal matrix acting on the interior nodes of a grid."""

    diagonal: np.ndarray
    off_diagonal: np.ndarray
    grid: Grid


@dataclass(frozen=True)
class GridMeta:
    xi_max: float
    n_points: int
    richardson: bool


@dataclass(frozen=True)
class Spectrum:
    """Ordered energies of one branch obtained by one method.

    Attributes:
        params: Model parameters the spectrum belongs to
        method: How the energies were computed
        energies: E_0 < E_1 < ... in the energy variable (not lambda)
        est_error: Per-level error estimate, same length as ``energies``
        grid_meta: Discretisation record for finite-difference spectra
    """

    params: ModelParams
    method: Method
    energies: tuple[float, ...]
    est_error: tuple[float, ...]
    grid_meta: GridMeta | None = None

    def __post_init__(self) -> None:
        """Check ordering and shape."""
        if len(self.energies) != len(self.est_error):
            raise ConsistencyError("energies and est_error must have the same length")
        if any(b <= a for a, b in zip(self.energies, self.energies[1:])):
            raise ConsistencyError(f"energies are not strictly increasing: {self.energies}")

    @property
    def n_levels(self) -> int:
        return len(self.energies)

    def to_dict(self) -> dict[str, Any]:
        data = {
            "params": self.params.to_dict(),
            "method": self.method.value,
            "energies": list(self.energies),
            "est_error": list(self.est_error),
        }
        if self.grid_meta is not None:
            data["grid"] = {
                "xi_max": self.grid_meta.xi_max,
                "n_points": self.grid_meta.n_points,
                "richardson": self.grid_meta.richardson,
            }
        return data

    def to_frame(self) -> "pl.DataFrame":
        """Levels as a DataFrame with columns n, energy, est_error."""
        if pl is None:
            raise ImportError("Polars is required but not installed")
        return pl.DataFrame(
            {
                "n": list(range(self.n_levels)),
                "energy": list(self.energies),
                "est_error": list(self.est_error),
            }
        )


@dataclass(frozen=True)
class EigenfunctionTable:
    """Samples of one bound state on every grid node (boundaries included).

    Attributes:
        grid: The grid the samples live on
        values: phi at each node, zero at both ends
        n: Level index
        energy: Eigenvalue in the energy variable
        normalized: Whether the samples have unit trapezoid L2 norm
    """

    grid: Grid
    values: np.ndarray
    n: int
    energy: float
    normalized: bool = True

    @property
    def xi(self) -> np.ndarray:
        return self.grid.nodes

    def interior_nodes(self) -> int:
        return count_sign_changes(self.values)

    def to_frame(self) -> "pl.DataFrame":
        if pl is None:
            raise ImportError("Polars is required but not installed")
        return pl.DataFrame({"xi": self.xi, "phi": self.values})

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "energy": self.energy,
            "normalized": self.normalized,
            "xi_max": self.grid.xi_max,
            "n_points": self.grid.n_points,
            "xi": self.xi.tolist(),
            "phi": self.values.tolist(),
        }


@dataclass(frozen=True)
class LinearFit:
    """Least-squares line E_n = intercept + slope * n.

    ``delta`` is intercept/omega, so that E_n is close to omega (2n + delta).
    """

    slope: float
    intercept: float
    delta: float


def count_sign_changes(values: np.ndarray, threshold: float = NODE_THRESHOLD) -> int:
    """Sign changes of a sampled function, ignoring samples below threshold * max|values|."""
    cutoff = threshold * float(np.max(np.abs(values)))
    significant = values[np.abs(values) > cutoff]
    if significant.size < 2:
        return 0
    return int(np.count_nonzero(np.signbit(significant[1:]) != np.signbit(significant[:-1])))


def tridiagonal_stencil(potential: np.ndarray, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference stencil of -d^2/dxi^2 + potential on interior nodes.

    Args:
        potential: Potential sampled at the interior nodes
        step: Grid step h

    Returns:
        Tuple (diagonal 2/h^2 + potential, off-diagonal -1/h^2)
    """
    potential = np.asarray(potential, dtype=float)
    diagonal = 2.0 / step**2 + potential
    off_diagonal = np.full(potential.size - 1, -1.0 / step**2)
    return diagonal, off_diagonal


def _lambda_shift(params: ModelParams) -> float:
    return params.k / (24.0 * params.omega**2)


def _wall_height(params: ModelParams, grid: Grid) -> float:
    """Value of V_eff + k/(24 omega^2) at the outer wall, in lambda units."""
    return effective_potential(params, grid.xi_max) + _lambda_shift(params)


def _warn_if_attractive(params: ModelParams, stacklevel: int) -> None:
    """Warn about epsilon < 1/4; stacklevel counts from the public function that calls this."""
    if params.epsilon < 0.25:
        message = (
            f"epsilon = {params.epsilon} < 1/4 makes the inverse-square term attractive; "
            "the Dirichlet eigenvalues are still computed"
        )
        logger.warning(message)
        warnings.warn(message, AttractiveSingularityWarning, stacklevel=stacklevel + 1)


def _assemble(params: ModelParams, grid: Grid) -> TridiagonalOperator:
    potential = effective_potential(params, grid.interior) + _lambda_shift(params)
    diagonal, off_diagonal = tridiagonal_stencil(potential, grid.step)
    return TridiagonalOperator(diagonal=diagonal, off_diagonal=off_diagonal, grid=grid)


def discretize(
    params: ModelParams, grid: Grid, lambda_max: float | None = None
) -> TridiagonalOperator:
    """Assemble the finite-difference operator of the selected branch.

    Args:
        params: Model parameters
        grid: Discretisation grid
        lambda_max: Largest eigenvalue the caller intends to extract, if known

    Returns:
        The symmetric tridiagonal operator in the lambda variable

    Raises:
        ConfigurationError: If the potential at xi_max lies below ``lambda_max``
    """
    _warn_if_attractive(params, stacklevel=2)

    if lambda_max is not None and _wall_height(params, grid) < lambda_max:
        raise ConfigurationError(
            f"xi_max = {grid.xi_max:.6g} is too small: the potential there is "
            f"{_wall_height(params, grid):.6g} < lambda_max = {lambda_max:.6g}"
        )

    return _assemble(params, grid)


def _lowest_lambdas(
    params: ModelParams, grid: Grid, n_levels: int, tol: float
) -> np.ndarray:
    """Sturm-sequence bisection for the n_levels lowest eigenvalues."""
    operator = _assemble(params, grid)
    lambdas = _bisect(operator.diagonal, operator.off_diagonal, n_levels, tol)
    if lambdas.size < n_levels:
        raise ConvergenceError(
            f"Bisection returned {lambdas.size} of {n_levels} levels", level=int(lambdas.size)
        )
    if lambdas[-1] > _wall_height(params, grid):
        raise ConfigurationError(
            f"xi_max = {grid.xi_max:.6g} is too small for {n_levels} levels: "
            f"lambda_max = {lambdas[-1]:.6g} exceeds the wall height "
            f"{_wall_height(params, grid):.6g}"
        )
    return lambdas


def solve_levels(
    params: ModelParams,
    grid: Grid,
    n_levels: int,
    richardson: bool = True,
    config: SolverConfig = DEFAULT_SOLVER,
) -> Spectrum:
    """Lowest eigenvalues of the half-line problem by finite differences.

    With Richardson extrapolation the problem is solved again on twice as many points
    and each level is combined as (4 E_2N - E_N)/3, with error estimate |E_2N - E_N|/3.
    Without it, the estimate comes from a solve on half as many points.

    Args:
        params: Model parameters
        grid: Discretisation grid
        n_levels: Number of levels, 1 to 20
        richardson: Whether to extrapolate in h^2
        config: Solver settings (the bisection tolerance is taken from here)

    Returns:
        A finite-difference Spectrum

    Raises:
        OrderTooLargeError: If n_levels exceeds 20
        ConvergenceError: If the bisection fails
        ConfigurationError: If the domain is too short for the requested levels
    """
    if n_levels < 1:
        raise DomainError(f"n_levels must be positive, got {n_levels}")
    if n_levels > MAX_LEVELS:
        raise OrderTooLargeError(f"n_levels must not exceed {MAX_LEVELS}, got {n_levels}")
    _warn_if_attractive(params, stacklevel=2)
    return _solve_levels(params, grid, n_levels, richardson, config)


def _solve_levels(
    params: ModelParams, grid: Grid, n_levels: int, richardson: bool, config: SolverConfig
) -> Spectrum:
    coarse = _lowest_lambdas(params, grid, n_levels, config.bisection_tol)
    if richardson:
        fine = _lowest_lambdas(params, grid.refined(), n_levels, config.bisection_tol)
        lambdas = (4.0 * fine - coarse) / 3.0
        lambda_error = np.abs(fine - coarse) / 3.0
    else:
        half = max(grid.n_points // 2, 2 * n_levels + 2)
        rough = _lambdas_on(params, grid.xi_max, half, n_levels, config.bisection_tol)
        lambdas = coarse
        lambda_error = np.abs(coarse - rough) / 3.0

    energy_map = params.energy_map
    energies = tuple(energy_map.energy_of_lambda(float(lam)) for lam in lambdas)
    # E = 4 (lambda - shift), so errors scale by 4.
    errors = tuple(4.0 * float(err) for err in lambda_error)
    logger.debug("FD spectrum (%s): %s", params.branch.value, energies)
    return Spectrum(
        params=params,
        method=Method.FINITE_DIFFERENCE,
        energies=energies,
        est_error=errors,
        grid_meta=GridMeta(grid.xi_max, grid.n_points, richardson),
    )


def _lambdas_on(
    params: ModelParams, xi_max: float, n_points: int, n_levels: int, tol: float
) -> np.ndarray:
    """Eigenvalues on a grid that may be coarser than a public Grid allows."""
    step = xi_max / n_points
    interior = np.arange(1, n_points) * step
    potential = effective_potential(params, interior) + _lambda_shift(params)
    diagonal, off_diagonal = tridiagonal_stencil(potential, step)
    return _bisect(diagonal, off_diagonal, n_levels, tol)


def _bisect(
    diagonal: np.ndarray, off_diagonal: np.ndarray, n_levels: int, tol: float
) -> np.ndarray:
    """Sturm-sequence bisection (LAPACK stebz) for the lowest n_levels eigenvalues."""
    logger.debug("Bisecting %d levels on %d interior nodes", n_levels, diagonal.size)
    try:
        return eigvalsh_tridiagonal(
            diagonal,
            off_diagonal,
            select="i",
            select_range=(0, n_levels - 1),
            lapack_driver="stebz",
            tol=tol,
        )
    except LinAlgError as e:
        raise ConvergenceError(f"Sturm bisection failed on {diagonal.size} nodes: {e}") from e


def default_domain(
    params: ModelParams, n_levels: int, config: SolverConfig = DEFAULT_SOLVER
) -> Grid:
    """Grid whose outer wall sits well past the turning point of the highest level.

    xi_max = xi0 + (8/omega) sqrt(2 lambda_est), lambda_est being the lambda of the
    k = 0 energy of level n_levels + extra_levels, so V_eff(xi_max) is about 2 lambda_est.
    """
    energy = isotonic_exact_energy(n_levels + config.extra_levels, params.omega, params.epsilon)
    lambda_est = params.energy_map.lambda_of_energy(energy)
    xi_max = params.xi0 + (8.0 / params.omega) * math.sqrt(2.0 * lambda_est)
    return Grid(xi_max=xi_max, n_points=config.n_points)


def eigenfunction(
    params: ModelParams, grid: Grid, n: int, config: SolverConfig = DEFAULT_SOLVER
) -> EigenfunctionTable:
    """Normalised eigenvector of level n by inverse iteration at the bisected eigenvalue.

    The sign is fixed so the function leaves xi = 0 with positive values, and the number
    of interior sign changes is checked against n.

    Raises:
        ConvergenceError: If inverse iteration does not converge
        ConsistencyError: If the eigenvector does not have n interior nodes
    """
    if not 0 <= n < MAX_LEVELS:
        raise OrderTooLargeError(f"level must lie in [0, {MAX_LEVELS}), got {n}")

    _warn_if_attractive(params, stacklevel=2)
    operator = _assemble(params, grid)
    try:
        lambdas, vectors = eigh_tridiagonal(
            operator.diagonal,
            operator.off_diagonal,
            select="i",
            select_range=(n, n),
            lapack_driver="stebz",
            tol=config.bisection_tol,
        )
    except LinAlgError as e:
        raise ConvergenceError(f"inverse iteration failed for level {n}: {e}", level=n) from e

    values = np.zeros(grid.n_points + 1)
    values[1:-1] = vectors[:, 0]
    xi = grid.nodes
    values /= math.sqrt(trapezoid(values**2, xi))

    significant = np.flatnonzero(np.abs(values) > 1e-3 * np.max(np.abs(values)))
    if values[significant[0]] < 0.0:
        values = -values

    nodes = count_sign_changes(values)
    if nodes != n:
        raise ConsistencyError(f"eigenfunction {n} has {nodes} interior nodes")

    energy = params.energy_map.energy_of_lambda(float(lambdas[0]))
    return EigenfunctionTable(grid=grid, values=values, n=n, energy=energy, normalized=True)


def solve_branches(
    params: ModelParams,
    n_levels: int,
    grid: Grid | None = None,
    config: SolverConfig = DEFAULT_SOLVER,
) -> dict[Branch, Spectrum]:
    """Spectra of both branches, solved concurrently.

    Without an explicit grid each branch gets its default domain, which is the same
    for both because it depends on xi0 only.
    """
    if n_levels < 1:
        raise DomainError(f"n_levels must be positive, got {n_levels}")
    if n_levels > MAX_LEVELS:
        raise OrderTooLargeError(f"n_levels must not exceed {MAX_LEVELS}, got {n_levels}")
    _warn_if_attractive(params, stacklevel=2)
    grid = grid or default_domain(params, n_levels, config)
    branches = (Branch.PLUS, Branch.MINUS)
    with ThreadPoolExecutor(max_workers=2) as pool:
        futures = [
            pool.submit(
                _solve_levels, params.with_branch(b), grid, n_levels, config.richardson, config
            )
            for b in branches
        ]
        return {b: f.result() for b, f in zip(branches, futures)}


def linear_fit(spectrum: Spectrum) -> LinearFit:
    """Least-squares straight line through (n, E_n)."""
    if spectrum.n_levels < 2:
        raise DomainError("a linear fit needs at least two levels")
    slope, intercept = np.polyfit(np.arange(spectrum.n_levels), spectrum.energies, 1)
    return LinearFit(
        slope=float(slope),
        intercept=float(intercept),
        delta=float(intercept) / spectrum.params.omega,
    )


def level_spacings(spectrum: Spectrum) -> tuple[float, ...]:
    """E_{n+1} - E_n for consecutive levels."""
    return tuple(float(d) for d in np.diff(spectrum.energies))


def spacing_deviation(spectrum: Spectrum) -> float:
    """Largest |E_{n+1} - E_n - 2 omega|, zero for an exactly harmonic ladder."""
    spacings = level_spacings(spectrum)
    if not spacings:
        return 0.0
    return max(abs(s - 2.0 * spectrum.params.omega) for s in spacings)

"""Classical side: the modified Emden oscillator and its branched Hamiltonians.

The equation of motion is

    x'' + k x x' + omega^2 x + (k^2/9) x^3 = 0

and its l = -1/3 Hamiltonian description is the branched pair

    H+- = -3p (k x^2/9 + omega^2/k) -+ sqrt(-2p),   p < 0.
"""

import logging
import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import CubicSpline

try:
    import polars as pl
except ImportError:
    pl = None

from .errors import BranchBoundaryError, DetectionError, DomainError, IntegrationAbort
from .model import Branch, ModelParams
from .polyalgebra import Polynomial, isochronous_g

logger = logging.getLogger(__name__)

OVERFLOW_LIMIT = 1e8
MOMENTUM_FLOOR = 1e-12
MOMENTUM_CEILING = 1e12
STEPS_PER_PERIOD = 2000
MIN_STEPS_PER_PERIOD = 200


@dataclass(frozen=True)
class ClassicalState:
    """Position, velocity and time of an Emden trajectory point."""

    x: float
    v: float
    t: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(c) for c in (self.x, self.v, self.t)):
            raise DomainError(f"state must be finite, got {self}")


@dataclass(frozen=True)
class HamiltonianState:
    """Canonical point (x, p) on one sheet of the branched Hamiltonian.

    Attributes:
        x: Position
        p: Canonical momentum, strictly negative
        branch: Sheet the point lives on
    """

    x: float
    p: float
    branch: Branch

    def __post_init__(self) -> None:
        """Check p < 0 and coerce the branch."""
        if not self.p < 0.0:
            raise DomainError(f"canonical momentum must be negative, got {self.p}")
        object.__setattr__(self, "branch", Branch(self.branch))


@dataclass(frozen=True)
class Trajectory:
    """Samples of an Emden solution on a uniform time grid."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray

    def to_frame(self) -> "pl.DataFrame":
        if pl is None:
            raise ImportError("Polars is required but not installed")
        return pl.DataFrame({"t": self.t, "x": self.x, "v": self.v})


@dataclass(frozen=True)
class HamiltonianTrajectory:
    """Samples of a branched-Hamiltonian flow with the energy at every step."""

    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    branch: Branch

    @property
    def relative_drift(self) -> float:
        """max |H(t) - H(0)| / |H(0)|."""
        return float(np.max(np.abs(self.energy - self.energy[0])) / abs(self.energy[0]))

    def to_frame(self) -> "pl.DataFrame":
        if pl is None:
            raise ImportError("Polars is required but not installed")
        return pl.DataFrame({"t": self.t, "x": self.x, "p": self.p, "H": self.energy})


def natural_period(omega: float) -> float:
    return 2.0 * math.pi / omega


def _time_grid(omega: float, t_end: float, dt: float | None) -> tuple[int, float]:
    """Number of steps and the step that lands exactly on t_end."""
    if not t_end > 0.0:
        raise DomainError(f"t_end must be positive, got {t_end}")
    period = natural_period(omega)
    dt = period / STEPS_PER_PERIOD if dt is None else dt
    if not 0.0 < dt <= period / MIN_STEPS_PER_PERIOD:
        raise DomainError(
            f"dt must lie in (0, T/{MIN_STEPS_PER_PERIOD}] = "
            f"(0, {period / MIN_STEPS_PER_PERIOD:.4g}], got {dt}"
        )
    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    return n_steps, t_end / n_steps


def _rk4(
    rhs: Callable[[float, float], tuple[float, float]],
    y0: tuple[float, float],
    n_steps: int,
    dt: float,
    guard: Callable[[float, float, float], None],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Classical fixed-step fourth-order Runge-Kutta for a planar autonomous system."""
    t = np.arange(n_steps + 1) * dt
    a = np.empty(n_steps + 1)
    b = np.empty(n_steps + 1)
    a[0], b[0] = y0
    ya, yb = y0
    for i in range(n_steps):
        k1a, k1b = rhs(ya, yb)
        k2a, k2b = rhs(ya + 0.5 * dt * k1a, yb + 0.5 * dt * k1b)
        k3a, k3b = rhs(ya + 0.5 * dt * k2a, yb + 0.5 * dt * k2b)
        k4a, k4b = rhs(ya + dt * k3a, yb + dt * k3b)
        ya += dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        yb += dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
        guard(t[i + 1], ya, yb)
        a[i + 1], b[i + 1] = ya, yb
    return t, a, b


def integrate_emden(
    x0: float, v0: float, params: ModelParams, t_end: float, dt: float | None = None
) -> Trajectory:
    """Integrate the modified Emden equation with fixed-step RK4.

    Args:
        x0: Initial position
        v0: Initial velocity
        params: Supplies omega and k
        t_end: Final time
        dt: Step, at most T/200 with T = 2 pi / omega (default T/2000)

    Returns:
        The sampled trajectory

    Raises:
        IntegrationAbort: If |x| exceeds 1e8
    """
    omega_sq = params.omega**2
    k = params.k
    n_steps, dt = _time_grid(params.omega, t_end, dt)

    def rhs(x: float, v: float) -> tuple[float, float]:
        return v, -k * x * v - omega_sq * x - (k * k / 9.0) * x**3

    def guard(t: float, x: float, v: float) -> None:
        if not abs(x) <= OVERFLOW_LIMIT:
            raise IntegrationAbort(f"|x| exceeded {OVERFLOW_LIMIT:g} at t = {t:.6g}")

    t, x, v = _rk4(rhs, (x0, v0), n_steps, dt, guard)
    logger.debug("Emden trajectory: %d steps of %.3e", n_steps, dt)
    return Trajectory(t=t, x=x, v=v)


def _dedupe(times: np.ndarray, tol: float) -> np.ndarray:
    if times.size == 0:
        return times
    keep = np.concatenate(([True], np.diff(times) > tol))
    return times[keep]


def detect_period(trajectory: Trajectory) -> float:
    """Mean time between successive maxima of x.

    Maxima are the zeros of a cubic spline through v where the spline decreases. When
    the trajectory holds fewer than two maxima the minima are used instead.

    Raises:
        DetectionError: If v changes sign fewer than three times
    """
    v = np.asarray(trajectory.v)
    nonzero = v[v != 0.0]
    crossings = int(np.count_nonzero(np.signbit(nonzero[1:]) != np.signbit(nonzero[:-1])))
    if crossings < 3:
        raise DetectionError(f"need at least 3 sign changes of v, found {crossings}")

    spline = CubicSpline(trajectory.t, v)
    roots = spline.roots(extrapolate=False)
    roots = _dedupe(np.sort(roots), 1e-9 * float(trajectory.t[-1] - trajectory.t[0]))
    slopes = spline.derivative()(roots)
    maxima = roots[slopes < 0.0]
    if maxima.size < 2:
        maxima = roots[slopes > 0.0]
    if maxima.size < 2:
        raise DetectionError("fewer than two turning points of the same kind")
    return float((maxima[-1] - maxima[0]) / (maxima.size - 1))


def _require_k(params: ModelParams) -> None:
    if params.k == 0.0:
        raise DomainError("the branched Hamiltonians are singular at k = 0")


def branch_variable(x, v, params: ModelParams):
    """u = v + 3 omega^2/k + k x^2/3, whose sign selects the Hamiltonian branch."""
    _require_k(params)
    return v + 3.0 * params.omega**2 / params.k + params.k * np.asarray(x) ** 2 / 3.0


def emden_to_canonical(state: ClassicalState, params: ModelParams) -> HamiltonianState:
    """Map (x, v) to the canonical pair (x, p) and the branch that generates it.

    p = -1/(2 u^2) and the branch is Plus when u > 0, Minus when u < 0.

    Raises:
        DomainError: If k = 0 or u = 0
    """
    u = float(branch_variable(state.x, state.v, params))
    if u == 0.0:
        raise DomainError(f"the canonical map is singular at u = 0 (x = {state.x}, v = {state.v})")
    return HamiltonianState(
        x=state.x, p=-1.0 / (2.0 * u * u), branch=Branch.PLUS if u > 0.0 else Branch.MINUS
    )


def canonical_to_velocity(state: HamiltonianState, params: ModelParams) -> float:
    """x' = dH/dp = -(k x^2/3 + 3 omega^2/k) +- 1/sqrt(-2p)."""
    _require_k(params)
    drift = params.k * state.x**2 / 3.0 + 3.0 * params.omega**2 / params.k
    return -drift + state.branch.sign / math.sqrt(-2.0 * state.p)


def hamiltonian_energy(state: HamiltonianState, params: ModelParams) -> float:
    """H+- = -3p (k x^2/9 + omega^2/k) -+ sqrt(-2p)."""
    _require_k(params)
    return -3.0 * state.p * (params.k * state.x**2 / 9.0 + params.omega**2 / params.k) - (
        state.branch.sign * math.sqrt(-2.0 * state.p)
    )


def integrate_hamiltonian(
    state: HamiltonianState, params: ModelParams, t_end: float, dt: float | None = None
) -> HamiltonianTrajectory:
    """Evolve (x, p) with Hamilton's equations of the state's branch using RK4.

    x' = -(k x^2/3 + 3 omega^2/k) +- 1/sqrt(-2p),  p' = (2k/3) p x

    Raises:
        BranchBoundaryError: If p reaches -1e-12 or falls below -1e12
        IntegrationAbort: If |x| exceeds 1e8
    """
    _require_k(params)
    k = params.k
    drift_const = 3.0 * params.omega**2 / k
    sign = state.branch.sign
    n_steps, dt = _time_grid(params.omega, t_end, dt)

    def rhs(x: float, p: float) -> tuple[float, float]:
        if p >= 0.0:
            raise BranchBoundaryError("p left the branch domain p < 0", time=math.nan, x=x, p=p)
        velocity = -(k * x * x / 3.0 + drift_const) + sign / math.sqrt(-2.0 * p)
        return velocity, (2.0 * k / 3.0) * p * x

    def guard(t: float, x: float, p: float) -> None:
        if p >= -MOMENTUM_FLOOR or p < -MOMENTUM_CEILING:
            raise BranchBoundaryError(
                f"momentum p = {p:.3e} reached the edge of the {state.branch.value} branch "
                f"at t = {t:.6g}",
                time=t,
                x=x,
                p=p,
            )
        if not abs(x) <= OVERFLOW_LIMIT:
            raise IntegrationAbort(f"|x| exceeded {OVERFLOW_LIMIT:g} at t = {t:.6g}")

    t, x, p = _rk4(rhs, (state.x, state.p), n_steps, dt, guard)
    energy = -3.0 * p * (k * x**2 / 9.0 + params.omega**2 / k) - sign * np.sqrt(-2.0 * p)
    logger.debug("Hamiltonian trajectory on %s: %d steps", state.branch.value, n_steps)
    return HamiltonianTrajectory(t=t, x=x, p=p, energy=energy, branch=state.branch)


def branch_crossings(trajectory: Trajectory, params: ModelParams) -> int:
    """Number of sign changes of u along an Emden trajectory (0 means one branch throughout)."""
    u = branch_variable(trajectory.x, trajectory.v, params)
    return int(np.count_nonzero(np.signbit(u[1:]) != np.signbit(u[:-1])))


def isochronicity_condition_g(
    f: "Polynomial | Callable[[float], float]", omega: float
) -> Callable[[float], float]:
    """The g(x) that makes x'' + f(x) x' + g(x) = 0 isochronous with frequency omega.

    g(x) = omega^2 x + I(x)^2 / x^3 with I(x) the integral of s f(s) from 0 to x.
    A Polynomial f is handled exactly; a callable is integrated with adaptive quadrature.

    Raises:
        DomainError: If the quadrature of a callable f does not converge
    """
    if not omega > 0.0:
        raise DomainError(f"omega must be positive, got {omega}")
    if isinstance(f, Polynomial):
        return isochronous_g(f, Fraction(omega) ** 2)

    omega_sq = omega * omega

    def g(x: float) -> float:
        if x == 0.0:
            return 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("error", IntegrationWarning)
            try:
                integral, _ = quad(lambda s: s * f(s), 0.0, x)
            except IntegrationWarning as e:
                raise DomainError(f"x f(x) is not integrable on [0, {x}]: {e}") from e
        if not math.isfinite(integral):
            raise DomainError(f"x f(x) is not integrable on [0, {x}]")
        return omega_sq * x + integral**2 / x**3

    return g

"""Exact rational polynomial algebra for the Chiellini/isochronicity identities.

A Liénard system x'' + f(x) x' + g(x) = 0 is isochronous when

    g(x) = omega^2 x + I(x)^2 / x^3,   I(x) = integral_0^x s f(s) ds,

and admits the branched Lagrangian/Hamiltonian description when the Chiellini
identity g' f - g f' + l(l+1) f^3 = 0 holds. Everything here uses
``fractions.Fraction`` so both identities are checked with zero tolerance.
"""

import itertools
import logging
import math
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ConsistencyError, DomainError, OrderTooLargeError, PolynomialParseError

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction]

MAX_SCAN_DEGREE = 6
DEFAULT_SAMPLES = (-1, 0, 1)
EXCLUDED_ELLS = (Fraction(0), Fraction(-1), Fraction(-1, 2))

_ATOM = re.compile(r"^(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<name>[A-Za-z_]\w*))(?:\^(?P<exp>\d+))?$")


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, float, str)):
        return Fraction(value)
    raise DomainError(f"cannot use {value!r} as an exact coefficient")


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial in x with exact rational coefficients.

    ``coeffs[i]`` multiplies x^i. Trailing zeros are stripped on construction, so the
    zero polynomial has no coefficients and degree -inf.
    """

    coeffs: tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        """Convert to Fractions and strip trailing zeros."""
        coeffs = [_as_fraction(c) for c in self.coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls(())

    @classmethod
    def constant(cls, value: Scalar) -> "Polynomial":
        return cls((value,))

    @classmethod
    def monomial(cls, degree: int, coefficient: Scalar = 1) -> "Polynomial":
        """coefficient * x^degree."""
        if degree < 0:
            raise DomainError(f"monomial degree must be non-negative, got {degree}")
        return cls((0,) * degree + (coefficient,))

    @classmethod
    def x(cls) -> "Polynomial":
        return cls.monomial(1)

    @property
    def degree(self) -> float:
        """Degree, with -inf for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else -math.inf

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading_coefficient(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coefficient(self, power: int) -> Fraction:
        return self.coeffs[power] if 0 <= power < len(self.coeffs) else Fraction(0)

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial.constant(_as_fraction(other))

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        size = max(len(self.coeffs), len(other.coeffs))
        return Polynomial(
            tuple(self.coefficient(i) + other.coefficient(i) for i in range(size))
        )

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if self.is_zero or other.is_zero:
            return Polynomial.zero()
        product = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                product[i + j] += a * b
        return Polynomial(tuple(product))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "Polynomial":
        if exponent < 0:
            raise DomainError("polynomials have no negative powers")
        result = Polynomial.constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    def __divmod__(self, divisor: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        """Long division: returns (quotient, remainder) with deg remainder < deg divisor."""
        divisor = self._coerce(divisor)
        if divisor.is_zero:
            raise DomainError("division by the zero polynomial")
        remainder = list(self.coeffs)
        quotient = [Fraction(0)] * max(len(remainder) - len(divisor.coeffs) + 1, 0)
        lead = divisor.leading_coefficient
        for shift in range(len(quotient) - 1, -1, -1):
            factor = remainder[shift + len(divisor.coeffs) - 1] / lead
            quotient[shift] = factor
            if factor != 0:
                for i, c in enumerate(divisor.coeffs):
                    remainder[shift + i] -= factor * c
        return Polynomial(tuple(quotient)), Polynomial(tuple(remainder))

    def scale(self, factor: Scalar) -> "Polynomial":
        factor = _as_fraction(factor)
        return Polynomial(tuple(factor * c for c in self.coeffs))

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def integrate(self) -> "Polynomial":
        """Antiderivative vanishing at x = 0."""
        return Polynomial((Fraction(0),) + tuple(c / (i + 1) for i, c in enumerate(self.coeffs)))

    def valuation(self) -> float:
        """Lowest power with a non-zero coefficient (inf for the zero polynomial)."""
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return math.inf

    def dot(self, other: "Polynomial") -> Fraction:
        """Euclidean inner product of coefficient vectors."""
        return sum(
            (a * b for a, b in zip(self.coeffs, other.coeffs)), start=Fraction(0)
        )

    def __call__(self, x):
        """Horner evaluation; exact for Fraction or int x, float for float x."""
        result = Fraction(0) if not isinstance(x, float) else 0.0
        for c in reversed(self.coeffs):
            result = result * x + (c if not isinstance(x, float) else float(c))
        return result

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for power, c in enumerate(self.coeffs):
            if c == 0:
                continue
            magnitude = abs(c)
            if power == 0:
                body = str(magnitude)
            else:
                monomial = "x" if power == 1 else f"x^{power}"
                body = monomial if magnitude == 1 else f"{magnitude}*{monomial}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(parts)

    @classmethod
    def parse(
        cls, text: str, symbols: Mapping[str, Scalar] | None = None, variable: str = "x"
    ) -> "Polynomial":
        """Parse "c0 + c1*x + c2*x^2 + ..." with coefficients like 3, -2/9, 0.5 or k^2/9.

        Named coefficients are substituted from ``symbols``; ``**`` is accepted for ``^``.

        Raises:
            PolynomialParseError: On malformed input or an unknown symbol
        """
        symbols = {name: _as_fraction(v) for name, v in (symbols or {}).items()}
        compact = re.sub(r"\s+", "", text).replace("**", "^")
        if not compact:
            raise PolynomialParseError("empty polynomial string")
        if re.search(r"[^\w.^*/+\-]", compact):
            raise PolynomialParseError(f"unsupported characters in {text!r}")

        result = cls.zero()
        for term in re.split(r"(?=[+-])", compact):
            if not term:
                continue
            sign = 1
            while term and term[0] in "+-":
                sign = -sign if term[0] == "-" else sign
                term = term[1:]
            if not term:
                raise PolynomialParseError(f"dangling sign in {text!r}")
            coefficient, power = cls._parse_term(term, symbols, variable, text)
            result = result + cls.monomial(power, sign * coefficient)
        return result

    @staticmethod
    def _parse_term(
        term: str, symbols: Mapping[str, Fraction], variable: str, text: str
    ) -> tuple[Fraction, int]:
        coefficient = Fraction(1)
        power = 0
        for factor in term.split("*"):
            pieces = factor.split("/")
            for position, atom in enumerate(pieces):
                match = _ATOM.match(atom)
                if match is None:
                    raise PolynomialParseError(f"cannot parse {atom!r} in {text!r}")
                exponent = int(match.group("exp") or 1)
                name = match.group("name")
                if name == variable:
                    if position > 0:
                        raise PolynomialParseError(f"cannot divide by {variable} in {text!r}")
                    power += exponent
                    continue
                if name is not None:
                    if name not in symbols:
                        raise PolynomialParseError(f"unknown symbol {name!r} in {text!r}")
                    value = symbols[name] ** exponent
                else:
                    value = Fraction(match.group("num")) ** exponent
                if position == 0:
                    coefficient *= value
                elif value == 0:
                    raise PolynomialParseError(f"division by zero in {text!r}")
                else:
                    coefficient /= value
        return coefficient, power


def _positive_omega_sq(omega_sq: Scalar) -> Fraction:
    omega_sq = _as_fraction(omega_sq)
    if not omega_sq > 0:
        raise DomainError(f"omega^2 must be positive, got {omega_sq}")
    return omega_sq


def isochronous_g(f: Polynomial, omega_sq: Scalar) -> Polynomial:
    """g(x) = omega^2 x + I(x)^2 / x^3 with I the antiderivative of x f(x) from 0.

    I has valuation >= 2, so I^2 is divisible by x^3.

    Raises:
        ConsistencyError: If the division leaves a remainder
    """
    omega_sq = _positive_omega_sq(omega_sq)
    integral = (Polynomial.x() * f).integrate()
    quotient, remainder = divmod(integral * integral, Polynomial.monomial(3))
    if not remainder.is_zero:
        raise ConsistencyError(f"I(x)^2 is not divisible by x^3, remainder {remainder}")
    return Polynomial.monomial(1, omega_sq) + quotient


@dataclass(frozen=True)
class ChielliniRoots:
    """Solutions l of l^2 + l - L = 0.

    Attributes:
        constant: L
        roots: The two roots, Fractions when 1 + 4L is a rational square, floats or
            complex numbers otherwise
        exact: Whether the roots are exact rationals
        complex_valued: Whether 1 + 4L < 0
        excluded: Whether the case is excluded (complex l, or l in {0, -1, -1/2})
    """

    constant: Fraction
    roots: tuple
    exact: bool
    complex_valued: bool
    excluded: bool

    @property
    def reason(self) -> str | None:
        if self.complex_valued:
            return "complex-valued l"
        if self.excluded:
            return "degenerate l"
        return None


def _rational_sqrt(value: Fraction) -> Fraction | None:
    num = math.isqrt(value.numerator)
    den = math.isqrt(value.denominator)
    if num * num == value.numerator and den * den == value.denominator:
        return Fraction(num, den)
    return None


def chiellini_roots(constant: Scalar) -> ChielliniRoots:
    """Roots l of l(l + 1) = L, exact whenever the discriminant 1 + 4L is a rational square."""
    constant = _as_fraction(constant)
    disc = 1 + 4 * constant
    if disc < 0:
        imag = math.sqrt(-float(disc)) / 2.0
        return ChielliniRoots(
            constant=constant,
            roots=(complex(-0.5, imag), complex(-0.5, -imag)),
            exact=False,
            complex_valued=True,
            excluded=True,
        )
    root = _rational_sqrt(disc)
    if root is not None:
        roots = ((-1 + root) / 2, (-1 - root) / 2)
        exact = True
    else:
        s = math.sqrt(float(disc))
        roots = ((-1.0 + s) / 2.0, (-1.0 - s) / 2.0)
        exact = False
    excluded = exact and any(r in EXCLUDED_ELLS for r in roots)
    return ChielliniRoots(
        constant=constant, roots=roots, exact=exact, complex_valued=False, excluded=excluded
    )


@dataclass(frozen=True)
class ChielliniReport:
    """Outcome of checking g' f - g f' + L f^3 = 0.

    Attributes:
        f: Damping polynomial
        g: Restoring polynomial
        residual: g' f - g f' + L f^3 for the exact L, or for the least-squares L
        chiellini_constant: The exact L when the identity holds, else None
        least_squares_constant: The L minimising the coefficient norm of the residual
        compatible: True iff the residual is the zero polynomial
        roots: The l values for the exact L, when there is one
    """

    f: Polynomial
    g: Polynomial
    residual: Polynomial
    chiellini_constant: Fraction | None
    least_squares_constant: Fraction
    compatible: bool
    roots: ChielliniRoots | None = None

    @property
    def excluded(self) -> bool:
        return self.roots is not None and self.roots.excluded


def chiellini_check(f: Polynomial, g: Polynomial) -> ChielliniReport:
    """Test whether (f, g) satisfies the Chiellini identity for some constant L = l(l+1).

    Args:
        f: Non-zero damping polynomial
        g: Restoring polynomial

    Returns:
        The report; compatible exactly when f^3 divides g' f - g f' with a constant quotient

    Raises:
        DomainError: If f is the zero polynomial
    """
    if f.is_zero:
        raise DomainError("the Chiellini identity needs a non-zero f")
    r = g.derivative() * f - g * f.derivative()
    f_cubed = f**3
    quotient, remainder = divmod(r, f_cubed)
    least_squares = -r.dot(f_cubed) / f_cubed.dot(f_cubed)

    if remainder.is_zero and quotient.degree <= 0:
        constant = -quotient.coefficient(0)
        residual = r + f_cubed.scale(constant)
        if not residual.is_zero:
            raise ConsistencyError(f"exact Chiellini residual is not zero: {residual}")
        return ChielliniReport(
            f=f,
            g=g,
            residual=residual,
            chiellini_constant=constant,
            least_squares_constant=least_squares,
            compatible=True,
            roots=chiellini_roots(constant),
        )

    return ChielliniReport(
        f=f,
        g=g,
        residual=r + f_cubed.scale(least_squares),
        chiellini_constant=None,
        least_squares_constant=least_squares,
        compatible=False,
    )


@dataclass(frozen=True)
class AffineObstruction:
    """Symbolic check of the affine case f = kx + b.

    With L = -2/9 the Chiellini residual of f = kx + b reduces to the constant
    b (b^2/36 + omega^2), whose only real zero is b = 0.

    Attributes:
        identity_holds: The residual equals that constant at every sampled (k, b)
        certified: identity_holds with at least four distinct b, which pins a cubic in b
        real_roots: Real b for which the obstruction vanishes
        samples: Number of (k, b) pairs checked
    """

    identity_holds: bool
    certified: bool
    real_roots: tuple[Fraction, ...]
    samples: int


def affine_obstruction(
    omega_sq: Scalar, k_values: Iterable[Scalar], b_values: Iterable[Scalar]
) -> AffineObstruction:
    """Verify r + (-2/9) f^3 = b (b^2/36 + omega^2) for f = kx + b over a sample grid."""
    omega_sq = _positive_omega_sq(omega_sq)
    ks = [_as_fraction(k) for k in k_values]
    bs = [_as_fraction(b) for b in b_values]
    holds = True
    count = 0
    for k, b in itertools.product(ks, bs):
        f = Polynomial((b, k))
        g = isochronous_g(f, omega_sq)
        obstruction = g.derivative() * f - g * f.derivative() + (f**3).scale(Fraction(-2, 9))
        expected = Polynomial.constant(b * (b * b / 36 + omega_sq))
        count += 1
        if obstruction != expected:
            logger.warning("affine identity fails at k = %s, b = %s: %s", k, b, obstruction)
            holds = False
    return AffineObstruction(
        identity_holds=holds,
        certified=holds and len(set(bs)) >= 4,
        real_roots=(Fraction(0),),
        samples=count,
    )


@dataclass(frozen=True)
class UniquenessReport:
    """Every sampled f whose isochronous g passes the Chiellini check.

    Attributes:
        max_degree: Largest degree scanned
        tested: Number of distinct non-zero f tried
        compatible: Compatible f with real, admissible l
        excluded: Compatible f whose l is complex or degenerate
    """

    max_degree: int
    tested: int
    compatible: tuple[Polynomial, ...]
    excluded: tuple[Polynomial, ...]

    @property
    def only_linear(self) -> bool:
        """True when every compatible f is a multiple of x."""
        return all(p.degree == 1 and p.coefficient(0) == 0 for p in self.compatible)


def uniqueness_scan(
    max_degree: int,
    samples: Sequence[Scalar] = DEFAULT_SAMPLES,
    coefficient_samples: Mapping[int, Sequence[Scalar]] | None = None,
    omega_sq: Scalar = 1,
) -> UniquenessReport:
    """Search a grid of polynomial f for Chiellini-compatible isochronous systems.

    The coefficient of x^j runs over ``coefficient_samples[j]`` when given, else over
    ``samples``. A finite scan can only falsify, never prove, uniqueness.

    Raises:
        OrderTooLargeError: If max_degree > 6
    """
    if not 0 <= max_degree <= MAX_SCAN_DEGREE:
        raise OrderTooLargeError(
            f"max_degree must lie in [0, {MAX_SCAN_DEGREE}], got {max_degree}"
        )
    omega_sq = _positive_omega_sq(omega_sq)
    overrides = coefficient_samples or {}
    grids = [
        sorted({_as_fraction(c) for c in overrides.get(j, samples)})
        for j in range(max_degree + 1)
    ]

    seen = set()
    compatible = []
    excluded = []
    for coeffs in itertools.product(*grids):
        f = Polynomial(coeffs)
        if f.is_zero or f in seen:
            continue
        seen.add(f)
        report = chiellini_check(f, isochronous_g(f, omega_sq))
        if not report.compatible:
            continue
        (excluded if report.excluded else compatible).append(f)

    logger.info(
        "Uniqueness scan to degree %d: %d tried, %d compatible, %d excluded",
        max_degree,
        len(seen),
        len(compatible),
        len(excluded),
    )
    return UniquenessReport(
        max_degree=max_degree,
        tested=len(seen),
        compatible=tuple(compatible),
        excluded=tuple(excluded),
    )

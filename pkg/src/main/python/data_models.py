"""Data models shared by the numeric modules: polynomials and coefficient sequences.

Coefficients are exact (``int`` / ``Fraction``) whenever the input is; floats and
``mpmath.mpf`` values are accepted and turned into exact binary rationals whenever
a decision (sign, reality of zeros) has to be made exactly.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, List, Sequence, Tuple, Union

import mpmath
import sympy

Number = Union[int, Fraction, float, mpmath.mpf]

Z = sympy.Symbol("z")


def to_fraction(value: Number) -> Fraction:
    """Convert a real number to the exact rational it represents.

    :param value: Integer, fraction, float or ``mpf``.

    :return: Exact rational.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, mpmath.mpf):
        if not mpmath.isfinite(value):
            raise ValueError(f"cannot convert {value} to a rational")
        man, exp = value.man_exp
        if exp >= 0:
            return Fraction(int(man) << exp)
        return Fraction(int(man), 1 << (-exp))
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    raise TypeError(f"unsupported real number type {type(value).__name__}")


def to_mpf(value: Number) -> mpmath.mpf:
    """Convert to ``mpf`` at the current working precision.

    :param value: Real number, fractions are divided at working precision.
    """
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def is_exact(value) -> bool:
    """Return True for ``int`` and ``Fraction`` values."""
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


@dataclass(frozen=True)
class RealPolynomial:
    """Dense real polynomial, coefficients in ascending degree.

    Trailing zero coefficients are stripped on construction; the zero polynomial
    has an empty coefficient tuple and degree -1.
    """

    coeffs: Tuple[Number, ...] = ()

    def __post_init__(self):
        coeffs = list(self.coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    # CONSTRUCTORS #

    @classmethod
    def from_roots(cls, roots: Iterable[Number], lead: Number = 1) -> "RealPolynomial":
        """Build ``lead * prod(z - r)``.

        :param roots: Real roots, repeated for multiplicity.
        :param lead: Leading coefficient.
        """
        poly = cls((lead,))
        for root in roots:
            poly = poly * cls((-root, 1))
        return poly

    @classmethod
    def monomial(cls, n: int, c: Number = 1) -> "RealPolynomial":
        """Return ``c z^n``."""
        return cls((0,) * n + (c,))

    @classmethod
    def from_sympy(cls, poly: sympy.Poly) -> "RealPolynomial":
        """Convert a univariate sympy polynomial over QQ."""
        coeffs = [to_fraction(sympy.Rational(c)) for c in reversed(poly.all_coeffs())]
        return cls(tuple(coeffs))

    # PROPERTIES #

    @property
    def degree(self) -> int:
        """Degree, -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def exact(self) -> bool:
        """True if all coefficients are integers or fractions."""
        return all(is_exact(c) for c in self.coeffs)

    @property
    def lead(self) -> Number:
        """Leading coefficient."""
        return self.coeffs[-1] if self.coeffs else 0

    # ARITHMETIC #

    def __call__(self, x):
        """Evaluate by Horner's rule in the arithmetic of ``x``."""
        exact_x = is_exact(x)
        acc = 0
        for c in reversed(self.coeffs):
            if isinstance(c, Fraction) and not exact_x:
                c = to_mpf(c)
            acc = acc * x + c
        return acc

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return RealPolynomial(tuple(x + y for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        return RealPolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return RealPolynomial(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RealPolynomial(tuple(out))

    __rmul__ = __mul__

    def derivative(self, k: int = 1) -> "RealPolynomial":
        """Return the k-th derivative."""
        coeffs = self.coeffs
        for _ in range(k):
            coeffs = tuple(i * c for i, c in enumerate(coeffs))[1:]
        return RealPolynomial(coeffs)

    def derivatives(self, upto: int) -> List["RealPolynomial"]:
        """Return ``[p, p', ..., p^(upto)]``."""
        out = [self]
        for _ in range(upto):
            out.append(out[-1].derivative())
        return out

    def reversed(self, n: int = None) -> "RealPolynomial":
        """Return ``z^n p(1/z)``, with n the degree by default."""
        n = self.degree if n is None else n
        if n < self.degree:
            raise ValueError("reversal degree below polynomial degree")
        padded = self.coeffs + (0,) * (n + 1 - len(self.coeffs))
        return RealPolynomial(tuple(reversed(padded)))

    def scaled(self, c: Number) -> "RealPolynomial":
        """Return ``p(c z)``."""
        return RealPolynomial(tuple(a * c**k for k, a in enumerate(self.coeffs)))

    # CONVERSIONS #

    def to_exact(self) -> "RealPolynomial":
        """Exact rational copy (floats become their binary rationals)."""
        return RealPolynomial(tuple(to_fraction(c) for c in self.coeffs))

    def to_sympy(self) -> sympy.Poly:
        """Exact sympy polynomial over QQ in the symbol ``z``."""
        exact = self.to_exact()
        if exact.is_zero:
            return sympy.Poly(0, Z, domain="QQ")
        coeffs = [sympy.Rational(c.numerator, c.denominator) for c in reversed(exact.coeffs)]
        return sympy.Poly(coeffs, Z, domain="QQ")

    def mpf_coeffs(self) -> List[mpmath.mpf]:
        """Coefficients as ``mpf`` at working precision, ascending."""
        return [to_mpf(c) for c in self.coeffs]

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            terms.append(f"{c}" if k == 0 else f"{c}*z" if k == 1 else f"{c}*z^{k}")
        return " + ".join(terms)


def _as_poly(value) -> RealPolynomial:
    if isinstance(value, RealPolynomial):
        return value
    return RealPolynomial((value,))


@dataclass(frozen=True)
class TaylorSeq:
    """Derivatives at the origin ``gamma_n = f^(n)(0)`` of a real entire function."""

    gamma: Tuple[Number, ...]

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(self.gamma))
        if len(self.gamma) < 2:
            raise ValueError("a Taylor sequence needs gamma_0 and gamma_1 at least")

    @property
    def length(self) -> int:
        """Largest available index N."""
        return len(self.gamma) - 1

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[Number]) -> "TaylorSeq":
        """Build from Taylor coefficients ``c_n = gamma_n / n!``."""
        return cls(tuple(c * factorial(n) for n, c in enumerate(coeffs)))

    def coefficients(self) -> List[Number]:
        """Taylor coefficients ``gamma_n / n!`` (exact for exact input)."""
        out = []
        for n, g in enumerate(self.gamma):
            if is_exact(g):
                out.append(Fraction(g) / factorial(n))
            else:
                out.append(g / factorial(n))
        return out

    def times(self, other: "TaylorSeq") -> "TaylorSeq":
        """Componentwise product, truncated to the shorter sequence."""
        return TaylorSeq(tuple(a * b for a, b in zip(self.gamma, other.gamma)))

    def polynomial(self) -> RealPolynomial:
        """Truncated Taylor polynomial ``sum c_n z^n``."""
        return RealPolynomial(tuple(self.coefficients()))


@dataclass(frozen=True)
class CoeffSequence:
    """Finite real sequence ``c_0, ..., c_N``, indices beyond N read as 0 only on demand.

    ``rel_error`` is a uniform relative error bound on the entries (0 for exact data).
    """

    values: Tuple[Number, ...]
    rel_error: Number = 0
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def exact(self) -> bool:
        return self.rel_error == 0 and all(is_exact(v) for v in self.values)

    @property
    def last_index(self) -> int:
        return self.offset + len(self.values) - 1

    def __getitem__(self, m: int) -> Number:
        """Entry with index m, 0 for m below the offset."""
        if m < self.offset:
            return 0
        if m > self.last_index:
            raise IndexError(f"index {m} beyond the sequence end {self.last_index}")
        return self.values[m - self.offset]

    @classmethod
    def binomial(cls, n: int) -> "CoeffSequence":
        """Coefficients of ``(1 + z)^n``."""
        return cls(tuple(comb(n, k) for k in range(n + 1)))

    @classmethod
    def inverse_factorials(cls, n: int) -> "CoeffSequence":
        """``1/k!`` for ``k = 0..n`` as exact fractions."""
        return cls(tuple(Fraction(1, factorial(k)) for k in range(n + 1)))

    @classmethod
    def from_polynomial(cls, poly: RealPolynomial) -> "CoeffSequence":
        return cls(poly.coeffs)

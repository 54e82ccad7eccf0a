"""Laguerre-Polya toolkit for real polynomials and Taylor sequences.

Decisions about the reality of zeros are made in exact rational arithmetic
(sympy polynomials over QQ); complex roots are only computed for the Jensen
disk pictures.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math
from math import comb, factorial
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
import sympy

from data_models import Z, CoeffSequence, RealPolynomial, TaylorSeq, is_exact, to_fraction, to_mpf
from errors import (
    InsufficientData,
    NonRealMultiplier,
    RootFindingNoConvergence,
    UsageError,
    ZeroAtOrigin,
    ZeroInExclusionInterval,
)
from numerics import DEFAULT_CONTEXT, PrecisionContext

logger = logging.getLogger(__name__)

ROOT_RESTARTS = 4
ROOT_SEED = 20240611

MULTIPLIER_FIXTURES: Dict[str, Callable[[int], Fraction]] = {
    "alternating": lambda n: Fraction((-1) ** n),
    "natural": lambda n: Fraction(n),
    "quadratic": lambda n: Fraction(-1 + n + n * n),
    "inverse_factorial": lambda n: Fraction(1, factorial(n)),
    "ones": lambda n: Fraction(1),
}


def named_sequence(name: str, N: int) -> TaylorSeq:
    """``gamma_0..gamma_N`` of a registered sequence.

    :raises UsageError: Unknown name.
    """
    try:
        rule = MULTIPLIER_FIXTURES[name]
    except KeyError:
        raise UsageError(f"unknown sequence {name!r}, choose from {', '.join(MULTIPLIER_FIXTURES)}") from None
    return TaylorSeq(tuple(rule(n) for n in range(N + 1)))


# JENSEN POLYNOMIALS #


def jensen_poly(g: TaylorSeq, n: int, m: int = 0) -> RealPolynomial:
    """The (n, m)-th Jensen polynomial ``sum_k C(n, k) gamma_{k+m} z^k``.

    :param g: Taylor sequence.
    :param n: Degree.
    :param m: Shift.

    :raises InsufficientData: ``n + m`` exceeds the sequence length.
    """
    if n < 0 or m < 0:
        raise ValueError("n and m must be nonnegative")
    if n + m > g.length:
        raise InsufficientData(f"J_({n},{m}) needs gamma_{n + m}, sequence ends at gamma_{g.length}")
    return RealPolynomial(tuple(comb(n, k) * g.gamma[k + m] for k in range(n + 1)))


def appell_poly(g: TaylorSeq, n: int, m: int = 0) -> RealPolynomial:
    """Coefficient reversal ``z^n J_(n,m)(1/z)`` of the Jensen polynomial."""
    return jensen_poly(g, n, m).reversed(n)


# REAL ROOT COUNTING #


def _sympy_rational(x) -> sympy.Rational:
    q = to_fraction(x)
    return sympy.Rational(q.numerator, q.denominator)


def sturm_chain(p: RealPolynomial) -> List[sympy.Poly]:
    """Sturm chain of the square-free part of p."""
    poly = p.to_sympy()
    if poly.degree() < 1:
        return [poly]
    squarefree = poly.quo(poly.gcd(poly.diff(Z)))
    chain = [squarefree, squarefree.diff(Z)]
    while not chain[-1].is_zero:
        chain.append(-chain[-2].rem(chain[-1]))
    return chain[:-1]


def _sign_at(poly: sympy.Poly, x) -> int:
    if isinstance(x, float) and math.isinf(x):
        lead = poly.LC()
        sign = 1 if lead > 0 else -1
        if x < 0 and poly.degree() % 2:
            sign = -sign
        return sign
    value = poly.eval(_sympy_rational(x))
    return bool(value > 0) - bool(value < 0)


def _variations(chain: Sequence[sympy.Poly], x) -> int:
    signs = [s for s in (_sign_at(q, x) for q in chain) if s != 0]
    return sum(1 for u, v in zip(signs[:-1], signs[1:]) if u != v)


def sturm_count(p: RealPolynomial, a=-math.inf, b=math.inf) -> int:
    """Number of distinct real zeros of p in ``(a, b]``.

    Works on the square-free part, so zeros at the endpoints need no
    perturbation. Endpoints may be infinite.
    """
    if p.is_zero:
        raise ValueError("the zero polynomial has no finite zero count")
    if not a < b:
        return 0
    chain = sturm_chain(p)
    if chain[0].degree() < 1:
        return 0
    return _variations(chain, a) - _variations(chain, b)


def real_root_count(p: RealPolynomial, a=-math.inf, b=math.inf) -> int:
    """Number of real zeros of p in ``(a, b]`` counted with multiplicity."""
    if p.is_zero:
        raise ValueError("the zero polynomial has no finite zero count")
    _, factors = p.to_sympy().sqf_list()
    total = 0
    for factor, multiplicity in factors:
        total += multiplicity * sturm_count(RealPolynomial.from_sympy(factor), a, b)
    return total


def has_only_real_zeros(p: RealPolynomial) -> bool:
    """True if every zero of p is real (constants and the zero polynomial included)."""
    if p.degree < 1:
        return True
    return real_root_count(p) == p.degree


# MULTIPLIER SEQUENCES #


def multiplier_sequence_test(g: TaylorSeq, N: int) -> Tuple[bool, Optional[int]]:
    """Check that the Jensen polynomials ``J_1..J_N`` have only real zeros.

    Passing says nothing beyond N.

    :return: Pass flag and the first failing n.
    """
    if N > g.length:
        raise InsufficientData(f"N = {N} exceeds the sequence length {g.length}")
    for n in range(1, N + 1):
        if not has_only_real_zeros(jensen_poly(g, n)):
            logger.info("J_%d has nonreal zeros", n)
            return False, n
    return True, None


def turan_check(g: TaylorSeq) -> List:
    """Turan differences ``gamma_n^2 - gamma_{n-1} gamma_{n+1}`` for ``n = 1..N-1``."""
    if g.length < 2:
        raise InsufficientData("Turan differences need gamma_0..gamma_2")
    gamma = g.gamma
    return [gamma[n] ** 2 - gamma[n - 1] * gamma[n + 1] for n in range(1, g.length)]


def hermite_poulain(a: RealPolynomial, p: RealPolynomial) -> RealPolynomial:
    """``a_0 p + a_1 p' + ... + a_n p^(n)`` for a multiplier with only real zeros.

    :raises NonRealMultiplier: ``a`` has nonreal zeros.
    """
    if not has_only_real_zeros(a):
        raise NonRealMultiplier(f"multiplier {a} has nonreal zeros")
    result = RealPolynomial(())
    for coefficient, derivative in zip(a.coeffs, p.derivatives(len(a.coeffs))):
        result = result + derivative * coefficient
    return result


def laguerre_transform(Q: RealPolynomial, c: Union[CoeffSequence, Sequence], d: int) -> RealPolynomial:
    """``Q(0) c_0 + Q(1) c_1 z + ... + Q(d) c_d z^d``.

    :raises ZeroInExclusionInterval: Q has nonreal zeros or a zero in ``[0, d]``.
    """
    if not has_only_real_zeros(Q):
        raise ZeroInExclusionInterval(f"{Q} has nonreal zeros")
    if Q(0) == 0 or real_root_count(Q, 0, d) > 0:
        raise ZeroInExclusionInterval(f"{Q} vanishes in [0, {d}]")
    if len(c) < d + 1:
        raise InsufficientData(f"need c_0..c_{d}")
    return RealPolynomial(tuple(Q(k) * c[k] for k in range(d + 1)))


# L FUNCTIONALS #


def l_functional(p: RealPolynomial, n: int, t):
    """``L_n(p)(t) = sum_k (-1)^{k+n} C(2n, k) p^(k)(t) p^(2n-k)(t) / (2n)!``.

    Exact for rational p and t.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    derivatives = p.derivatives(2 * n)
    values = [q(t) for q in derivatives]
    total = 0
    for k in range(2 * n + 1):
        total += (-1) ** (k + n) * comb(2 * n, k) * values[k] * values[2 * n - k]
    scale = factorial(2 * n)
    return Fraction(total, scale) if is_exact(total) else total / scale


def lambda_coefficient(p: RealPolynomial, n: int, x) -> Fraction:
    """Coefficient of ``y^{2n}`` in ``|p(x + iy)|^2``, expanded symbolically."""
    y = sympy.Symbol("y", real=True)
    expr = p.to_sympy().as_expr()
    x = _sympy_rational(x)
    square = sympy.expand(expr.subs(Z, x + sympy.I * y) * expr.subs(Z, x - sympy.I * y))
    coefficient = sympy.Rational(sympy.Poly(square, y).coeff_monomial(y ** (2 * n)))
    return Fraction(int(coefficient.p), int(coefficient.q))


# JENSEN DISKS AND SHIFTED SUMS #


@dataclass(frozen=True)
class JensenDisk:
    """Disk with diameter joining a nonreal zero pair, possibly shrunk."""

    center: mpmath.mpf
    radius: mpmath.mpf

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    def contains(self, w, slack=0) -> bool:
        return abs(mpmath.mpc(w) - self.center) <= self.radius + slack

    def row(self) -> Dict:
        return {"center": self.center, "radius": self.radius}


@dataclass
class JensenReport:
    """Disks of p and the nonreal points that must lie in their union."""

    disks: List[JensenDisk] = field(default_factory=list)
    points: List[mpmath.mpc] = field(default_factory=list)
    outside: List[mpmath.mpc] = field(default_factory=list)

    @property
    def all_contained(self) -> bool:
        return not self.outside

    def rows(self) -> List[Dict]:
        out = [dict(kind="disk", **d.row()) for d in self.disks]
        for w in self.points:
            out.append({"kind": "point", "re": mpmath.re(w), "im": mpmath.im(w), "inside": w not in self.outside})
        return out


def _taylor_shift(coeffs: List, shift) -> List:
    """Descending coefficients of ``p(z + shift)`` from those of ``p``."""
    out = list(coeffs)
    n = len(out) - 1
    for i in range(n):
        for j in range(1, n - i + 1):
            out[j] += shift * out[j - 1]
    return out


def complex_roots(p: RealPolynomial, ctx: PrecisionContext = DEFAULT_CONTEXT) -> List[mpmath.mpc]:
    """All complex roots by simultaneous (Durand-Kerner) iteration with restarts.

    The iteration starts from fixed points, so a failed run is repeated on
    ``p(z + s)`` for a random real shift ``s`` of growing size (seeded, the
    results are reproducible), with more steps and extra precision each time.

    :raises RootFindingNoConvergence: All restarts failed.
    """
    if p.degree < 1:
        return []
    rng = np.random.default_rng(ROOT_SEED)
    steps, extra = 50, 16
    with ctx.workprec():
        coeffs = list(reversed(p.mpf_coeffs()))
        radius = 1 + max(abs(c / coeffs[0]) for c in coeffs[1:])
        shift = mpmath.mpf(0)
        for attempt in range(ROOT_RESTARTS):
            with mpmath.extraprec(extra):
                shifted = _taylor_shift(coeffs, shift)
            try:
                roots = mpmath.polyroots(shifted, maxsteps=steps, extraprec=extra)
            except mpmath.libmp.NoConvergence:
                logger.debug("polyroots restart %d for degree %d", attempt + 1, p.degree)
                steps, extra = 4 * steps, 2 * extra + ctx.bits
                shift = radius * (attempt + 1) / ROOT_RESTARTS * mpmath.mpf(float(rng.uniform(-1, 1)))
                continue
            return [mpmath.mpc(r) + shift for r in roots]
    raise RootFindingNoConvergence(f"no convergence for {p} after {ROOT_RESTARTS} restarts")


def shifted_sum(p: RealPolynomial, lam) -> RealPolynomial:
    """``p(z + i lam) + p(z - i lam) = 2 sum_k (-1)^k lam^{2k} p^(2k)(z) / (2k)!``."""
    exact = p.exact and is_exact(lam)
    lam = Fraction(lam) if exact else to_mpf(lam)
    result = RealPolynomial(())
    for k, derivative in enumerate(p.derivatives(p.degree + 1)[::2] if p.degree >= 0 else []):
        weight = 2 * (-1) ** k * lam ** (2 * k)
        weight = Fraction(weight, factorial(2 * k)) if exact else weight / factorial(2 * k)
        result = result + derivative * weight
    return result


def jensen_disks(p: RealPolynomial, ctx: PrecisionContext = DEFAULT_CONTEXT, shrink=0) -> JensenReport:
    """Jensen disks of p and the containment check of the points they must cover.

    Without ``shrink`` the points are the nonreal zeros of ``p'``. With
    ``shrink = lam`` the disks have radius ``sqrt(Im^2 - lam^2)`` (omitted when
    not positive) and the points are the nonreal zeros of the shifted sum.
    """
    report = JensenReport()
    with ctx.workprec():
        tol = mpmath.mpf(ctx.abs_tol) * 2**32
        lam = to_mpf(shrink)
        for root in complex_roots(p, ctx):
            height = mpmath.im(root)
            if height > tol:
                radius_sq = height**2 - lam**2
                if radius_sq > 0:
                    report.disks.append(JensenDisk(mpmath.re(root), mpmath.sqrt(radius_sq)))
        target = p.derivative() if shrink == 0 else shifted_sum(p, shrink)
        report.points = [w for w in complex_roots(target, ctx) if abs(mpmath.im(w)) > tol]
        report.outside = [w for w in report.points if not any(d.contains(w, tol) for d in report.disks)]
    if report.outside:
        logger.warning("%d points outside the Jensen disks of %s", len(report.outside), p)
    return report


# GROWTH #


@dataclass(frozen=True)
class GrowthEstimate:
    """Windowed estimates of order, type and convergence exponent (never exact limits)."""

    order_est: float
    type_est: float
    order_ratio_sup: float
    type_ratio_sup: float
    kappa_est: Optional[float]
    window: Tuple[int, int]

    def row(self) -> Dict:
        return {
            "order_est": self.order_est,
            "type_est": self.type_est,
            "order_ratio_sup": self.order_ratio_sup,
            "type_ratio_sup": self.type_ratio_sup,
            "kappa_est": self.kappa_est if self.kappa_est is not None else "",
            "window_lo": self.window[0],
            "window_hi": self.window[1],
        }


def growth_estimates(c: Sequence, N: int, radii: Optional[Sequence] = None) -> GrowthEstimate:
    """Estimate order, type and convergence exponent from ``c_0..c_N``.

    The order comes from a least-squares fit ``log(1/|c_n|) = A n log n + B n`` over
    ``n`` in ``[N/2, N]``, giving ``rho = 1/A`` and ``tau = exp(-B rho)/(e rho)``.
    The literal window sups of the defining ratios are reported as well. The
    convergence exponent is the window sup of ``log n / log r_n`` over the sorted
    zero moduli ``radii``.
    """
    if N < 16:
        raise ValueError("growth estimates need N >= 16")
    if len(c) < N + 1:
        raise InsufficientData(f"need c_0..c_{N}")
    lo = N // 2
    rows, targets, ratios = [], [], []
    for n in range(max(lo, 2), N + 1):
        size = abs(to_mpf(c[n]))
        if size == 0 or size >= 1:
            continue
        log_inv = -mpmath.log(size)
        rows.append([float(n * mpmath.log(n)), float(n)])
        targets.append(float(log_inv))
        ratios.append(float(n * mpmath.log(n) / log_inv))
    if len(rows) < 2:
        raise InsufficientData("fewer than two usable coefficients in the window")
    (A, B), *_ = np.linalg.lstsq(np.array(rows), np.array(targets), rcond=None)
    rho = 1.0 / A
    tau = math.exp(-B * rho) / (math.e * rho)
    type_sup = max(
        float(n * abs(to_mpf(c[n])) ** (mpmath.mpf(rho) / n)) for n in range(lo, N + 1) if c[n] != 0
    ) / (math.e * rho)

    kappa = None
    if radii:
        moduli = sorted(float(abs(mpmath.mpmathify(r))) for r in radii)
        usable = [
            math.log(n) / math.log(moduli[n - 1])
            for n in range(max(lo, 2), min(N, len(moduli)) + 1)
            if moduli[n - 1] > 1
        ]
        kappa = max(usable) if usable else None
    return GrowthEstimate(rho, tau, max(ratios), type_sup, kappa, (lo, N))


# CANONICAL PRODUCTS #


def primary_factor(u, p: int):
    """``E(u, p) = (1 - u) exp(u + u^2/2 + ... + u^p/p)``."""
    if p < 0:
        raise ValueError("genus must be nonnegative")
    exponent = sum(u**k / k for k in range(1, p + 1))
    return (1 - u) * mpmath.exp(exponent)


def canonical_product(zeros: Sequence, g: int, z, ctx: PrecisionContext = DEFAULT_CONTEXT):
    """``prod_n E(z/z_n, g)`` over a finite list of nonzero zeros.

    :raises ZeroAtOrigin: A zero equals 0.
    """
    if g not in (0, 1, 2):
        raise ValueError(f"genus must be 0, 1 or 2, got {g}")
    with ctx.workprec():
        z = mpmath.mpmathify(z)
        product = mpmath.mpf(1)
        for zero in zeros:
            zero = mpmath.mpmathify(zero)
            if zero == 0:
                raise ZeroAtOrigin("canonical products take nonzero zeros only")
            product *= primary_factor(z / zero, g)
        return product

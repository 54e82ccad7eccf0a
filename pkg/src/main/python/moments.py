"""Moments of the kernel and the determinant criteria built on them.

``b_k`` is the ``2k``-th moment of the kernel on ``[0, inf)``, ``C_k = b_k/(2k)!``
are the Taylor coefficients of ``F(z) = sum C_k z^k`` with ``S(z) = F(-z^2)``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import logging
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import sympy

from data_models import CoeffSequence, RealPolynomial, TaylorSeq, is_exact, to_fraction, to_mpf
from errors import IllConditioned, InsufficientData, ZeroLeadingCoefficient
from numerics import DEFAULT_CONTEXT, FixedPanelRule, PrecisionContext, QuadratureResult, integrate
from phi import KernelSampler, first_term, phi_tail_envelope, phi_window

logger = logging.getLogger(__name__)

MAX_MOMENT_INDEX = 64
HANKEL_CONSTANT = mpmath.mpf("3.588449148e-8")


# MOMENTS #


def _peak(k: int):
    """Location and size of the maximum of ``t^{2k} a(t)`` on a coarse grid."""
    best_t, best = mpmath.mpf(0), mpmath.mpf(0)
    for j in range(129):
        t = mpmath.mpf(j) / 64
        value = t ** (2 * k) * first_term(t)
        if value > best:
            best_t, best = t, value
    return best_t, best


def b_moment(k: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QuadratureResult:
    """Compute ``b_k = int_0^inf t^{2k} Phi(t) dt``.

    The range is truncated at the window ``T(k)`` where the kernel envelope times
    ``t^{2k}`` is below the tolerance relative to the size of the integrand peak;
    the envelope at ``T(k)`` is added to the error bound. The kernel is sampled at a
    tighter tolerance and its worst relative error is carried into the bound.

    :param k: Moment index, ``0 <= k <= 64``.
    :param ctx: Precision context.

    :return: Moment with error bound.
    """
    if not 0 <= k <= MAX_MOMENT_INDEX:
        raise ValueError(f"moment index must lie in [0, {MAX_MOMENT_INDEX}], got {k}")
    with ctx.workprec():
        where, height = _peak(k)
        # the integral is at least a sizeable fraction of height times the peak width
        scale = height / 100
        sub = ctx.guarded(8, scale=min(mpmath.mpf(1), scale))
        log_target = mpmath.ln(mpmath.mpf(ctx.rel_tol) * scale / 4)
        T = phi_window(2 * k, 0, log_target, floor=1)
        tail = phi_tail_envelope(T, 2 * k)

        kernel = KernelSampler(sub.tightened(1024))

        def integrand(t):
            return t ** (2 * k) * kernel(t)

        points = [where] if 0 < where < T else []
        result = integrate(integrand, 0, T, ctx=sub, points=points, panels=4)
        logger.debug("b_%d: window %s, peak at %s", k, mpmath.nstr(T, 5), mpmath.nstr(where, 3))
        value = +result.value
        with sub.workprec():
            error = result.error_bound + tail + 2 * kernel.error(result.value) + abs(value - result.value)
        return QuadratureResult(value, error, result.evaluations)


def c_coeff(k: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QuadratureResult:
    """``C_k = b_k/(2k)!`` with its error bound."""
    moment = b_moment(k, ctx)
    with ctx.workprec():
        scale = factorial(2 * k)
        return QuadratureResult(moment.value / scale, moment.error_bound / scale, moment.evaluations)


MOMENT_PANELS = 32
MOMENT_DEGREE = 5


def _fixed_rule_moments(kmax: int, ctx: PrecisionContext) -> Dict[int, QuadratureResult]:
    """All moments through ``kmax`` from one set of kernel samples."""
    with ctx.workprec():
        scales = [_peak(k)[1] / 100 for k in range(kmax + 1)]
        smallest = min(scales)
        T = phi_window(2 * kmax, 0, mpmath.ln(mpmath.mpf(ctx.rel_tol) * smallest / 4) - 40, floor=1)
    sub = ctx.guarded(16, scale=min(mpmath.mpf(1), smallest))
    coarse = FixedPanelRule(0, T, MOMENT_PANELS, MOMENT_DEGREE, sub)
    fine = coarse.refined()

    kernel = KernelSampler(sub.tightened(1024))
    coarse_weights = coarse.tabulate(kernel)
    fine_weights = fine.tabulate(kernel)
    evaluations = len(coarse) + len(fine)

    entries = {}
    with sub.workprec():
        for k in range(kmax + 1):
            rough = mpmath.fsum(w * x ** (2 * k) for x, w in zip(coarse.nodes, coarse_weights))
            value = mpmath.fsum(w * x ** (2 * k) for x, w in zip(fine.nodes, fine_weights))
            error = 2 * abs(value - rough) + phi_tail_envelope(T, 2 * k) + 8 * len(fine) * sub.eps * value
            error += kernel.error(value)
            if error > ctx.tolerance(value):
                logger.debug("b_%d misses the tolerance on the fixed rule, integrating adaptively", k)
                entries[k] = b_moment(k, ctx)
                continue
            with ctx.workprec():
                rounded = +value
            entries[k] = QuadratureResult(rounded, error + abs(rounded - value), evaluations)
    return entries


@lru_cache(maxsize=16)
def moment_table(kmax: int, ctx: PrecisionContext) -> "MomentTable":
    """Memoized :meth:`MomentTable.build`, keyed by ``kmax`` and the context."""
    return MomentTable.build(kmax, ctx)


@dataclass(frozen=True)
class MomentTable:
    """Moments ``b_0 .. b_kmax`` with their error bounds, immutable once built."""

    entries: Dict[int, QuadratureResult]
    kmax: int
    bits: int = 128

    @classmethod
    def build(cls, kmax: int, ctx: PrecisionContext = DEFAULT_CONTEXT, adaptive: bool = False) -> "MomentTable":
        """Compute all moments up to ``kmax``.

        By default the kernel is sampled once on a fixed Gauss-Legendre node set
        and every moment is a weighted sum of the samples, its error taken from the
        comparison with the next rule degree. Moments whose estimate misses the
        tolerance, and all moments when ``adaptive`` is set, are integrated one by
        one with :func:`b_moment`.

        :param kmax: Largest moment index.
        :param ctx: Precision context.
        :param adaptive: Integrate every moment separately.
        """
        if not 0 <= kmax <= MAX_MOMENT_INDEX:
            raise ValueError(f"kmax must lie in [0, {MAX_MOMENT_INDEX}], got {kmax}")
        if adaptive:
            entries = {k: b_moment(k, ctx) for k in range(kmax + 1)}
        else:
            entries = _fixed_rule_moments(kmax, ctx)
        for k, result in entries.items():
            if not result.value > 0:
                raise ValueError(f"moment b_{k} = {result.value} is not positive")
        logger.info("moment table through k = %d at %d bits", kmax, ctx.bits)
        return cls(entries, kmax, ctx.bits)

    def _check(self, k: int):
        if not 0 <= k <= self.kmax:
            raise InsufficientData(f"moment b_{k} not in table (kmax = {self.kmax})")

    def b(self, k: int) -> mpmath.mpf:
        self._check(k)
        return self.entries[k].value

    def b_error(self, k: int) -> mpmath.mpf:
        self._check(k)
        return self.entries[k].error_bound

    def c(self, k: int) -> mpmath.mpf:
        self._check(k)
        with mpmath.workprec(self.bits):
            return self.entries[k].value / factorial(2 * k)

    def c_error(self, k: int) -> mpmath.mpf:
        self._check(k)
        with mpmath.workprec(self.bits):
            return self.entries[k].error_bound / factorial(2 * k)

    def rel_error(self) -> mpmath.mpf:
        """Largest relative error over the table."""
        return max(r.error_bound / r.value for r in self.entries.values())

    def rows(self) -> List[Dict]:
        return [
            {"k": k, "b": (self.b(k), self.b_error(k)), "c": (self.c(k), self.c_error(k))}
            for k in range(self.kmax + 1)
        ]


def _table_for(n_max: int, ctx: PrecisionContext, table: Optional[MomentTable]) -> MomentTable:
    if table is not None and table.kmax >= n_max:
        return table
    return moment_table(n_max, ctx)


@dataclass(frozen=True)
class TuranResult:
    """Turan-type differences at index n with their error bounds."""

    n: int
    delta: mpmath.mpf
    delta_error: mpmath.mpf
    strict: mpmath.mpf
    strict_error: mpmath.mpf

    def row(self) -> Dict:
        return {
            "n": self.n,
            "delta": (self.delta, self.delta_error),
            "strict": (self.strict, self.strict_error),
        }


def _product_error(x, ex, y, ey):
    return abs(x) * ey + abs(y) * ex + ex * ey


def turan_delta(n: int, ctx: PrecisionContext = DEFAULT_CONTEXT, table: Optional[MomentTable] = None) -> TuranResult:
    """Return ``Delta_n = b_n^2 - (2n-1)/(2n+1) b_{n-1} b_{n+1}`` and the strict form
    ``C_n^2 - (1 + 1/n) C_{n-1} C_{n+1}``.

    :param n: Index, at least 1.
    :param ctx: Precision context.
    :param table: Precomputed moments, built on demand if absent or too short.
    """
    if n < 1:
        raise ValueError("turan_delta needs n >= 1")
    table = _table_for(n + 1, ctx, table)
    with ctx.workprec():
        b0, b1, b2 = (table.b(n + j) for j in (-1, 0, 1))
        e0, e1, e2 = (table.b_error(n + j) for j in (-1, 0, 1))
        ratio = mpmath.mpf(2 * n - 1) / (2 * n + 1)
        delta = b1**2 - ratio * b0 * b2
        delta_error = _product_error(b1, e1, b1, e1) + ratio * _product_error(b0, e0, b2, e2)

        c0, c1, c2 = (table.c(n + j) for j in (-1, 0, 1))
        f0, f1, f2 = (table.c_error(n + j) for j in (-1, 0, 1))
        weight = 1 + mpmath.mpf(1) / n
        strict = c1**2 - weight * c0 * c2
        strict_error = _product_error(c1, f1, c1, f1) + weight * _product_error(c0, f0, c2, f2)
    return TuranResult(n, delta, delta_error, strict, strict_error)


def hankel_constant(table: MomentTable, ctx: PrecisionContext = DEFAULT_CONTEXT) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """``b_1^2 - b_0 b_2 / 3`` with its error bound."""
    with ctx.workprec():
        b0, b1, b2 = table.b(0), table.b(1), table.b(2)
        e0, e1, e2 = table.b_error(0), table.b_error(1), table.b_error(2)
        value = b1**2 - b0 * b2 / 3
        error = _product_error(b1, e1, b1, e1) + _product_error(b0, e0, b2, e2) / 3
    return value, error


def xi_taylor_data(table: MomentTable, m: int) -> CoeffSequence:
    """Taylor coefficients ``c_0..c_m`` of ``S(z)``: ``(-1)^k C_k`` at order 2k, 0 at odd orders."""
    if m // 2 > table.kmax:
        raise InsufficientData(f"order {m} needs moments through {m // 2}")
    values = []
    for j in range(m + 1):
        if j % 2:
            values.append(mpmath.mpf(0))
        else:
            values.append((-1) ** (j // 2) * table.c(j // 2))
    return CoeffSequence(tuple(values), rel_error=table.rel_error())


def zeta_taylor_seq(table: MomentTable, n: int) -> TaylorSeq:
    """Derivatives at the origin ``gamma_k = k! C_k`` of ``F(z) = sum C_k z^k``."""
    if n > table.kmax:
        raise InsufficientData(f"need moments through {n}, table has {table.kmax}")
    return TaylorSeq(tuple(factorial(k) * table.c(k) for k in range(n + 1)))


# DETERMINANTS #


def _exact_det(rows: Sequence[Sequence]) -> Fraction:
    """Fraction-free (Bareiss) determinant of a rational matrix."""
    if not rows:
        return Fraction(1)
    entries = [[to_fraction(v) for v in row] for row in rows]
    matrix = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in entries])
    det = matrix.det(method="bareiss")
    return Fraction(int(det.p), int(det.q))


def _float_det(rows: Sequence[Sequence], rel_error, ctx: PrecisionContext) -> mpmath.mpf:
    """Floating determinant, refused when its relative error estimate exceeds rel_tol."""
    with ctx.workprec():
        if not rows:
            return mpmath.mpf(1)
        matrix = mpmath.matrix([[to_mpf(v) for v in row] for row in rows])
        det = mpmath.det(matrix)
        try:
            condition = mpmath.cond(matrix)
        except ZeroDivisionError:
            condition = mpmath.inf
        estimate = condition * len(rows) * (ctx.eps + rel_error)
        if not estimate <= ctx.rel_tol:
            raise IllConditioned(
                f"{len(rows)}x{len(rows)} determinant with condition {mpmath.nstr(condition, 3)} "
                f"and data error {mpmath.nstr(mpmath.mpf(rel_error), 3)}"
            )
        return det


def _determinant(rows, exact: bool, rel_error, ctx: Optional[PrecisionContext]):
    if exact:
        return _exact_det(rows)
    return _float_det(rows, rel_error, ctx or DEFAULT_CONTEXT)


def dnr(seq: CoeffSequence, n: int, r: int, ctx: Optional[PrecisionContext] = None):
    """Toeplitz minor ``D(n, r) = det[c_{n - j + i}]_{i,j < r}`` with ``c_m = 0`` for m < 0.

    :param seq: Coefficients ``c_0..c_N``.
    :param n: Index of the diagonal entry.
    :param r: Order of the minor, at least 1.
    :param ctx: Precision context for inexact data.

    :return: ``Fraction`` for exact data, else ``mpf``.

    :raises InsufficientData: The minor reaches past ``c_N``.
    :raises IllConditioned: Inexact data and a relative error estimate above rel_tol.
    """
    if r < 1 or n < 0:
        raise ValueError(f"need n >= 0 and r >= 1, got n = {n}, r = {r}")
    if n + r - 1 > seq.last_index:
        raise InsufficientData(f"D({n}, {r}) needs c_{n + r - 1}, sequence ends at c_{seq.last_index}")
    rows = [[seq[n - j + i] for j in range(r)] for i in range(r)]
    return _determinant(rows, seq.exact, seq.rel_error, ctx)


@dataclass
class PositivityReport:
    """Toeplitz minors over a grid and the nonpositive ones among them."""

    minors: List[Tuple[int, int, object]] = field(default_factory=list)
    errors: Dict[Tuple[int, int], str] = field(default_factory=dict)

    @property
    def violations(self) -> List[Tuple[int, int, object]]:
        return [(n, r, v) for n, r, v in self.minors if not v > 0]

    @property
    def all_positive(self) -> bool:
        return not self.violations and not self.errors

    @property
    def min_margin(self):
        return min(v for _, _, v in self.minors) if self.minors else None

    def rows(self) -> List[Dict]:
        out = [{"n": n, "r": r, "minor": v, "positive": v > 0} for n, r, v in self.minors]
        out.extend({"n": n, "r": r, "error": msg} for (n, r), msg in self.errors.items())
        return out


def total_positivity_scan(seq: CoeffSequence, N: int, R: int, ctx: Optional[PrecisionContext] = None) -> PositivityReport:
    """Evaluate ``D(n, r)`` for ``0 <= n <= N`` and ``1 <= r <= R``.

    Minors that cannot be decided at the working precision are listed in
    ``errors`` instead of aborting the scan.

    :param seq: Coefficients, ``c_0`` nonzero.
    :param N: Largest diagonal index.
    :param R: Largest order.
    :param ctx: Precision context for inexact data.
    """
    if seq[0] == 0:
        raise ZeroLeadingCoefficient("total positivity needs c_0 != 0")
    if N + R - 1 > seq.last_index:
        raise InsufficientData(f"scan needs c_{N + R - 1}, sequence ends at c_{seq.last_index}")
    report = PositivityReport()
    for n in range(N + 1):
        for r in range(1, R + 1):
            try:
                report.minors.append((n, r, dnr(seq, n, r, ctx)))
            except IllConditioned as err:
                report.errors[(n, r)] = str(err)
    if report.violations:
        logger.info("%d nonpositive minors, first at (n, r) = %s", len(report.violations), report.violations[0][:2])
    return report


# POWER SUMS AND HANKEL FORMS #


def power_sums(c: CoeffSequence, m: int) -> List:
    """Solve ``c_0 s_k + c_1 s_{k-1} + ... + c_{k-1} s_1 + k c_k = 0`` for ``s_1..s_m``.

    For ``c`` the coefficients of ``prod (1 - z/lambda_i)`` this gives
    ``s_k = sum lambda_i^{-k}``.

    :raises ZeroLeadingCoefficient: ``c_0 = 0``.
    :raises InsufficientData: Fewer than ``m + 1`` coefficients.
    """
    if c[0] == 0:
        raise ZeroLeadingCoefficient("power sums need c_0 != 0")
    if m > c.last_index:
        raise InsufficientData(f"s_{m} needs c_{m}, sequence ends at c_{c.last_index}")
    c0 = Fraction(c[0]) if is_exact(c[0]) else c[0]
    s = [None]
    for k in range(1, m + 1):
        acc = k * c[k]
        for j in range(1, k):
            acc += c[j] * s[k - j]
        s.append(-acc / c0)
    return s[1:]


@dataclass(frozen=True)
class HankelResult:
    minors: Tuple
    all_positive: bool

    def rows(self) -> List[Dict]:
        return [{"r": r, "minor": v, "positive": v > 0} for r, v in enumerate(self.minors)]


def _is_exact_list(values) -> bool:
    return all(is_exact(v) for v in values)


def hankel_positive(s: Sequence, r: int, ctx: Optional[PrecisionContext] = None, rel_error=0) -> HankelResult:
    """Leading principal minors ``D_0..D_r`` of the Hankel form ``[s_{2+i+j}]``.

    :param s: Power sums starting at ``s_2`` (``s[0] = s_2``), through ``s_{2+2r}``.
    :param r: Largest minor index.
    :param ctx: Precision context for inexact data.
    :param rel_error: Relative error of inexact data.

    :raises InsufficientData: Fewer than ``2r + 1`` entries.
    :raises IllConditioned: A floating minor cannot be decided.
    """
    if len(s) < 2 * r + 1:
        raise InsufficientData(f"D_{r} needs s_2..s_{2 + 2 * r}")
    exact = _is_exact_list(s) and rel_error == 0
    minors = []
    for k in range(r + 1):
        rows = [[s[i + j] for j in range(k + 1)] for i in range(k + 1)]
        minors.append(_determinant(rows, exact, rel_error, ctx))
    return HankelResult(tuple(minors), all(v > 0 for v in minors))


@dataclass(frozen=True)
class BorchardtHermiteResult:
    minors: Tuple[Fraction, ...]
    all_real: bool
    distinct_count: int

    def rows(self) -> List[Dict]:
        out = [{"k": k, "minor": v} for k, v in enumerate(self.minors, start=1)]
        out.append({"all_real": self.all_real, "distinct_count": self.distinct_count})
        return out


def newton_sums(p: RealPolynomial, m: int) -> List[Fraction]:
    """Exact power sums ``S_0..S_m`` of the zeros of ``p`` (``S_0`` = degree)."""
    exact = p.to_exact()
    n = exact.degree
    # coefficients from the top down are those of the reversed polynomial prod(1 - r_i z)
    reversed_coeffs = list(reversed(exact.coeffs)) + [Fraction(0)] * max(0, m - n)
    return [Fraction(n)] + power_sums(CoeffSequence(tuple(reversed_coeffs)), m)


def borchardt_hermite(p: RealPolynomial) -> BorchardtHermiteResult:
    """Reality of the zeros of ``p`` from the Hankel minors of its Newton sums.

    ``Delta_k = det[S_{i+j}]_{i,j<k}`` for ``k = 1..n``. All zeros are real iff the
    nonzero minors are positive and form a leading block; their number is the
    number of distinct zeros.

    :param p: Polynomial of degree at least 1, decided in exact arithmetic.
    """
    if p.degree < 1:
        raise ValueError("borchardt_hermite needs degree >= 1")
    n = p.degree
    S = newton_sums(p, 2 * n - 2)
    minors = tuple(_exact_det([[S[i + j] for j in range(k)] for i in range(k)]) for k in range(1, n + 1))
    nonzero = [k for k, v in enumerate(minors, start=1) if v != 0]
    distinct = nonzero[-1] if nonzero else 0
    all_real = all(v >= 0 for v in minors) and all(minors[k - 1] > 0 for k in range(1, distinct + 1))
    return BorchardtHermiteResult(minors, all_real, distinct)

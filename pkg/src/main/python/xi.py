"""The cosine transform of the kernel, its real zeros and the heat flow.

``S(z) = int_0^inf Phi(t) cos(z t) dt = Xi(z/2)/8`` and
``Xi_lambda(z) = 8 int_0^inf Phi(u) e^{4 lambda u^2} cos(2 z u) du``, so that
``Xi_0(z) = 8 S(2z)``. ``|S(x)|`` decays like ``exp(-pi x/8)`` on the real
axis, which sets the guard bits of every evaluation.
"""

from dataclasses import dataclass
from fractions import Fraction
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath

from data_models import RealPolynomial, is_exact
from errors import (
    InsufficientData,
    MethodDisagreement,
    NegativeGap,
    NoConvergence,
    StripViolation,
)
from moments import MAX_MOMENT_INDEX, moment_table
from numerics import (
    DEFAULT_CONTEXT,
    FixedPanelRule,
    PrecisionContext,
    QuadratureResult,
    ZeroRecord,
    integrate,
    isolate_zeros,
)
from phi import KERNEL_MASS, KernelSampler, phi_tail_envelope, phi_window

logger = logging.getLogger(__name__)

STRIP_LIMIT = 1
DEFAULT_CROSSOVER = 30
DEFAULT_WINDOW = 200
XI_SCAN_STEP = math.pi / 4
METHODS = ("auto", "integral", "series")

TRANSFORM_DEGREE = 5
# panel width times frequency
TRANSFORM_PHASE = 4


def xi_guard_bits(x) -> int:
    """Guard bits against the cancellation in ``S(x)``, rounded up to a multiple of 32."""
    bits = math.pi * abs(float(x)) / (8 * math.log(2)) + 32
    return 32 * int(math.ceil(bits / 32))


def _decay(x) -> mpmath.mpf:
    return mpmath.exp(-mpmath.pi * abs(x) / 8)


def _as_argument(z):
    """``mpf`` for real input, ``mpc`` otherwise."""
    z = mpmath.mpmathify(z)
    if isinstance(z, mpmath.mpc) and mpmath.im(z) == 0:
        return mpmath.re(z)
    return z


def _check_strip(z):
    if abs(mpmath.im(mpmath.mpmathify(z))) > STRIP_LIMIT:
        raise StripViolation(complex(z), STRIP_LIMIT)


@dataclass(frozen=True)
class XiEvalRequest:
    """Argument and method of one evaluation of ``S``.

    :param z: Point with ``|Im z| <= 1``.
    :param method: ``auto``, ``integral`` or ``series``.
    :param series_terms: Fixed number of series terms instead of automatic truncation.
    """

    z: complex
    method: str = "auto"
    series_terms: Optional[int] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.series_terms is not None and self.series_terms < 1:
            raise ValueError("series_terms must be positive")
        _check_strip(self.z)

    def resolved_method(self, crossover=DEFAULT_CROSSOVER) -> str:
        if self.method != "auto":
            return self.method
        return "series" if abs(complex(self.z)) <= crossover else "integral"


def _evaluation_context(z, ctx: PrecisionContext) -> PrecisionContext:
    return ctx.guarded(xi_guard_bits(abs(complex(z))), scale=_decay(mpmath.re(mpmath.mpmathify(z))))


def _kernel_sampler(inner: PrecisionContext, x) -> KernelSampler:
    """Kernel samples accurate enough relative to the decay of the transform at x."""
    return KernelSampler(inner.tightened(256 / _decay(x), extra_bits=8))


def _xi_integral(z, ctx: PrecisionContext) -> QuadratureResult:
    inner = _evaluation_context(z, ctx)
    with inner.workprec():
        z = _as_argument(z)
        growth = abs(mpmath.im(z))
        T = phi_window(0, growth, mpmath.ln(mpmath.mpf(inner.abs_tol)) - 8)
        tail = phi_tail_envelope(T, 0, growth)
        kernel = _kernel_sampler(inner, mpmath.re(z))
        omega = max(mpmath.mpf(1), abs(z))

        def integrand(t):
            # cos(zt) = (e^{izt} + e^{-izt}) / 2
            return kernel(t) * mpmath.cos(z * t)

        result = integrate(integrand, 0, T, ctx=inner, panels=4, panel_width=TRANSFORM_PHASE / omega)
        # |cos(zt)| <= cosh(growth T), the rule mass of the kernel within a factor 2 of its integral
        error = result.error_bound + tail + kernel.error(2 * KERNEL_MASS * mpmath.cosh(growth * T))
    with ctx.workprec():
        value = +result.value
    with inner.workprec():
        error += abs(value - result.value)
    return QuadratureResult(value, error, result.evaluations)


def _moment_context(z, ctx: PrecisionContext) -> PrecisionContext:
    guard = xi_guard_bits(abs(complex(z)))
    scale = 2.0**-guard
    return PrecisionContext(
        bits=ctx.bits + guard,
        rel_tol=ctx.rel_tol * scale,
        abs_tol=ctx.abs_tol * scale,
        max_escalations=ctx.max_escalations,
    )


def _xi_series(z, ctx: PrecisionContext, series_terms: Optional[int] = None) -> QuadratureResult:
    mctx = _moment_context(z, ctx)
    table = moment_table(MAX_MOMENT_INDEX, mctx)
    target = _evaluation_context(z, ctx)
    with mctx.workprec():
        z = _as_argument(z)
        real = not isinstance(z, mpmath.mpc)
        z2, r2 = z * z, abs(z) ** 2
        total = mpmath.mpf(0)
        magnitude = mpmath.mpf(0)
        data_error = mpmath.mpf(0)
        tail = mpmath.inf
        last = series_terms - 1 if series_terms else MAX_MOMENT_INDEX - 2
        if last > MAX_MOMENT_INDEX - 2:
            raise InsufficientData(f"{series_terms} terms need moments beyond b_{MAX_MOMENT_INDEX}")
        previous_ratio = mpmath.inf
        power = mpmath.mpf(1)
        for k in range(last + 1):
            term = (-1) ** k * table.c(k) * power
            total += term
            magnitude += abs(term)
            data_error += table.c_error(k) * abs(power)
            power *= z2
            # ratios C_{k+1} |z|^2 / C_k decrease, the tail is dominated by its first term
            first_omitted = table.c(k + 1) * abs(power)
            ratio = table.c(k + 2) * r2 / table.c(k + 1)
            if ratio < 1 and ratio <= previous_ratio:
                tail = first_omitted if real else first_omitted / (1 - ratio)
            else:
                tail = mpmath.inf
            previous_ratio = ratio
            if series_terms is None and tail <= target.tolerance(total) / 2:
                break
        else:
            if series_terms is None:
                raise InsufficientData(f"series at z = {z} needs moments beyond b_{MAX_MOMENT_INDEX}")
        rounding = 4 * (k + 1) * mctx.eps * magnitude
        error = tail + data_error + rounding
    logger.debug("series at z = %s: %d terms, tail %s", z, k + 1, mpmath.nstr(tail, 3))
    with ctx.workprec():
        return QuadratureResult(+total, error, k + 1)


def xi_hat(
    z,
    method: str = "auto",
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    series_terms: Optional[int] = None,
    crossover=DEFAULT_CROSSOVER,
) -> QuadratureResult:
    """Evaluate ``S(z) = Xi(z/2)/8`` for ``|Im z| <= 1``.

    The integral method integrates ``Phi(t) cos(z t)`` up to the kernel window.
    The series method sums ``sum (-1)^k C_k z^{2k}`` with moments computed at the
    precision the cancellation needs. ``auto`` uses the series for
    ``|z| <= crossover``.

    :param z: Real or complex argument.
    :param method: ``auto``, ``integral`` or ``series``.
    :param ctx: Precision context.
    :param series_terms: Fixed number of series terms.
    :param crossover: Switch point of ``auto``.

    :return: Value (``mpf`` for real z) with error bound.

    :raises StripViolation: ``|Im z| > 1``.
    :raises NoConvergence: The automatic evaluation missed the tolerance.
    """
    request = XiEvalRequest(z, method, series_terms)
    chosen = request.resolved_method(crossover)
    if chosen == "series":
        result = _xi_series(z, ctx, series_terms)
    else:
        result = _xi_integral(z, ctx)
    if series_terms is None:
        with ctx.workprec():
            floor = _evaluation_context(z, ctx).tolerance(result.value)
        if result.error_bound > floor:
            raise NoConvergence(f"S({z}) by {chosen}: error {mpmath.nstr(result.error_bound, 3)} above tolerance")
    return result


def xi_cross_check(z, ctx: PrecisionContext = DEFAULT_CONTEXT) -> Tuple[QuadratureResult, QuadratureResult]:
    """Evaluate ``S(z)`` by both methods and insist they agree within their bounds.

    :raises MethodDisagreement: The difference exceeds the combined error bounds.
    """
    series = xi_hat(z, "series", ctx)
    integral = xi_hat(z, "integral", ctx)
    with ctx.workprec():
        gap = abs(series.value - integral.value)
        if gap > series.error_bound + integral.error_bound:
            raise MethodDisagreement(
                f"S({z}): series {series.value} and integral {integral.value} differ by {mpmath.nstr(gap, 3)}"
            )
    return series, integral


# FIXED-NODE TRANSFORMS #


class XiTransform:
    """``int_0^inf Phi(t) e^{4 lambda t^2} cos(x t) dt`` for real ``|x| <= x_max`` on fixed nodes.

    The kernel is sampled once on Gauss-Legendre panels with ``x_max`` times the
    panel width at most 4; each evaluation is then a weighted cosine sum. The rule
    error is estimated once against the next rule degree at a few frequencies.

    :param x_max: Largest frequency.
    :param ctx: Precision context of the results.
    :param heat: Heat parameter lambda (0 gives ``S``).
    """

    def __init__(self, x_max, ctx: PrecisionContext = DEFAULT_CONTEXT, heat=0):
        if heat > 1:
            raise ValueError(f"heat parameter must be at most 1, got {heat}")
        self.x_max = abs(float(x_max))
        self.ctx = ctx
        self.inner = ctx.guarded(xi_guard_bits(self.x_max), scale=_decay(self.x_max))
        with self.inner.workprec():
            self.heat = mpmath.mpf(heat)
            quadratic = 4 * self.heat
            self.window = phi_window(0, 0, mpmath.ln(mpmath.mpf(self.inner.abs_tol)) - 8, quadratic=quadratic)
            self.tail = phi_tail_envelope(self.window, 0, 0, quadratic)
            width = float(self.window)
            panels = max(int(math.ceil(width * self.x_max / TRANSFORM_PHASE)), int(math.ceil(16 * width)))

        kernel = _kernel_sampler(self.inner, self.x_max)

        def weight(t):
            return kernel(t) * mpmath.exp(quadratic * t * t)

        rule = FixedPanelRule(0, self.window, panels, TRANSFORM_DEGREE, self.inner)
        refined = rule.refined()
        self.nodes = rule.nodes
        self.weights = rule.tabulate(weight)
        fine_weights = refined.tabulate(weight)
        with self.inner.workprec():
            self.mass = mpmath.fsum(abs(w) for w in self.weights)
            self.kernel_error = kernel.error(2 * self.mass)
            frequencies = [self.x_max * j / 4 for j in range(5)]
            self.rule_error = 2 * max(
                abs(self._sum(self.nodes, self.weights, x) - self._sum(refined.nodes, fine_weights, x))
                for x in frequencies
            )
        logger.info(
            "transform with %d nodes on [0, %s], heat %s, rule error %s",
            len(self.nodes),
            mpmath.nstr(self.window, 4),
            heat,
            mpmath.nstr(self.rule_error, 3),
        )

    @staticmethod
    def _sum(nodes, weights, x):
        return mpmath.fsum(w * mpmath.cos(x * t) for t, w in zip(nodes, weights))

    def __call__(self, x) -> mpmath.mpf:
        with self.inner.workprec():
            return self._sum(self.nodes, self.weights, mpmath.mpf(x))

    def evaluate(self, x) -> QuadratureResult:
        """Value at x with rule, tail and rounding errors."""
        if abs(x) > self.x_max * (1 + 1e-12):
            raise ValueError(f"x = {x} beyond the transform range {self.x_max}")
        with self.inner.workprec():
            value = self(x)
            error = self.rule_error + self.tail + self.kernel_error + 4 * len(self.nodes) * self.inner.eps * self.mass
        with self.ctx.workprec():
            rounded = +value
        with self.inner.workprec():
            error += abs(rounded - value)
        return QuadratureResult(rounded, error, len(self.nodes))

    def scaled(self, x) -> mpmath.mpf:
        """``exp(pi |x| / 8)`` times the transform, of moderate size on the real axis."""
        with self.inner.workprec():
            return mpmath.exp(mpmath.pi * abs(mpmath.mpf(x)) / 8) * self(x)


# ZEROS #


def zero_spacing_warnings(zeros: Sequence[ZeroRecord], min_gap=math.pi / 2) -> List[Tuple]:
    """Consecutive zeros closer than ``min_gap``.

    This is a heuristic monitor only; close pairs are logged, never rejected.
    """
    close = []
    for left, right in zip(zeros[:-1], zeros[1:]):
        gap = right.location - left.location
        if gap <= min_gap:
            logger.warning("zeros %s and %s only %s apart", left.location, right.location, mpmath.nstr(gap, 5))
            close.append((left.location, right.location, gap))
    return close


def positive_zeros(
    X,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    scan_step=XI_SCAN_STEP,
    window=DEFAULT_WINDOW,
) -> List[ZeroRecord]:
    """The positive real zeros ``x_n <= X`` of ``S``.

    :param X: Right end of the scan.
    :param ctx: Precision context.
    :param scan_step: Sign scan spacing.
    :param window: Largest admissible X.

    :raises SuspectedTangency: A near double zero persisted through all escalations.
    """
    if not 0 < X <= window:
        raise ValueError(f"X must lie in (0, {window}], got {X}")
    transform = XiTransform(X, ctx)
    records = isolate_zeros(transform.scaled, 0, X, scan_step, ctx, f_at=lambda c: XiTransform(X, c).scaled)
    for record in records:
        if not record.simple:
            logger.error("zero at %s is not flagged simple (derivative %s)", record.location, record.derivative_magnitude)
    zero_spacing_warnings(records)
    return records


@dataclass(frozen=True)
class SumRuleReport:
    """Partial sum of ``1/x_n^2`` against its closed-form total ``b_1/(2 b_0)``."""

    n: int
    partial: mpmath.mpf
    partial_error: mpmath.mpf
    target: mpmath.mpf
    target_error: mpmath.mpf

    @property
    def gap(self) -> mpmath.mpf:
        return self.target - self.partial

    @property
    def gap_error(self) -> mpmath.mpf:
        return self.target_error + self.partial_error

    def row(self) -> Dict:
        return {
            "n": self.n,
            "partial": (self.partial, self.partial_error),
            "target": (self.target, self.target_error),
            "gap": (self.gap, self.gap_error),
        }


def sum_rule_report(
    N: int,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    zeros: Optional[Sequence[ZeroRecord]] = None,
    window=DEFAULT_WINDOW,
) -> SumRuleReport:
    """Compare ``sum_{n <= N} x_n^{-2}`` with ``b_1/(2 b_0)``.

    Every omitted real zero and every pair of nonreal zeros adds a positive amount
    to the full sum, so the gap must be positive.

    :param N: Number of zeros.
    :param ctx: Precision context.
    :param zeros: Precomputed zeros, otherwise those up to ``window``.
    :param window: Scan window when zeros are computed here.

    :raises InsufficientData: Fewer than N zeros available.
    :raises NegativeGap: The gap is negative beyond its error bound.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if zeros is None:
        zeros = positive_zeros(window, ctx, window=window)
    if len(zeros) < N:
        raise InsufficientData(f"only {len(zeros)} zeros available, {N} requested")
    table = moment_table(1, ctx)
    with ctx.workprec():
        partial = mpmath.fsum(1 / r.location**2 for r in zeros[:N])
        partial_error = mpmath.fsum(2 * r.bracket_width / r.location**3 for r in zeros[:N])
        b0, b1 = table.b(0), table.b(1)
        target = b1 / (2 * b0)
        target_error = target * (table.b_error(0) / b0 + table.b_error(1) / b1)
    report = SumRuleReport(N, partial, partial_error + 4 * N * ctx.eps * partial, target, target_error)
    if report.gap < -report.gap_error:
        raise NegativeGap(N, report.gap, report.gap_error)
    return report


# HEAT FLOW #


def xi_heat(z, lam, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QuadratureResult:
    """Evaluate ``Xi_lambda(z) = 8 int_0^inf Phi(u) e^{4 lambda u^2} cos(2 z u) du``.

    :param z: Argument with ``|Im z| <= 1``.
    :param lam: Heat parameter, at most 1.
    :param ctx: Precision context.
    """
    if lam > 1:
        raise ValueError(f"heat parameter must be at most 1, got {lam}")
    _check_strip(z)
    inner = _evaluation_context(2 * complex(z), ctx)
    with inner.workprec():
        z = _as_argument(z)
        lam = mpmath.mpf(lam)
        growth = 2 * abs(mpmath.im(z))
        quadratic = 4 * lam
        T = phi_window(0, growth, mpmath.ln(mpmath.mpf(inner.abs_tol)) - 8, quadratic=quadratic)
        tail = phi_tail_envelope(T, 0, growth, quadratic)
        omega = max(mpmath.mpf(1), 2 * abs(z))
        kernel = _kernel_sampler(inner, 2 * mpmath.re(z))

        def integrand(u):
            return kernel(u) * mpmath.exp(quadratic * u * u) * mpmath.cos(2 * z * u)

        result = integrate(integrand, 0, T, ctx=inner, panels=4, panel_width=TRANSFORM_PHASE / omega)
        weight = mpmath.cosh(growth * T) * max(mpmath.mpf(1), mpmath.exp(quadratic * T * T))
        error = 8 * (result.error_bound + tail + kernel.error(2 * KERNEL_MASS * weight))
        exact = 8 * result.value
    with ctx.workprec():
        value = +exact
    with inner.workprec():
        error += abs(value - exact)
    return QuadratureResult(value, error, result.evaluations)


def heat_zero_count(lam, lo, hi, ctx: PrecisionContext = DEFAULT_CONTEXT, scan_step=XI_SCAN_STEP / 2):
    """Real zeros of ``Xi_lambda`` on ``[lo, hi]`` found by a sign scan.

    :return: Number of zeros and their records.
    """
    if not 0 <= lo < hi:
        raise ValueError(f"need 0 <= lo < hi, got [{lo}, {hi}]")
    transform = XiTransform(2 * hi, ctx, heat=lam)

    def scaled(z):
        return transform.scaled(2 * z)

    def scaled_at(c):
        refined = XiTransform(2 * hi, c, heat=lam)
        return lambda z: refined.scaled(2 * z)

    records = isolate_zeros(scaled, lo, hi, scan_step, ctx, f_at=scaled_at)
    logger.info("Xi_%s has %d real zeros on [%s, %s]", lam, len(records), lo, hi)
    return len(records), records


def heat_poly(p: RealPolynomial, lam) -> RealPolynomial:
    """Apply ``exp(-lambda D^2)``: ``sum_n (-lambda)^n / n! p^{(2n)}``.

    Exact for integer or fraction coefficients and parameter.
    """
    exact = p.exact and is_exact(lam)
    lam = Fraction(lam) if exact else mpmath.mpf(lam)
    result = RealPolynomial(())
    derivative = p
    coefficient = Fraction(1) if exact else mpmath.mpf(1)
    n = 0
    while not derivative.is_zero:
        result = result + derivative * coefficient
        derivative = derivative.derivative(2)
        n += 1
        coefficient = coefficient * (-lam) / n
    return result

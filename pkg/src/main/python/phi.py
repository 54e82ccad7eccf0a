"""The Riemann Xi kernel and its property ledger.

The kernel is

    Phi(t) = sum_{n >= 1} (2 pi^2 n^4 e^{9t} - 3 pi n^2 e^{5t}) exp(-pi n^2 e^{4t}),

written termwise as ``e^t P_k(u) e^{-u}`` with ``u = pi n^2 e^{4t}`` for the
k-th derivative. The companion kernel of the cosine representation of Xi(z/2)
with frequency ``z`` is ``Phi38(t) = 2 Phi(t/2)``.
"""

from dataclasses import dataclass, field
import logging
import math
from typing import Dict, Iterable, List, Optional

import mpmath

from errors import InequalityViolated, TailNotDecaying
from numerics import DEFAULT_CONTEXT, HARD_CAP, PrecisionContext, sum_with_tail

logger = logging.getLogger(__name__)

# termwise polynomials P_k(u), ascending coefficients
KERNEL_POLYS = (
    (0, -3, 2),
    (0, -15, 30, -8),
    (0, -75, 330, -224, 32),
)
# |P_k(u)| <= c_k u^(k + 2) once u >= U_MIN
ENVELOPE_CONSTANTS = (2, 8, 32)
U_MIN = mpmath.mpf("5.05")

FIRST_TERM_RATIO = mpmath.mpf(203) / 202


@dataclass(frozen=True)
class PhiEvaluation:
    """Kernel (or derivative) value with its truncation data.

    :param t: Argument.
    :param order: Derivative order 0, 1 or 2.
    :param value: Partial sum through ``terms_used`` terms.
    :param terms_used: Truncation index N.
    :param tail_bound: Bound on the discarded terms.
    :param error_bound: Tail bound plus rounding.
    """

    t: mpmath.mpf
    order: int
    value: mpmath.mpf
    terms_used: int
    tail_bound: mpmath.mpf
    error_bound: mpmath.mpf

    def row(self) -> Dict:
        return {
            "t": self.t,
            "order": self.order,
            "value": (self.value, self.error_bound),
            "terms_used": self.terms_used,
            "tail_bound": self.tail_bound,
        }


def _poly(order: int, u):
    acc = mpmath.mpf(0)
    for c in reversed(KERNEL_POLYS[order]):
        acc = acc * u + c
    return acc


def _term(t, order: int, n: int):
    u = mpmath.pi * n * n * mpmath.exp(4 * t)
    return mpmath.exp(t) * _poly(order, u) * mpmath.exp(-u)


def _term_rounding(t, order: int, n: int):
    """Rounding error of :func:`_term` in units of the working epsilon.

    ``exp(-u)`` carries the relative error of ``u`` multiplied by u, the
    polynomial carries that of its largest monomial.
    """
    u = mpmath.pi * n * n * mpmath.exp(4 * t)
    size = sum(abs(c) * u**i for i, c in enumerate(KERNEL_POLYS[order]))
    return mpmath.exp(t) * (4 * u + 16) * size * mpmath.exp(-u)


def kernel_tail_bound(t, order: int, N: int) -> mpmath.mpf:
    """Bound on ``sum_{n > N} |d^k/dt^k a_n(t)|``.

    Each term is dominated by ``B_n = e^t c_k u_n^m e^{-u_n}`` with ``m = k + 2``;
    the ratios ``B_{n+1}/B_n`` decrease in n, so the tail is at most
    ``B_{N+1} / (1 - rho)`` with rho the first ratio. Returns infinity where
    the comparison does not apply yet.

    :param t: Argument.
    :param order: Derivative order.
    :param N: Last index kept.
    """
    if N < 2:
        return mpmath.inf
    m = order + 2
    q = mpmath.pi * mpmath.exp(4 * t)
    u_next = q * (N + 1) ** 2
    if u_next < U_MIN:
        return mpmath.inf
    rho = (mpmath.mpf(N + 2) / (N + 1)) ** (2 * m) * mpmath.exp(-q * (2 * N + 3))
    if rho >= 1:
        return mpmath.inf
    head = mpmath.exp(t) * ENVELOPE_CONSTANTS[order] * u_next**m * mpmath.exp(-u_next)
    return head / (1 - rho)


def _amplification_bits(t) -> int:
    """Bits lost in ``exp(-u)`` for the first term, ``u = pi e^{4t}``."""
    u = mpmath.pi * mpmath.exp(4 * t)
    return int(mpmath.ceil(mpmath.log(4 * u + 16, 2))) + 8


def _evaluation_context(t, ctx: PrecisionContext) -> PrecisionContext:
    """Context with the absolute floor scaled to the kernel size at ``|t|``.

    For t < 0 the terms are of size one while the sum is as small as Phi(|t|),
    so guard bits cover the cancellation.
    """
    y = mpmath.pi * mpmath.exp(4 * abs(t))
    extra = _amplification_bits(t)
    if t < 0:
        extra += int(mpmath.ceil(y / mpmath.ln(2))) + 32
    return ctx.guarded(extra, scale=mpmath.exp(-y))


def _kernel_sum(t, order: int, ctx: PrecisionContext, start: int):
    """Sum the terms from ``start`` on at the working precision of ``ctx``.

    :return: Value, last index kept, tail bound and total error bound.
    """
    result = sum_with_tail(
        lambda n: _term(t, order, n),
        lambda N: kernel_tail_bound(t, order, N),
        ctx,
        start=start,
    )
    last = start + result.evaluations - 1
    rounding = ctx.eps * mpmath.fsum(_term_rounding(t, order, n) for n in range(start, last + 1))
    return result.value, last, kernel_tail_bound(t, order, last), result.error_bound + rounding


def phi_eval(t, order: int = 0, ctx: PrecisionContext = DEFAULT_CONTEXT) -> PhiEvaluation:
    """Evaluate the kernel or one of its first two derivatives.

    The series is truncated at the first N >= 2 whose remainder bound meets the
    tolerance. The error bound covers the tail, the rounding of every term and the
    final rounding to the precision of ``ctx``.

    :param t: Real argument.
    :param order: 0, 1 or 2.
    :param ctx: Precision context.

    :return: Value with truncation index and bounds.

    :raises TailNotDecaying: t is so negative that the truncation index would
        exceed the hard cap.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    with ctx.workprec():
        t = mpmath.mpf(t)
        q = mpmath.pi * mpmath.exp(4 * t)
        # rough index where exp(-u_n) drops below the target
        needed = mpmath.sqrt((mpmath.pi * mpmath.exp(4 * abs(t)) + ctx.bits + 64) / q)
        if needed > HARD_CAP:
            raise TailNotDecaying(f"kernel at t = {t} needs about {int(needed)} terms")
    eval_ctx = _evaluation_context(t, ctx)
    with eval_ctx.workprec():
        total, last, tail, error = _kernel_sum(t, order, eval_ctx, 1)
    with ctx.workprec():
        value = +total
    with eval_ctx.workprec():
        error += abs(value - total)
    logger.debug("phi(%s), order %d: N = %d", t, order, last)
    return PhiEvaluation(t, order, value, last, tail, error)


def psi_eval(t, order: int = 0, ctx: PrecisionContext = DEFAULT_CONTEXT) -> PhiEvaluation:
    """The kernel without its first term, summed directly (no cancellation)."""
    with ctx.workprec():
        t = mpmath.mpf(t)
    sub = ctx.guarded(_amplification_bits(t), scale=mpmath.exp(-4 * mpmath.pi * mpmath.exp(4 * t)))
    with sub.workprec():
        total, last, tail, error = _kernel_sum(t, order, sub, 2)
    return PhiEvaluation(t, order, total, last, tail, error)


def first_term(t, order: int = 0) -> mpmath.mpf:
    """Closed form of ``a(t) = a_1(t)`` and its derivatives at working precision."""
    return _term(mpmath.mpf(t), order, 1)


def phi38_eval(t, ctx: PrecisionContext = DEFAULT_CONTEXT) -> PhiEvaluation:
    """Companion kernel ``Phi38(t) = 2 Phi(t/2)``."""
    with ctx.workprec():
        half = mpmath.mpf(t) / 2
    inner = phi_eval(half, 0, ctx)
    with ctx.workprec():
        return PhiEvaluation(
            mpmath.mpf(t), 0, 2 * inner.value, inner.terms_used, 2 * inner.tail_bound, 2 * inner.error_bound
        )


def decay_ratio(t, ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpmath.mpf:
    """Return ``Phi38(t) / exp(9t/2 - pi e^{2t})``, bounded by ``4 pi^2 203/202`` for t >= 0."""
    value = phi38_eval(t, ctx).value
    with ctx.workprec():
        t = mpmath.mpf(t)
        return value / mpmath.exp(9 * t / 2 - mpmath.pi * mpmath.exp(2 * t))


# SAMPLING #

# int_0^inf Phi = Xi(0)/8 = 0.0621400972...
KERNEL_MASS = mpmath.mpf("0.0622")


class KernelSampler:
    """Kernel values for quadrature rules, tracking the worst relative error seen.

    The kernel is positive for t >= 0, so a rule with nonnegative weights
    applied to ``g(t) Phi(t)`` moves by at most ``worst / (1 - worst)`` times
    the rule applied to ``|g| Phi`` when the samples are replaced by exact values.

    :param ctx: Context the kernel is evaluated in.
    """

    def __init__(self, ctx: PrecisionContext):
        self.ctx = ctx
        self.worst = mpmath.mpf(0)
        self.calls = 0

    def __call__(self, t) -> mpmath.mpf:
        evaluation = phi_eval(t, 0, self.ctx)
        self.calls += 1
        with self.ctx.workprec():
            if evaluation.value > 0:
                ratio = evaluation.error_bound / evaluation.value
            else:
                ratio = mpmath.inf
        if ratio > self.worst:
            self.worst = ratio
        return evaluation.value

    def error(self, mass) -> mpmath.mpf:
        """Bound on the kernel error of a rule whose sum of ``|w g| Phi`` is ``mass``."""
        if self.worst >= 1:
            return mpmath.inf
        return self.worst / (1 - self.worst) * abs(mass)


# WINDOWS #


def phi_tail_envelope(T, power: int = 0, growth=0, quadratic=0) -> mpmath.mpf:
    """Bound ``int_T^inf t^power e^{growth t + quadratic t^2} Phi(t) dt`` for T > 0.

    Uses ``Phi(t) < (203/202) 2 e^t y^2 e^{-y}`` with ``y = pi e^{4t}``. When the
    logarithmic derivative of this envelope is at most -1 on ``[T, inf)`` the
    integral is below the envelope at T. Returns infinity otherwise.

    :param T: Truncation point.
    :param power: Power of t in the weight.
    :param growth: Linear exponential rate of the weight (``|Im z|`` for cosines).
    :param quadratic: Gaussian rate of the weight (``4 lambda`` for the heat flow).
    """
    T = mpmath.mpf(T)
    if T <= 0:
        return mpmath.inf
    y = mpmath.pi * mpmath.exp(4 * T)
    slope = power / T + growth + 2 * quadratic * T + 9 - 4 * y
    if slope > -1 or 16 * y < 2 * quadratic:
        return mpmath.inf
    weight = T**power * mpmath.exp(growth * T + quadratic * T**2)
    return weight * FIRST_TERM_RATIO * 2 * mpmath.exp(T) * y**2 * mpmath.exp(-y)


def phi_window(power: int = 0, growth=0, log_tol=-70, quadratic=0, floor=1) -> mpmath.mpf:
    """Truncation point T where :func:`phi_tail_envelope` drops below ``exp(log_tol)``.

    A 20-step fixed-point iteration on ``y = log(weight) + log(2 e^T y^2 203/202) - log_tol``
    gives the starting value, which is then advanced in steps of 1/16 until the
    envelope is valid and small enough.

    :param power: Power of t in the weight.
    :param growth: Linear exponential rate of the weight.
    :param log_tol: Natural logarithm of the target.
    :param quadratic: Gaussian rate of the weight.
    :param floor: Smallest T returned.
    """
    log_tol = mpmath.mpf(log_tol)
    T = mpmath.mpf(floor)
    for _ in range(20):
        y = mpmath.pi * mpmath.exp(4 * T)
        rhs = (
            power * mpmath.ln(T)
            + (1 + growth) * T
            + quadratic * T**2
            + 2 * mpmath.ln(y)
            + mpmath.ln(2 * FIRST_TERM_RATIO)
            - log_tol
        )
        if rhs <= mpmath.pi:
            break
        T = max(mpmath.mpf(floor), mpmath.ln(rhs / mpmath.pi) / 4)
    while phi_tail_envelope(T, power, growth, quadratic) > mpmath.exp(log_tol):
        T += mpmath.mpf(1) / 16
    return T


# LEDGER #


@dataclass(frozen=True)
class LedgerCheck:
    """One inequality at one point, ``margin = lhs - rhs`` must be positive."""

    name: str
    t: mpmath.mpf
    lhs: mpmath.mpf
    rhs: mpmath.mpf
    margin: mpmath.mpf
    error: mpmath.mpf
    applicable: bool = True

    @property
    def passed(self) -> bool:
        return (not self.applicable) or self.margin > 0

    def row(self) -> Dict:
        return {
            "check": self.name,
            "t": self.t,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": (self.margin, self.error),
            "applicable": self.applicable,
            "passed": self.passed,
        }


@dataclass
class LedgerReport:
    """All ledger checks over a grid."""

    checks: List[LedgerCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[LedgerCheck]:
        return [c for c in self.checks if not c.passed]

    def by_name(self, name: str) -> List[LedgerCheck]:
        return [c for c in self.checks if c.name == name]

    def min_margin(self, name: str) -> Optional[mpmath.mpf]:
        margins = [c.margin for c in self.by_name(name) if c.applicable]
        return min(margins) if margins else None

    def rows(self) -> List[Dict]:
        return [c.row() for c in self.checks]


LEDGER_CHECKS = (
    "psi_positive",
    "psi_bound",
    "psi1_bound",
    "psi2_bound",
    "phi_over_a",
    "v_lower",
    "u_bound",
    "log_concavity",
    "final_bound",
    "ratio_decreasing",
)


def _ratio(t, ctx: PrecisionContext):
    """``Phi'(t) / (t Phi(t))``."""
    d0 = phi_eval(t, 0, ctx).value
    d1 = phi_eval(t, 1, ctx).value
    with ctx.workprec():
        return d1 / (t * d0)


def _ledger_point(t, ctx: PrecisionContext) -> List[LedgerCheck]:
    def tol(*values):
        return 4 * ctx.rel_tol * sum(abs(v) for v in values)

    phi0 = phi_eval(t, 0, ctx)
    psi = [psi_eval(t, k, ctx) for k in range(3)]
    with ctx.workprec():
        t = mpmath.mpf(t)
        y = mpmath.pi * mpmath.exp(4 * t)
        et = mpmath.exp(t)
        E = mpmath.exp(2 * t) * mpmath.exp(-2 * y) * y**3
        a = [first_term(t, k) for k in range(3)]
        p0, p1, p2 = (p.value for p in psi)
        phi = phi0.value

        V = a[1] ** 2 - a[0] * a[2]
        U = 2 * a[1] * p1 - a[2] * p0 - phi * p2
        checks = []

        def add(name, lhs, rhs, *parts):
            checks.append(LedgerCheck(name, t, lhs, rhs, lhs - rhs, tol(lhs, rhs, *parts)))

        add("psi_positive", p0, mpmath.mpf(0))
        add("psi_bound", 64 * et * y**2 * mpmath.exp(-4 * y), p0)
        add("psi1_bound", 565 * et * y**3 * mpmath.exp(-4 * y), abs(p1))
        add("psi2_bound", mpmath.mpf("1.031") * 2**13 * et * y**4 * mpmath.exp(-4 * y), abs(p2))
        add("phi_over_a", FIRST_TERM_RATIO * a[0], phi)
        add("v_lower", V, 256 * E)
        add("u_bound", 56424 * E * mpmath.exp(-3 * y) * y**3, abs(U))
        # (Phi')^2 - Phi Phi'' = V + U + (Psi')^2
        add("log_concavity", V + U + p1**2, mpmath.mpf(0), V, U)
        add("final_bound", V + U, 114 * E, V, U)

    if t > 0:
        h = mpmath.ldexp(1, -ctx.bits // 2)
        h_float = max(float(h), 1e-300)
        fine = PrecisionContext(
            bits=ctx.bits + ctx.bits // 2 + 16,
            rel_tol=max(ctx.rel_tol * h_float, 1e-300),
            abs_tol=max(ctx.abs_tol * h_float, 1e-300),
        )
        with fine.workprec():
            above, below = t + h, t - h
        upper, lower = _ratio(above, fine), _ratio(below, fine)
        with fine.workprec():
            slope = (upper - lower) / (2 * h)
            error = 4 * ctx.rel_tol * abs(upper) / h
            checks.append(LedgerCheck("ratio_decreasing", t, -slope, mpmath.mpf(0), -slope, error))
    else:
        checks.append(
            LedgerCheck("ratio_decreasing", t, mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(0), False)
        )
    return checks


def phi_ledger(grid: Iterable, ctx: PrecisionContext = DEFAULT_CONTEXT, strict: bool = True) -> LedgerReport:
    """Evaluate the log-concavity ledger of the kernel on a grid of t >= 0.

    At every point the first term ``a``, the remainder ``Psi`` and their first two
    derivatives are evaluated and each bound of the ledger is checked. The check
    that ``Phi'/(t Phi)`` decreases uses a centered difference with step
    ``2^(-bits/2)`` and is not applicable at t = 0.

    :param grid: Points t >= 0.
    :param ctx: Precision context.
    :param strict: Raise on the first failed check instead of only reporting it.

    :return: The report of all checks.

    :raises InequalityViolated: A check failed and ``strict`` is set.
    """
    report = LedgerReport()
    for t in grid:
        if t < 0:
            raise ValueError(f"ledger points must be nonnegative, got {t}")
        for check in _ledger_point(t, ctx):
            report.checks.append(check)
            if not check.passed:
                logger.warning("%s fails at t = %s, margin %s", check.name, t, mpmath.nstr(check.margin, 5))
                if strict:
                    raise InequalityViolated(check.name, t, check.margin)
    logger.info("ledger on %d points: %s", len({c.t for c in report.checks}), "ok" if report.passed else "FAILED")
    return report


def default_ledger_grid(step: float = 0.25, stop: float = 2.0) -> List[float]:
    """The grid 0, step, ..., stop."""
    count = int(math.floor(stop / step + 1e-9))
    return [k * step for k in range(count + 1)]

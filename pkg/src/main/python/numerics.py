"""Precision policy, tail-bounded summation, quadrature and real-zero isolation.

Every routine works in ``mpmath`` arithmetic at the precision named by a
:class:`PrecisionContext` and returns values together with an error bound.
"""

from dataclasses import dataclass, replace
import logging
import math
from typing import Callable, Iterable, List, Optional, Sequence

import mpmath
from mpmath.calculus.quadrature import GaussLegendre

from errors import (
    NoConvergence,
    SuspectedTangency,
    TailBoundMissing,
    TailNotDecaying,
)

logger = logging.getLogger(__name__)

HARD_CAP = 10**6
MAX_PANEL_DEPTH = 6
MAX_TRUNCATION_DOUBLINGS = 64
GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision and tolerance policy.

    :param bits: Mantissa bits of the working precision, at least 53.
    :param rel_tol: Target relative error.
    :param abs_tol: Absolute error floor for values near zero.
    :param max_escalations: How often the precision may be doubled.
    """

    bits: int = 128
    rel_tol: float = 1e-25
    abs_tol: float = 1e-30
    max_escalations: int = 2

    def __post_init__(self):
        if int(self.bits) != self.bits or self.bits < 53:
            raise ValueError(f"bits must be an integer >= 53, got {self.bits}")
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise ValueError("rel_tol and abs_tol must be strictly positive")
        if self.max_escalations < 0:
            raise ValueError("max_escalations must be nonnegative")

    def workprec(self):
        """Context manager setting the mpmath working precision."""
        return mpmath.workprec(self.bits)

    @property
    def eps(self) -> mpmath.mpf:
        """Unit roundoff at the working precision."""
        return mpmath.ldexp(1, -self.bits)

    @property
    def digits(self) -> int:
        """Significant decimal digits carried by the working precision."""
        return int(math.ceil(self.bits * math.log10(2)))

    def tolerance(self, value) -> mpmath.mpf:
        """Acceptable absolute error for a result of size ``value``."""
        return mpmath.mpf(self.rel_tol) * abs(value) + mpmath.mpf(self.abs_tol)

    def escalated(self) -> "PrecisionContext":
        """Copy with doubled precision and one escalation used up."""
        if self.max_escalations == 0:
            raise ValueError("no precision escalations left")
        return replace(self, bits=2 * self.bits, max_escalations=self.max_escalations - 1)

    def guarded(self, extra_bits: int, scale=1) -> "PrecisionContext":
        """Copy with extra guard bits and the absolute floor scaled by ``scale``.

        Used when the result is expected to be ``scale`` times smaller than the
        terms it is computed from. ``scale`` may be an ``mpf`` far below the
        float range, the floor is then kept as an ``mpf``.
        """
        abs_tol = self.abs_tol
        if scale != 1:
            abs_tol = mpmath.mpf(self.abs_tol) * scale
            if abs_tol <= 0:
                raise ValueError("scaled absolute tolerance underflowed")
        return replace(self, bits=self.bits + max(0, int(extra_bits)), abs_tol=abs_tol)

    def tightened(self, factor, extra_bits: Optional[int] = None) -> "PrecisionContext":
        """Copy with both tolerances divided by ``factor >= 1``.

        :param factor: Tightening factor, an ``mpf`` is kept as one.
        :param extra_bits: Guard bits, ``log2(factor)`` rounded up by default.
        """
        factor = mpmath.mpf(factor)
        if factor < 1:
            raise ValueError(f"tightening factor must be at least 1, got {factor}")
        if extra_bits is None:
            extra_bits = int(mpmath.ceil(mpmath.log(factor, 2)))
        return replace(
            self,
            bits=self.bits + max(0, int(extra_bits)),
            rel_tol=mpmath.mpf(self.rel_tol) / factor,
            abs_tol=mpmath.mpf(self.abs_tol) / factor,
        )


DEFAULT_CONTEXT = PrecisionContext()


@dataclass(frozen=True)
class QuadratureResult:
    """A computed value with a bound on its absolute error.

    ``value`` is an ``mpf``, or an ``mpc`` for complex-valued integrands.
    """

    value: mpmath.mpf
    error_bound: mpmath.mpf
    evaluations: int

    def __iter__(self):
        """Unpack as ``value, error_bound``."""
        yield self.value
        yield self.error_bound


@dataclass(frozen=True)
class ZeroRecord:
    """A located real zero.

    The function changes sign across ``[location - bracket_width, location + bracket_width]``.
    """

    location: mpmath.mpf
    bracket_width: mpmath.mpf
    derivative_magnitude: mpmath.mpf
    simple: bool


def sign(x) -> int:
    """Sign of a real number as -1, 0 or 1."""
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


# SUMMATION #


def sum_with_tail(
    term: Callable[[int], mpmath.mpf],
    tail_bound: Callable[[int], mpmath.mpf],
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    start: int = 1,
    tail_estimate: Optional[Callable[[int], mpmath.mpf]] = None,
) -> QuadratureResult:
    """Sum a series until a proven tail bound meets the tolerance.

    :param term: Term as a function of its index.
    :param tail_bound: ``tail_bound(N)`` bounds ``|sum_{n > N} term(n)|``, or the
        remainder after ``tail_estimate(N)`` when that is given.
    :param ctx: Precision context.
    :param start: First index of the series.
    :param tail_estimate: Asymptotic value of ``sum_{n > N} term(n)``, added to the result.

    :return: Partial sum, its error bound (tail plus rounding) and the number of
        terms used.

    :raises TailNotDecaying: No index up to the hard cap met the tolerance.
    """
    with ctx.workprec():
        partial = mpmath.mpf(0)
        magnitude = mpmath.mpf(0)
        for count, n in enumerate(range(start, start + HARD_CAP), start=1):
            value = term(n)
            partial += value
            magnitude += abs(value)
            bound = tail_bound(n)
            if bound <= ctx.tolerance(partial):
                total = partial + tail_estimate(n) if tail_estimate else +partial
                if bound <= ctx.tolerance(total):
                    rounding = 4 * count * ctx.eps * magnitude
                    return QuadratureResult(total, bound + rounding, count)
    raise TailNotDecaying(
        f"tail bound still above tolerance after {HARD_CAP} terms (last bound {bound})"
    )


# QUADRATURE #


class _CountingIntegrand:
    """Wrap an integrand, counting calls and tracking the largest magnitude seen."""

    def __init__(self, f: Callable):
        self.f = f
        self.calls = 0
        self.peak = mpmath.mpf(0)

    def __call__(self, x):
        self.calls += 1
        value = self.f(x)
        size = abs(value)
        if size > self.peak:
            self.peak = size
        return value


def _panel_grid(a, b, points: Iterable, panels: int) -> List[mpmath.mpf]:
    """Endpoints of ``panels`` equal panels between consecutive breakpoints."""
    cuts = [a] + sorted(mpmath.mpf(p) for p in points if a < p < b) + [b]
    grid = [cuts[0]]
    for left, right in zip(cuts[:-1], cuts[1:]):
        width = (right - left) / panels
        grid.extend(left + width * k for k in range(1, panels))
        grid.append(right)
    return grid


def _integrate_finite(integrand, a, b, points, panels, ctx, goal):
    """Tanh-sinh quadrature panel by panel, halving the panels whose error is too large.

    mpmath stops refining at an absolute epsilon, so the integrand is divided by
    its largest sampled magnitude first.
    """
    grid = _panel_grid(a, b, points, panels)
    pending = [(left, right, 0) for left, right in zip(grid[:-1], grid[1:])]
    scale = max(abs(integrand((left + right) / 2)) for left, right, _ in pending)
    if scale == 0:
        scale = mpmath.mpf(1)

    def scaled(x):
        return integrand(x) / scale

    done = []
    while pending:
        results = [(left, right, depth) + tuple(mpmath.quad(scaled, [left, right], error=True)) for left, right, depth in pending]
        value = sum(v for *_, v, _ in results + done)
        target = goal(value * scale) / scale / (b - a)
        pending = []
        for left, right, depth, v, e in results:
            if e <= target * (right - left):
                done.append((left, right, depth, v, e))
            elif depth == MAX_PANEL_DEPTH:
                raise NoConvergence(
                    f"quadrature on [{left}, {right}] not converged after {MAX_PANEL_DEPTH} halvings"
                )
            else:
                middle = (left + right) / 2
                pending.extend([(left, middle, depth + 1), (middle, right, depth + 1)])
        if pending:
            logger.debug("quad on [%s, %s]: refining %d panels", a, b, len(pending))
    value = sum(v for *_, v, _ in done)
    err = sum(e for *_, e in done)
    return value * scale, err * scale


def integrate(
    f: Callable,
    a,
    b,
    tail_bound: Optional[Callable] = None,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    points: Sequence = (),
    panels: int = 1,
    panel_width=None,
    tail_estimate: Optional[Callable] = None,
) -> QuadratureResult:
    """Adaptive quadrature on a finite or semi-infinite interval.

    On ``[a, inf)`` the range is truncated at a point ``T`` found by doubling
    ``T - a`` until ``tail_bound(T)`` is below half the tolerance of the value
    accumulated so far. If ``tail_estimate`` is given it is added to the value and
    ``tail_bound`` must bound the remainder after that estimate.

    :param f: Integrand, real or complex valued.
    :param a: Lower limit.
    :param b: Upper limit, possibly ``mpmath.inf`` or ``math.inf``.
    :param tail_bound: Bound on the tail beyond ``T``.
    :param ctx: Precision context.
    :param points: Interior breakpoints (kinks, peaks) to split at.
    :param panels: Initial number of equal panels between breakpoints.
    :param panel_width: If given, overrides ``panels`` per segment so that panels
        are at most this wide (for oscillatory integrands).
    :param tail_estimate: Asymptotic value of the tail beyond ``T``.

    :return: Integral, error bound and number of integrand evaluations.

    :raises TailBoundMissing: Infinite range without tail bound.
    :raises NoConvergence: The panel depth limit was reached.
    """
    with ctx.workprec():
        a = mpmath.mpf(a)
        integrand = _CountingIntegrand(f)

        def panels_for(left, right):
            if panel_width is None:
                return panels
            return max(panels, int(mpmath.ceil((right - left) / panel_width)))

        if not mpmath.isinf(b):
            b = mpmath.mpf(b)
            value, err = _integrate_finite(
                integrand, a, b, points, panels_for(a, b), ctx, lambda v: ctx.tolerance(v) / 2
            )
            rounding = 8 * ctx.eps * integrand.peak * (b - a)
            return QuadratureResult(value, err + rounding, integrand.calls)

        if tail_bound is None:
            raise TailBoundMissing("an infinite upper limit needs a tail bound")

        interior = [mpmath.mpf(p) for p in points if p > a]
        left = a
        right = max(interior + [a]) + 1
        value = mpmath.mpf(0)
        err = mpmath.mpf(0)
        for _ in range(MAX_TRUNCATION_DOUBLINGS):
            part, part_err = _integrate_finite(
                integrand,
                left,
                right,
                interior,
                panels_for(left, right),
                ctx,
                lambda v: ctx.tolerance(value + v) / 4,
            )
            value += part
            err += part_err
            total = value + (tail_estimate(right) if tail_estimate else 0)
            bound = tail_bound(right)
            if bound <= ctx.tolerance(total) / 2:
                logger.debug("truncated at T = %s, tail bound %s", right, mpmath.nstr(bound, 3))
                rounding = 8 * ctx.eps * integrand.peak * (right - a)
                return QuadratureResult(total, err + bound + rounding, integrand.calls)
            left, right = right, a + 2 * (right - a)
    raise NoConvergence(f"tail bound never met the tolerance, last T = {right}")


class FixedPanelRule:
    """Gauss-Legendre nodes on equal panels of ``[a, b]``, computed once.

    Evaluating many integrals that share an integrand envelope (a family of cosine
    transforms of one kernel, say) then costs one weighted sum each.

    :param a: Left end.
    :param b: Right end.
    :param panels: Number of equal panels.
    :param degree: Rule degree, ``3 * 2**(degree - 1)`` nodes per panel.
    :param ctx: Precision context the nodes are computed at.
    """

    def __init__(self, a, b, panels: int, degree: int, ctx: PrecisionContext):
        self.ctx = ctx
        self.panels = panels
        self.degree = degree
        rule = GaussLegendre(mpmath.mp)
        with ctx.workprec():
            self.a = mpmath.mpf(a)
            self.b = mpmath.mpf(b)
            width = (self.b - self.a) / panels
            self.nodes = []
            self.weights = []
            for k in range(panels):
                left = self.a + k * width
                for x, w in rule.get_nodes(left, left + width, degree, ctx.bits):
                    self.nodes.append(x)
                    self.weights.append(w)
        logger.debug("fixed rule with %d nodes on [%s, %s]", len(self.nodes), a, b)

    def __len__(self) -> int:
        return len(self.nodes)

    def tabulate(self, f: Callable) -> List:
        """Return ``w_j f(x_j)`` for all nodes."""
        with self.ctx.workprec():
            return [w * f(x) for x, w in zip(self.nodes, self.weights)]

    def refined(self) -> "FixedPanelRule":
        """The same panels with the next rule degree."""
        return FixedPanelRule(self.a, self.b, self.panels, self.degree + 1, self.ctx)


# ZERO ISOLATION #


class _NeedsEscalation(Exception):
    def __init__(self, location, value):
        super().__init__(location, value)
        self.location = location
        self.value = value


def _golden_minimum(f, a, b, iterations: int = 40):
    """Location and value of the minimum of ``|f|`` on ``[a, b]`` by golden section."""
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = abs(f(c)), abs(f(d))
    for _ in range(iterations):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = abs(f(c))
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = abs(f(d))
    return (c, fc) if fc < fd else (d, fd)


def _refine(f, a, fa, b, fb, ctx: PrecisionContext, noise) -> ZeroRecord:
    """Shrink a sign-change bracket to width ``abs_tol`` and flag simplicity."""
    tol = mpmath.mpf(ctx.abs_tol)
    for _ in range(4):
        m = (a + b) / 2
        fm = f(m)
        if fm == 0:
            a = b = m
            break
        if sign(fm) == sign(fa):
            a, fa = m, fm
        else:
            b, fb = m, fm

    location = None
    half = tol / 2
    if a != b:
        try:
            x = mpmath.findroot(f, (a, b), solver="illinois", tol=tol / 16, verify=False, maxsteps=200)
        except (ZeroDivisionError, ValueError):
            x = None
        if x is not None and mpmath.im(x) == 0 and a <= x <= b:
            x = mpmath.re(x)
            left, right = f(x - half), f(x + half)
            if max(abs(left), abs(right)) <= noise:
                raise _NeedsEscalation(x, max(abs(left), abs(right)))
            if sign(left) * sign(right) <= 0:
                location = x
        if location is None:
            # bracket polishing failed, bisect the remaining bracket
            while b - a > tol:
                m = (a + b) / 2
                fm = f(m)
                if fm == 0:
                    a = b = m
                    break
                if sign(fm) == sign(fa):
                    a, fa = m, fm
                else:
                    b, fb = m, fm
            location = (a + b) / 2
            half = (b - a) / 2
    else:
        location = a
        half = mpmath.mpf(0)

    h = mpmath.ldexp(1, -ctx.bits // 2) * max(1, abs(location))
    derivative = abs(f(location + h) - f(location - h)) / (2 * h)
    return ZeroRecord(location, half, derivative, bool(derivative > tol))


def _isolate(f, lo, hi, scan_step, ctx: PrecisionContext) -> List[ZeroRecord]:
    with ctx.workprec():
        lo, hi, step = mpmath.mpf(lo), mpmath.mpf(hi), mpmath.mpf(scan_step)
        count = int(mpmath.ceil((hi - lo) / step))
        xs = [lo + k * step for k in range(count)] + [hi]
        ys = [f(x) for x in xs]
        scale = max(abs(y) for y in ys)
        noise = 256 * ctx.eps * scale
        tol = mpmath.mpf(ctx.abs_tol)

        records = []
        for k in range(len(xs) - 1):
            a, b, fa, fb = xs[k], xs[k + 1], ys[k], ys[k + 1]
            if fa == 0:
                if k == 0 or ys[k - 1] != 0:
                    records.append(_refine(f, a, fa, a, fa, ctx, noise))
                continue
            if fa * fb < 0:
                records.append(_refine(f, a, fa, b, fb, ctx, noise))
        if ys[-1] == 0:
            records.append(_refine(f, xs[-1], ys[-1], xs[-1], ys[-1], ctx, noise))

        # dips of |f| that do not cross zero
        for k in range(1, len(xs) - 1):
            y0, y1, y2 = ys[k - 1], ys[k], ys[k + 1]
            if y1 == 0 or sign(y0) != sign(y1) or sign(y1) != sign(y2):
                continue
            if abs(y1) < abs(y0) and abs(y1) <= abs(y2):
                where, depth = _golden_minimum(f, xs[k - 1], xs[k + 1])
                if depth < max(tol, noise):
                    raise _NeedsEscalation(where, depth)
        return sorted(records, key=lambda r: r.location)


def isolate_zeros(
    f: Callable,
    lo,
    hi,
    scan_step,
    ctx: PrecisionContext = DEFAULT_CONTEXT,
    f_at: Optional[Callable[[PrecisionContext], Callable]] = None,
) -> List[ZeroRecord]:
    """Locate the real zeros of ``f`` on ``[lo, hi]``.

    The interval is scanned at ``scan_step``; every sign change is bisected and
    then polished by the Illinois variant of regula falsi until the bracket is
    ``abs_tol`` wide. Undecidable signs and near-tangencies retry at doubled
    precision.

    :param f: Real function.
    :param lo: Left end.
    :param hi: Right end.
    :param scan_step: Grid spacing of the sign scan.
    :param ctx: Precision context.
    :param f_at: Optional factory returning ``f`` evaluated at a given context,
        used on escalation; otherwise ``f`` is re-run at the higher precision.

    :return: Zero records sorted by location.

    :raises SuspectedTangency: ``|f|`` dips below ``abs_tol`` without a sign change
        even after all escalations.
    """
    if not lo < hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if not scan_step > 0:
        raise ValueError("scan_step must be positive")
    current = ctx
    func = f
    while True:
        try:
            records = _isolate(func, lo, hi, scan_step, current)
            logger.info("%d zeros on [%s, %s] at %d bits", len(records), lo, hi, current.bits)
            return records
        except _NeedsEscalation as exc:
            if current.max_escalations == 0:
                raise SuspectedTangency(exc.location, exc.value) from None
            current = current.escalated()
            logger.debug("escalating to %d bits near %s", current.bits, exc.location)
            if f_at is not None:
                func = f_at(current)


def default_scan_step(frequency) -> float:
    """Scan step pi/8 divided by the dominant frequency of an oscillatory function."""
    return math.pi / 8 / float(frequency)

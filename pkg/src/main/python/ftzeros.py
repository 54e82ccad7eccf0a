"""Zeros of finite Fourier transforms ``f_A(z) = int_0^A phi(t) e^{izt} dt``.

For real ``x`` the real and imaginary parts are ``C_A(x)`` and ``S_A(x)``, and
``W_{A,alpha}(x) = Im(e^{i alpha} f_A(x)) = sin(alpha) C_A(x) + cos(alpha) S_A(x)``.
Step functions are transformed in closed form, sampled densities by quadrature.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math
import re
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
import sympy

from data_models import Number, RealPolynomial, to_fraction, to_mpf
from errors import (
    BoundaryZeroSuspected,
    CommonZero,
    NoConvergence,
    StripViolation,
    StructureViolation,
    UsageError,
)
from lp import sturm_count
from numerics import (
    DEFAULT_CONTEXT,
    FixedPanelRule,
    PrecisionContext,
    QuadratureResult,
    ZeroRecord,
    default_scan_step,
    integrate,
    isolate_zeros,
)

logger = logging.getLogger(__name__)

FT_STRIP = 8
MONOTONE_GRID = 1000
RULE_DEGREE = 5
RULE_PHASE = 16
MAX_CONTOUR_DEPTH = 40
CONTOUR_SHRINK = 1e-3


# DENSITIES #


@dataclass(frozen=True)
class StepFunction:
    """``phi(t) = c_j`` on ``(t_j, t_{j+1})`` with ``0 = t_0 < ... < t_{n+1} = A``.

    Breakpoints are exact rationals. ``proxies`` holds the indices of interior
    breakpoints that stand in for irrational numbers.
    """

    breakpoints: Tuple[Fraction, ...]
    values: Tuple[Number, ...]
    proxies: FrozenSet[int] = frozenset()

    def __post_init__(self):
        points = tuple(to_fraction(t) for t in self.breakpoints)
        object.__setattr__(self, "breakpoints", points)
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "proxies", frozenset(self.proxies))
        if len(points) < 2 or len(self.values) != len(points) - 1:
            raise ValueError("need n + 2 breakpoints for n + 1 values")
        if points[0] != 0:
            raise ValueError("the first breakpoint must be 0")
        if any(b <= a for a, b in zip(points[:-1], points[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if not self.proxies <= set(range(1, len(points) - 1)):
            raise ValueError("only interior breakpoints can be irrational proxies")

    @property
    def A(self) -> Fraction:
        return self.breakpoints[-1]

    @property
    def increasing(self) -> bool:
        """True for ``0 < c_0 < c_1 < ... < c_n``."""
        return self.values[0] > 0 and all(b > a for a, b in zip(self.values[:-1], self.values[1:]))

    @property
    def kinks(self) -> Tuple[Fraction, ...]:
        return self.breakpoints[1:-1]

    @property
    def integrable_bound(self):
        return sum(abs(c) * (b - a) for c, a, b in zip(self.values, self.breakpoints[:-1], self.breakpoints[1:]))

    @property
    def mass(self):
        """``int_0^A phi``, the value of ``f_A(0)``."""
        return sum(c * (b - a) for c, a, b in zip(self.values, self.breakpoints[:-1], self.breakpoints[1:]))

    def __call__(self, t):
        exact = isinstance(t, (int, Fraction))
        for c, right in zip(self.values, self.breakpoints[1:]):
            if t < (right if exact else to_mpf(right)):
                return c
        return self.values[-1]

    @classmethod
    def parse(cls, text: str) -> "StepFunction":
        """Read the fixture format.

        A header ``A=<rational>`` and one line ``<t_j> <c_j> [irrational]`` per
        piece, ``t_j`` as ``num/den``. Blank lines and ``#`` comments are skipped.

        :raises UsageError: Malformed fixture.
        """
        length = None
        starts, values, proxies = [], [], set()
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                if line.replace(" ", "").startswith("A="):
                    length = Fraction(line.split("=", 1)[1].strip())
                    continue
                tokens = line.split()
                if len(tokens) not in (2, 3) or (len(tokens) == 3 and tokens[2] != "irrational"):
                    raise ValueError("expected '<t_j> <c_j> [irrational]'")
                if len(tokens) == 3:
                    proxies.add(len(starts))
                starts.append(Fraction(tokens[0]))
                values.append(Fraction(tokens[1]))
            except (ValueError, ZeroDivisionError) as err:
                raise UsageError(f"fixture line {number}: {raw!r}: {err}") from None
        if length is None:
            raise UsageError("fixture has no 'A=<rational>' header")
        try:
            return cls(tuple(starts) + (length,), tuple(values), frozenset(proxies))
        except ValueError as err:
            raise UsageError(f"invalid fixture: {err}") from None

    def to_text(self) -> str:
        """Inverse of :meth:`parse`."""
        lines = [f"A={self.A.numerator}/{self.A.denominator}"]
        for j, (t, c) in enumerate(zip(self.breakpoints[:-1], self.values)):
            flag = " irrational" if j in self.proxies else ""
            lines.append(f"{t.numerator}/{t.denominator} {c}{flag}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SampledDensity:
    """A density given by an evaluator on ``(0, A)``.

    When ``monotone_increasing`` is set, samples on a grid are checked to be
    nondecreasing. This is a sanity gate, not a proof.
    """

    name: str
    evaluator: Callable
    A: Number
    monotone_increasing: bool
    integrable_bound: Number
    kinks: Tuple = ()

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError("A must be positive")
        if self.monotone_increasing:
            samples = [self.evaluator(mpmath.mpf(self.A) * k / MONOTONE_GRID) for k in range(1, MONOTONE_GRID)]
            if any(b < a for a, b in zip(samples[:-1], samples[1:])):
                raise ValueError(f"density {self.name!r} is flagged increasing but decreases on the grid")

    def __call__(self, t):
        return self.evaluator(t)


Density = Union[StepFunction, SampledDensity]


def _registry(A) -> Dict[str, Callable[[], SampledDensity]]:
    A = mpmath.mpf(A)
    return {
        "identity": lambda: SampledDensity("identity", lambda t: t, A, True, A**2 / 2),
        "exp": lambda: SampledDensity("exp", mpmath.exp, A, True, mpmath.exp(A) - 1),
        "square": lambda: SampledDensity("square", lambda t: t * t, A, True, A**3 / 3),
        "one_plus_t": lambda: SampledDensity("one_plus_t", lambda t: 1 + t, A, True, A + A**2 / 2),
        "cube": lambda: SampledDensity("cube", lambda t: t**3, A, True, A**4 / 4),
        "hat": lambda: SampledDensity("hat", lambda t: 1 - abs(t - 1), 2, False, 1, kinks=(1,)),
    }


DENSITY_NAMES = ("identity", "exp", "square", "one_plus_t", "cube", "hat")


def get_density(name: str, A=1) -> SampledDensity:
    """A registered density on ``(0, A)``.

    ``hat`` is the tent ``1 - |t|`` on ``[-1, 1]`` shifted to ``[0, 2]``, its ``A`` is fixed.
    """
    try:
        return _registry(A)[name]()
    except KeyError:
        raise UsageError(f"unknown density {name!r}, choose from {', '.join(DENSITY_NAMES)}") from None


def random_increasing_step(rng: np.random.Generator, pieces: int, denominator: int = 997) -> StepFunction:
    """A random increasing step function on ``[0, 1]`` with breakpoints ``k/denominator``."""
    cuts = sorted(rng.choice(np.arange(1, denominator), size=pieces - 1, replace=False))
    steps = rng.integers(1, 20, size=pieces)
    values = tuple(Fraction(int(s), 4) for s in np.cumsum(steps))
    breakpoints = (Fraction(0),) + tuple(Fraction(int(c), denominator) for c in cuts) + (Fraction(1),)
    return StepFunction(breakpoints, values)


# ANGLES #

_ANGLE = re.compile(r"^\s*(?:(\d+)\s*\*?\s*)?pi\s*(?:/\s*(\d+))?\s*$")


def as_angle(alpha) -> mpmath.mpf:
    """Angle in ``[0, pi)`` at working precision; strings like ``"pi/2"`` are exact multiples of pi."""
    if isinstance(alpha, str):
        match = _ANGLE.match(alpha)
        if match:
            k = int(match.group(1) or 1)
            m = int(match.group(2) or 1)
            value = k * mpmath.pi / m
        else:
            try:
                value = mpmath.mpf(alpha)
            except ValueError:
                raise UsageError(f"cannot read angle {alpha!r}") from None
    else:
        value = mpmath.mpf(alpha)
    if not 0 <= value < mpmath.pi:
        raise UsageError(f"alpha must lie in [0, pi), got {alpha}")
    return value


# TRANSFORMS #


def _check_strip(z):
    if abs(mpmath.im(z)) > FT_STRIP:
        raise StripViolation(z, FT_STRIP)


def _step_transform(phi: StepFunction, z, ctx: PrecisionContext) -> QuadratureResult:
    """Closed form ``sum_j c_j (e^{iz t_{j+1}} - e^{iz t_j}) / (iz)``."""
    with ctx.workprec():
        z = mpmath.mpmathify(z)
        growth = mpmath.exp(abs(mpmath.im(z)) * to_mpf(phi.A))
        error = 8 * len(phi.values) * ctx.eps * to_mpf(phi.integrable_bound) * growth
        if z == 0:
            value = mpmath.mpc(to_mpf(phi.mass))
            return QuadratureResult(value, error, 1)
        # cancellation for small |z| is absorbed by guard bits
        guard = max(0, -mpmath.mag(z)) + 16
    with mpmath.workprec(ctx.bits + guard):
        points = [mpmath.expj(z * to_mpf(t)) for t in phi.breakpoints]
        total = mpmath.fsum(to_mpf(c) * (b - a) for c, a, b in zip(phi.values, points[:-1], points[1:]))
        value = total / (1j * z)
    with ctx.workprec():
        return QuadratureResult(+value, error, len(points))


def ft_eval(phi: Density, z, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QuadratureResult:
    """``f_A(z)``, complex, with an error bound.

    :param phi: Step function (closed form) or sampled density (adaptive quadrature).
    :param z: Argument with ``|Im z| <= 8``.
    :param ctx: Precision context.

    :raises StripViolation: ``|Im z| > 8``.
    """
    _check_strip(z)
    if isinstance(phi, StepFunction):
        return _step_transform(phi, z, ctx)
    with ctx.workprec():
        z = mpmath.mpmathify(z)
        width = 4 / max(1, abs(z))
        return integrate(lambda t: phi(t) * mpmath.expj(z * t), 0, phi.A, ctx=ctx, points=phi.kinks, panel_width=width)


def w_eval(phi: Density, alpha, z, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QuadratureResult:
    """``W_{A,alpha}(z) = int_0^A phi(t) sin(zt + alpha) dt`` for real z.

    ``alpha = pi/2`` gives ``C_A``, ``alpha = 0`` gives ``S_A``.
    """
    if mpmath.im(mpmath.mpmathify(z)) != 0:
        raise ValueError("w_eval takes real arguments")
    with ctx.workprec():
        angle = as_angle(alpha)
        value, error = ft_eval(phi, mpmath.re(z), ctx)
        return QuadratureResult(mpmath.im(mpmath.expj(angle) * value), error, 1)


class FourierRule:
    """``f_A`` on a region ``|Re z| <= z_max``, ``|Im z| <= y_max``, for many evaluations.

    Step functions use the closed form. Sampled densities are tabulated once on
    Gauss-Legendre panels; the rule error is estimated against the next degree at
    sample points on the region boundary.
    """

    def __init__(self, phi: Density, z_max, ctx: PrecisionContext = DEFAULT_CONTEXT, y_max=0):
        if y_max > FT_STRIP:
            raise StripViolation(complex(0, y_max), FT_STRIP)
        self.phi = phi
        self.ctx = ctx
        self.z_max = abs(float(z_max))
        self.y_max = abs(float(y_max))
        self.closed = isinstance(phi, StepFunction)
        if self.closed:
            self.error = _step_transform(phi, complex(0, -self.y_max), ctx).error_bound
            return
        A = float(phi.A)
        panels = max(1, int(math.ceil((self.z_max + self.y_max) * A / RULE_PHASE)))
        if phi.kinks:
            panels = 2 * panels
        rule = FixedPanelRule(0, phi.A, panels, RULE_DEGREE, ctx)
        refined = rule.refined()
        self.nodes, self.weights = rule.nodes, rule.tabulate(phi)
        fine_weights = refined.tabulate(phi)
        with ctx.workprec():
            samples = [
                mpmath.mpc(self.z_max * j / 4, -self.y_max * k) for j in range(5) for k in (0, 1)
            ]
            self.error = 2 * max(
                abs(self._sum(self.nodes, self.weights, z) - self._sum(refined.nodes, fine_weights, z))
                for z in samples
            )
            mass = mpmath.fsum(abs(w) for w in self.weights)
            self.error += 8 * len(self.nodes) * ctx.eps * mass * mpmath.exp(self.y_max * A)
        logger.debug("Fourier rule with %d nodes for %s, error %s", len(self.nodes), phi.name, mpmath.nstr(self.error, 3))

    @staticmethod
    def _sum(nodes, weights, z):
        return mpmath.fsum(w * mpmath.expj(z * t) for t, w in zip(nodes, weights))

    def f(self, z) -> mpmath.mpc:
        if self.closed:
            return _step_transform(self.phi, z, self.ctx).value
        with self.ctx.workprec():
            return self._sum(self.nodes, self.weights, mpmath.mpmathify(z))

    def w(self, alpha, x) -> mpmath.mpf:
        with self.ctx.workprec():
            return mpmath.im(mpmath.expj(alpha) * self.f(x))


# EXCEPTIONAL STEP FUNCTIONS #


def exceptional_test(phi: StepFunction) -> bool:
    """True iff every interior breakpoint (relative to A) is rational.

    Breakpoints are stored as rationals, so the answer is decided by the proxy
    flags: a proxy for an irrational breakpoint makes the function non-exceptional.
    """
    if not phi.increasing:
        raise ValueError("exceptional step functions have 0 < c_0 < ... < c_n")
    if phi.proxies:
        logger.warning(
            "breakpoints %s are rational proxies of irrational numbers, treated as irrational",
            sorted(phi.proxies),
        )
        return False
    return True


def exceptional_period(phi: StepFunction) -> Optional[int]:
    """The least q with ``q t_j / A`` integral; f then vanishes at ``2 pi q k / A``, k != 0.

    None for non-exceptional functions.
    """
    if not exceptional_test(phi):
        return None
    return math.lcm(*(int((t / phi.A).denominator) for t in phi.breakpoints))


def exceptional_zeros(phi: StepFunction, hi) -> List[mpmath.mpf]:
    """The real zeros ``2 pi q k / A`` in ``(0, hi]`` of an exceptional step function."""
    q = exceptional_period(phi)
    if q is None:
        return []
    spacing = 2 * mpmath.pi * q / to_mpf(phi.A)
    return [k * spacing for k in range(1, int(mpmath.floor(mpmath.mpf(hi) / spacing)) + 1)]


# REAL ZEROS #


@dataclass
class ZeroCensus:
    """Zeros of ``C_A`` on a window, with ``|S_A|`` at each; common zeros are real zeros of f."""

    c_zeros: List[ZeroRecord]
    s_values: List[mpmath.mpf]
    threshold: mpmath.mpf

    @property
    def real_zeros(self) -> List[mpmath.mpf]:
        return [z.location for z, s in zip(self.c_zeros, self.s_values) if s <= self.threshold]

    @property
    def min_gap(self) -> Optional[mpmath.mpf]:
        """Smallest ``max(|C|, |S|)`` over the located zeros of C, i.e. the smallest ``|S|``."""
        return min(self.s_values) if self.s_values else None

    def rows(self) -> List[Dict]:
        return [
            {"x": z.location, "x_err": z.bracket_width, "abs_s": s, "real_zero": s <= self.threshold}
            for z, s in zip(self.c_zeros, self.s_values)
        ]


def real_zero_census(phi: Density, lo, hi, ctx: PrecisionContext = DEFAULT_CONTEXT, scan_step=None) -> ZeroCensus:
    """Real zeros of ``f_A`` on ``[lo, hi]``.

    The zeros of ``C_A`` are isolated by sign changes; a real zero of f is one at
    which ``|S_A|`` is at the noise level ``2^{-bits/2}`` times the size of f.
    """
    A = float(phi.A)
    step = scan_step or default_scan_step(A)

    def c_at(c):
        rule = FourierRule(phi, max(abs(lo), abs(hi)), c)
        return lambda x: mpmath.re(rule.f(x))

    rule = FourierRule(phi, max(abs(lo), abs(hi)), ctx)
    zeros = isolate_zeros(lambda x: mpmath.re(rule.f(x)), lo, hi, step, ctx, f_at=c_at)
    with ctx.workprec():
        s_values = [abs(mpmath.im(rule.f(z.location))) for z in zeros]
        scale = to_mpf(phi.integrable_bound)
        threshold = mpmath.ldexp(1, -ctx.bits // 2) * scale + rule.error
    census = ZeroCensus(zeros, s_values, threshold)
    logger.info("%d zeros of C on [%s, %s], %d real zeros of f", len(zeros), lo, hi, len(census.real_zeros))
    return census


# AMBIENT INTERVALS #


@dataclass(frozen=True)
class AmbientInterval:
    """``I_p = (((p-1) pi - alpha)/A, (p pi - alpha)/A)`` with the zero it holds."""

    p: int
    lo: mpmath.mpf
    hi: mpmath.mpf
    zero: ZeroRecord

    def row(self) -> Dict:
        return {
            "p": self.p,
            "lo": self.lo,
            "hi": self.hi,
            "zero": self.zero.location,
            "zero_err": self.zero.bracket_width,
            "derivative": self.zero.derivative_magnitude,
            "simple": self.zero.simple,
        }


@dataclass
class AmbientReport:
    """Per-interval census of the zeros of ``W_{A,alpha}`` on ``(0, ((K+1) pi - alpha)/A]``."""

    alpha: mpmath.mpf
    A: mpmath.mpf
    K: int
    intervals: List[AmbientInterval] = field(default_factory=list)
    endpoint_values: List[Tuple[int, mpmath.mpf, mpmath.mpf]] = field(default_factory=list)
    origin: Optional[ZeroRecord] = None

    def rows(self) -> List[Dict]:
        rows = []
        if self.origin is not None:
            rows.append({"p": 0, "lo": 0, "hi": 0, "zero": self.origin.location, "zero_err": self.origin.bracket_width,
                         "derivative": self.origin.derivative_magnitude, "simple": self.origin.simple})
        rows.extend(i.row() for i in self.intervals)
        return rows


def ambient_report(phi: Density, alpha, K: int, ctx: PrecisionContext = DEFAULT_CONTEXT) -> AmbientReport:
    """Check that each ambient interval ``I_p``, ``p = 2..K+1``, holds exactly one simple zero.

    Also checks the endpoint sign pattern ``(-1)^k W((k pi - alpha)/A) <= 0`` for
    ``k >= 1`` and that ``I_1`` holds no zero; for ``alpha = 0`` the simple zero at
    the origin is reported separately.

    :param phi: Positive increasing density.
    :param alpha: Angle in ``[0, pi)``.
    :param K: Number of ambient intervals past ``I_1``.

    :raises StructureViolation: Some interval fails, with the offending interval.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    increasing = phi.increasing if isinstance(phi, StepFunction) else phi.monotone_increasing
    if not increasing:
        raise UsageError("ambient intervals need a positive increasing density")
    with ctx.workprec():
        angle = as_angle(alpha)
        A = to_mpf(phi.A)
        ends = [(k * mpmath.pi - angle) / A for k in range(K + 2)]
        hi = ends[-1]
    if isinstance(phi, StepFunction) and angle == 0:
        blocking = exceptional_zeros(phi, hi)
        if blocking:
            raise UsageError(f"exceptional step function has real zeros at {mpmath.nstr(blocking[0], 8)} inside the window")

    def w_at(c):
        rule = FourierRule(phi, float(hi), c)
        return lambda x: rule.w(angle, x)

    rule = FourierRule(phi, float(hi), ctx)
    report = AmbientReport(angle, A, K)
    with ctx.workprec():
        for k in range(1, K + 2):
            value = rule.w(angle, ends[k])
            report.endpoint_values.append((k, value, rule.error))
            if (-1) ** k * value > rule.error:
                raise StructureViolation(f"sign pattern fails at endpoint k = {k}", (ends[k - 1], ends[k]))

    zeros = isolate_zeros(lambda x: rule.w(angle, x), 0, hi, default_scan_step(float(A)), ctx, f_at=w_at)
    buckets: Dict[int, List[ZeroRecord]] = {p: [] for p in range(2, K + 2)}
    for zero in zeros:
        x = zero.location
        if not zero.simple:
            raise StructureViolation(f"zero at {mpmath.nstr(x, 12)} is not simple")
        if angle == 0 and abs(x) <= zero.bracket_width + mpmath.mpf(ctx.abs_tol):
            report.origin = zero
            continue
        for p in range(1, K + 2):
            lo_p, hi_p = ends[p - 1], ends[p]
            if lo_p + zero.bracket_width < x < hi_p - zero.bracket_width:
                if p == 1:
                    raise StructureViolation(f"zero at {mpmath.nstr(x, 12)} in I_1", (lo_p, hi_p))
                buckets[p].append(zero)
                break
        else:
            raise StructureViolation(f"zero at {mpmath.nstr(x, 12)} on an interval endpoint")
    for p, found in buckets.items():
        if len(found) != 1:
            raise StructureViolation(f"I_{p} holds {len(found)} zeros", (ends[p - 1], ends[p]))
        report.intervals.append(AmbientInterval(p, ends[p - 1], ends[p], found[0]))
    if angle == 0 and report.origin is None:
        raise StructureViolation("S_A has no simple zero at the origin")
    logger.info("ambient structure holds for K = %d, alpha = %s", K, mpmath.nstr(angle, 6))
    return report


# HALF-PLANE COUNTS #


@dataclass(frozen=True)
class Rectangle:
    """Closed rectangle strictly below the real axis."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi < 0):
            raise UsageError(f"need x_lo < x_hi and y_lo < y_hi < 0, got {self}")
        if -self.y_lo > FT_STRIP:
            raise StripViolation(complex(0, self.y_lo), FT_STRIP)

    def shrunk(self, amount) -> "Rectangle":
        return Rectangle(self.x_lo + amount, self.x_hi - amount, self.y_lo + amount, self.y_hi - amount)

    def corners(self) -> List[mpmath.mpc]:
        """Counterclockwise from the lower left corner."""
        return [
            mpmath.mpc(self.x_lo, self.y_lo),
            mpmath.mpc(self.x_hi, self.y_lo),
            mpmath.mpc(self.x_hi, self.y_hi),
            mpmath.mpc(self.x_lo, self.y_hi),
        ]


def _winding(f, rect: Rectangle, floor, A) -> mpmath.mpf:
    """Total change of ``arg f`` around the rectangle, in steps below pi/2."""

    def value(z):
        fz = f(z)
        if abs(fz) <= floor:
            raise BoundaryZeroSuspected(z, fz)
        return fz

    total = mpmath.mpf(0)
    corners = rect.corners()
    for start, end in zip(corners, corners[1:] + corners[:1]):
        pieces = max(8, int(math.ceil(float(abs(end - start)) * float(A) * 2)))
        points = [start + (end - start) * k / pieces for k in range(pieces + 1)]
        values = [value(z) for z in points]
        stack = [(points[k], values[k], points[k + 1], values[k + 1], 0) for k in reversed(range(pieces))]
        while stack:
            z0, f0, z1, f1, depth = stack.pop()
            zm = (z0 + z1) / 2
            fm = value(zm)
            step = mpmath.arg(f1 / f0)
            halves = mpmath.arg(fm / f0) + mpmath.arg(f1 / fm)
            if abs(step) < mpmath.pi / 2 and abs(halves - step) < 1e-6:
                total += step
                continue
            if depth == MAX_CONTOUR_DEPTH:
                raise BoundaryZeroSuspected(zm, fm)
            stack.append((zm, fm, z1, f1, depth + 1))
            stack.append((z0, f0, zm, fm, depth + 1))
    return total


def half_plane_count(phi: Density, rectangle: Rectangle, ctx: PrecisionContext = DEFAULT_CONTEXT) -> int:
    """Number of zeros of ``f_A`` inside a rectangle below the real axis, by the argument principle.

    If ``|f|`` is at the noise level on the contour the rectangle is shrunk once
    by a thousandth of its smaller side.

    :raises BoundaryZeroSuspected: The contour still passes through a (numerical) zero.
    """
    z_max = max(abs(rectangle.x_lo), abs(rectangle.x_hi))
    rule = FourierRule(phi, z_max, ctx, y_max=-rectangle.y_lo)
    with ctx.workprec():
        floor = 4 * rule.error + mpmath.mpf(ctx.abs_tol)
        try:
            total = _winding(rule.f, rectangle, floor, phi.A)
        except BoundaryZeroSuspected as exc:
            side = min(rectangle.x_hi - rectangle.x_lo, rectangle.y_hi - rectangle.y_lo)
            logger.warning("small |f| on the contour at %s, shrinking the rectangle", mpmath.nstr(exc.point, 8))
            total = _winding(rule.f, rectangle.shrunk(CONTOUR_SHRINK * side), floor, phi.A)
        winding = total / (2 * mpmath.pi)
        count = int(mpmath.nint(winding))
        if abs(winding - count) > 0.25:
            raise NoConvergence(f"winding number {winding} is not near an integer")
    logger.info("%d zeros in %s", count, rectangle)
    return count


# HERMITE-BIEHLER #


@dataclass(frozen=True)
class HermiteBiehlerResult:
    """Interlacing of the zeros of P and Q and the sign of their Wronskian.

    Unpacks as ``interlaced, wronskian_sign_ok``.
    """

    interlaced: bool
    wronskian_sign_ok: bool
    wronskian: Fraction
    x0: Fraction
    half_plane: str

    def __iter__(self):
        yield self.interlaced
        yield self.wronskian_sign_ok


def _real_simple(p: RealPolynomial) -> bool:
    return sturm_count(p) == p.degree


def _isolating_intervals(p: sympy.Poly, other: RealPolynomial) -> List[Tuple[Fraction, Fraction]]:
    """Disjoint rational intervals, one per real zero of p, free of zeros of ``other``."""
    out = []
    for (a, b), _ in p.intervals():
        while a != b and (other(to_fraction(a)) == 0 or sturm_count(other, to_fraction(a), to_fraction(b)) > 0):
            a, b = p.refine_root(a, b, eps=(b - a) / 4)
        out.append((to_fraction(a), to_fraction(b)))
    return out


def _interlaced(P: RealPolynomial, Q: RealPolynomial) -> bool:
    if abs(P.degree - Q.degree) > 1:
        return False
    intervals = _isolating_intervals(P.to_sympy(), Q)
    between = [sturm_count(Q, b, a) for (_, b), (a, _) in zip(intervals[:-1], intervals[1:])]
    if any(count != 1 for count in between):
        return False
    before = sturm_count(Q, -math.inf, intervals[0][0])
    after = sturm_count(Q, intervals[-1][1], math.inf)
    return before <= 1 and after <= 1


def hermite_biehler_check(P: RealPolynomial, Q: RealPolynomial, half_plane: str = "lower") -> HermiteBiehlerResult:
    """Interlacing of the real simple zeros of P and Q, and the Wronskian sign.

    ``F = P + iQ`` has all zeros in the open ``half_plane`` iff the zeros interlace
    and ``Q P' - P Q' > 0`` (lower) or ``P Q' - Q P' > 0`` (upper) at some real x0.
    The sign is evaluated exactly at the first of 0, 1, -1, 2, -2, ... where it is nonzero.

    :raises CommonZero: P and Q share a zero.
    """
    if P.degree < 1 or Q.degree < 1:
        raise ValueError("P and Q must be nonconstant")
    if half_plane not in ("lower", "upper"):
        raise ValueError("half_plane is 'lower' or 'upper'")
    P, Q = P.to_exact(), Q.to_exact()
    if sympy.resultant(P.to_sympy(), Q.to_sympy()) == 0:
        raise CommonZero(f"{P} and {Q} have a common zero")
    interlaced = _real_simple(P) and _real_simple(Q) and _interlaced(P, Q)
    dP, dQ = P.derivative(), Q.derivative()
    for k in range(0, 64):
        x0 = Fraction((k + 1) // 2 * (-1) ** (k + 1))
        wronskian = Q(x0) * dP(x0) - P(x0) * dQ(x0)
        if wronskian != 0:
            break
    sign_ok = wronskian > 0 if half_plane == "lower" else wronskian < 0
    return HermiteBiehlerResult(interlaced, bool(sign_ok), wronskian, x0, half_plane)


# THE PHI_ALPHA FAMILY #


def phi_alpha_eval(alpha, z, ctx: PrecisionContext = DEFAULT_CONTEXT) -> QuadratureResult:
    """``Phi_alpha(z) = int_0^inf exp(-t^alpha) cos(zt) dt`` for ``alpha > 1`` and real z."""
    with ctx.workprec():
        alpha = mpmath.mpf(alpha)
        if not alpha > 1:
            raise UsageError(f"alpha must exceed 1, got {alpha}")
        z = mpmath.mpf(z)

        def tail(T):
            return mpmath.exp(-(T**alpha)) if T >= 1 else mpmath.inf

        width = 2 / max(1, abs(z))
        return integrate(lambda t: mpmath.exp(-(t**alpha)) * mpmath.cos(z * t), 0, mpmath.inf, tail, ctx, panel_width=width)


def phi_alpha_limit(alpha) -> mpmath.mpf:
    """``lim x^{alpha+1} Phi_alpha(x) = Gamma(alpha + 1) sin(pi alpha / 2)``."""
    alpha = mpmath.mpf(alpha)
    return mpmath.gamma(alpha + 1) * mpmath.sin(mpmath.pi * alpha / 2)


@dataclass(frozen=True)
class AsymptoticPoint:
    x: mpmath.mpf
    scaled: mpmath.mpf
    scaled_error: mpmath.mpf
    limit: mpmath.mpf

    @property
    def deviation(self) -> mpmath.mpf:
        return self.scaled - self.limit

    @property
    def relative_deviation(self) -> mpmath.mpf:
        return abs(self.deviation / self.limit) if self.limit else mpmath.inf

    def row(self) -> Dict:
        return {
            "x": self.x,
            "scaled": (self.scaled, self.scaled_error),
            "limit": self.limit,
            "deviation": (self.deviation, self.scaled_error),
            "rel_deviation": self.relative_deviation,
        }


def asymptotic_check(alpha, x_list: Iterable, ctx: PrecisionContext = DEFAULT_CONTEXT) -> List[AsymptoticPoint]:
    """``x^{alpha+1} Phi_alpha(x)`` against its limit at each x."""
    out = []
    for x in x_list:
        value, error = phi_alpha_eval(alpha, x, ctx)
        with ctx.workprec():
            factor = mpmath.mpf(x) ** (mpmath.mpf(alpha) + 1)
            out.append(AsymptoticPoint(mpmath.mpf(x), factor * value, factor * error, phi_alpha_limit(alpha)))
    return out


def phi_alpha_zeros(alpha, lo, hi, ctx: PrecisionContext = DEFAULT_CONTEXT, scan_step=0.125) -> List[ZeroRecord]:
    """Real zeros of ``Phi_alpha`` on ``[lo, hi]``."""
    return isolate_zeros(
        lambda x: phi_alpha_eval(alpha, x, ctx).value,
        lo,
        hi,
        scan_step,
        ctx,
        f_at=lambda c: (lambda x: phi_alpha_eval(alpha, x, c).value),
    )


# ZERO SUMS #


@dataclass(frozen=True)
class ZeroFamily:
    """Zeros ``zero(k)`` for ``k = start, start + 1, ...`` with nondecreasing moduli."""

    name: str
    zero: Callable[[int], complex]
    start: int = 1

    def upto(self, R) -> Iterable:
        k = self.start
        while True:
            z = self.zero(k)
            if abs(z) > R:
                return
            yield z
            k += 1


def specimen_families() -> List[ZeroFamily]:
    """Zeros of ``(e^{iz} - 1)(e^{-iz} + i)/(iz)``.

    The first factor vanishes at ``+-2 pi k``, the second at ``(-1)^k (2k+1) pi/2``.
    """
    return [
        ZeroFamily("periodic", lambda k: 2 * k * mpmath.pi),
        ZeroFamily("periodic_negative", lambda k: -2 * k * mpmath.pi),
        ZeroFamily("alternating", lambda k: (-1) ** k * (2 * k + 1) * mpmath.pi / 2, start=0),
    ]


def specimen_log_derivative(ctx: PrecisionContext = DEFAULT_CONTEXT) -> mpmath.mpc:
    """``f'(0)/f(0)`` of the specimen from its Taylor coefficients.

    ``(e^{iz} - 1)/(iz) = sum (iz)^n/(n+1)!`` has value 1 and slope ``i/2`` at 0;
    ``e^{-iz} + i`` has value ``1 + i`` and slope ``-i``.
    """
    with ctx.workprec():
        g0, g1 = mpmath.mpc(1), mpmath.mpc(0, 1) / 2
        h0, h1 = mpmath.mpc(1, 1), mpmath.mpc(0, -1)
        return g1 / g0 + h1 / h0


@dataclass(frozen=True)
class ZeroSum:
    R: mpmath.mpf
    partial: mpmath.mpf
    count: int

    def row(self) -> Dict:
        return {"r": self.R, "partial": self.partial, "count": self.count}


def bernstein_zero_sum(
    families: Sequence[ZeroFamily], R_list: Iterable, ctx: PrecisionContext = DEFAULT_CONTEXT
) -> List[ZeroSum]:
    """Partial sums of ``cos(theta_n)/r_n = Re(1/z_n)`` over the zeros with ``|z_n| <= R``."""
    out = []
    with ctx.workprec():
        for R in R_list:
            R = mpmath.mpf(R)
            terms = [mpmath.re(1 / mpmath.mpmathify(z)) for family in families for z in family.upto(R)]
            out.append(ZeroSum(R, mpmath.fsum(terms), len(terms)))
    return out

"""Acceptance checks run by ``xizero selftest``.

Each check returns a short detail string or raises; random instances come from
fixed seeds so a run is reproducible.
"""

from dataclasses import dataclass
from fractions import Fraction
import logging
from typing import Callable, Dict, List, Optional, Sequence

import mpmath
import numpy as np

from data_models import CoeffSequence, RealPolynomial
from errors import CheckFailed, UsageError, XiZeroError
import ftzeros
import lp
import moments
from numerics import PrecisionContext, integrate, sum_with_tail
import phi
import xi

logger = logging.getLogger(__name__)

SEED = 20240229
HANKEL_TOLERANCE = 1e-9
ZERO_TOLERANCE = 1e-10
ZERO_COUNT_65 = 4
SUM_RULE_WINDOW = 160
SUM_RULE_N = 20
HEAT_HERMITE_MAX = 10
HERMITE_SCALE = Fraction(3, 2)
LP_FIXTURE_N = 8
POULAIN_INSTANCES = 500
STURM_INSTANCES = 200
JENSEN_INSTANCES = 100
AMBIENT_K = 8
ASYMPTOTIC_SLACK = 0.05
EULER_MACLAURIN_TERMS = 6
SPECIMEN = RealPolynomial((0, 130, 35, 5, -5, 1))


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise CheckFailed(message)


# CHECKS #


def check_constant(ctx: PrecisionContext) -> str:
    table = moments.moment_table(2, ctx)
    value, error = moments.hankel_constant(table, ctx)
    with ctx.workprec():
        deviation = abs(value - moments.HANKEL_CONSTANT)
        _require(
            deviation <= HANKEL_TOLERANCE * moments.HANKEL_CONSTANT + error,
            f"b_1^2 - b_0 b_2/3 = {mpmath.nstr(value, 12)}, expected {moments.HANKEL_CONSTANT}",
        )
    return f"b_1^2 - b_0 b_2/3 = {mpmath.nstr(value, 12)}"


def check_turan(ctx: PrecisionContext) -> str:
    table = moments.moment_table(11, ctx)
    seq = CoeffSequence(tuple(table.c(k) for k in range(12)), rel_error=table.rel_error())
    for n in range(1, 11):
        r = moments.turan_delta(n, ctx, table)
        _require(r.delta > r.delta_error, f"Delta_{n} = {r.delta} not above its error {r.delta_error}")
        _require(r.strict > r.strict_error, f"strict form at n = {n} is {r.strict}, error {r.strict_error}")
        _require(moments.dnr(seq, n, 2, ctx) > 0, f"D({n}, 2) is not positive")
    return "n = 1..10"


def check_ledger(ctx: PrecisionContext) -> str:
    report = phi.phi_ledger(phi.default_ledger_grid(), ctx, strict=False)
    failures = report.failures()
    if failures:
        first = failures[0]
        raise CheckFailed(f"{len(failures)} ledger failures, first {first.name} at t = {mpmath.nstr(first.t, 4)}")
    return f"{len(report.checks)} inequalities"


def check_zeros(ctx: PrecisionContext) -> str:
    zeros = xi.positive_zeros(65, ctx)
    _require(len(zeros) == ZERO_COUNT_65, f"{len(zeros)} zeros below 65, expected {ZERO_COUNT_65}")
    with ctx.workprec():
        for n, record in enumerate(zeros, start=1):
            oracle = 2 * mpmath.im(mpmath.zetazero(n))
            _require(record.simple, f"zero {n} is not simple")
            _require(abs(record.location - oracle) < ZERO_TOLERANCE, f"x_{n} = {record.location}, oracle {oracle}")
    return ", ".join(mpmath.nstr(r.location, 10) for r in zeros)


def check_sum_rule(ctx: PrecisionContext) -> str:
    zeros = xi.positive_zeros(SUM_RULE_WINDOW, ctx, window=SUM_RULE_WINDOW)
    reports = [xi.sum_rule_report(n, ctx, zeros) for n in range(1, SUM_RULE_N + 1)]
    for before, after in zip(reports[:-1], reports[1:]):
        _require(after.partial > before.partial, f"partial sums do not increase at N = {after.n}")
    for report in reports:
        _require(report.gap > report.gap_error, f"gap {report.gap} at N = {report.n} not above its error")
    _require(reports[19].gap < reports[4].gap, "gap at N = 20 is not below the gap at N = 5")
    return f"gap(20) = {mpmath.nstr(reports[-1].gap, 8)}"


def _probabilists_hermite(n: int) -> List[int]:
    """Ascending coefficients of ``He_n``."""
    previous, current = [1], [0, 1]
    if n == 0:
        return previous
    for k in range(1, n):
        shifted = [0] + current
        lowered = [k * c for c in previous] + [0, 0]
        previous, current = current, [a - b for a, b in zip(shifted, lowered)]
    return current


def check_heat(ctx: PrecisionContext) -> str:
    rng = np.random.default_rng(SEED)
    for _ in range(20):
        p = RealPolynomial(tuple(Fraction(int(c)) for c in rng.integers(-9, 10, size=7)))
        a, b = (Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 6))) for _ in range(2))
        _require(xi.heat_poly(xi.heat_poly(p, a), b) == xi.heat_poly(p, a + b), f"semigroup law fails for {p}")

    A, lam = Fraction(3), Fraction(5, 7)
    shifted = xi.heat_poly(RealPolynomial((A * A, 0, 1)), lam)
    _require(shifted == RealPolynomial((A * A - 2 * lam, 0, 1)), f"heat flow of z^2 + 9 gave {shifted}")

    c = HERMITE_SCALE
    for n in range(HEAT_HERMITE_MAX + 1):
        left = xi.heat_poly(RealPolynomial.monomial(n), c * c / 2)
        right = RealPolynomial(tuple(h * c ** (n - k) for k, h in enumerate(_probabilists_hermite(n))))
        _require(left == right, f"Hermite identity fails at n = {n}")
    return "semigroup, quadratic and Hermite identities exact"


def _random_poly(rng: np.random.Generator, lo: int, hi: int, span: int = 9) -> RealPolynomial:
    degree = int(rng.integers(lo, hi + 1))
    coeffs = [int(c) for c in rng.integers(-span, span + 1, size=degree + 1)]
    coeffs[-1] = coeffs[-1] or 1
    return RealPolynomial(tuple(Fraction(c) for c in coeffs))


def _nonreal_count(p: RealPolynomial) -> int:
    return p.degree - lp.real_root_count(p) if p.degree >= 1 else 0


def check_lp(ctx: PrecisionContext) -> str:
    for name in ("alternating", "natural", "quadratic", "inverse_factorial"):
        passed, first = lp.multiplier_sequence_test(lp.named_sequence(name, LP_FIXTURE_N), LP_FIXTURE_N)
        _require(passed, f"sequence {name} fails at J_{first}")
    product = lp.named_sequence("inverse_factorial", LP_FIXTURE_N).times(lp.named_sequence("natural", LP_FIXTURE_N))
    _require(lp.multiplier_sequence_test(product, LP_FIXTURE_N)[0], "componentwise product fails")

    rng = np.random.default_rng(SEED)
    for _ in range(POULAIN_INSTANCES):
        roots = [int(r) for r in rng.integers(-5, 6, size=int(rng.integers(1, 4)))]
        a = RealPolynomial.from_roots(roots)
        p = _random_poly(rng, 2, 5)
        q = lp.hermite_poulain(a, p)
        _require(_nonreal_count(q) <= _nonreal_count(p), f"a(D) p has more nonreal zeros than p for a = {a}, p = {p}")

    for _ in range(STURM_INSTANCES):
        p = _random_poly(rng, 1, 6)
        bh = moments.borchardt_hermite(p)
        only_real = lp.has_only_real_zeros(p)
        _require(bh.all_real == only_real, f"Borchardt-Hermite and Sturm disagree on {p}")
        if only_real:
            _require(bh.distinct_count == lp.sturm_count(p), f"distinct zero counts disagree on {p}")

    for p in [SPECIMEN] + [_random_poly(rng, 3, 6) for _ in range(JENSEN_INSTANCES)]:
        report = lp.jensen_disks(p, ctx)
        _require(report.all_contained, f"critical point outside the Jensen disks of {p}")
    return (f"{POULAIN_INSTANCES} multiplier instances, {STURM_INSTANCES} reality tests, "
            f"{JENSEN_INSTANCES + 1} Jensen pictures")


def check_transforms(ctx: PrecisionContext) -> str:
    identity = ftzeros.get_density("identity")
    for alpha in ("pi/2", "0"):
        ftzeros.ambient_report(identity, alpha, AMBIENT_K, ctx)
    rng = np.random.default_rng(SEED)
    for _ in range(3):
        step = ftzeros.random_increasing_step(rng, pieces=4)
        for alpha in ("pi/2", "0"):
            ftzeros.ambient_report(step, alpha, AMBIENT_K, ctx)

    rect = ftzeros.Rectangle(-20, 20, -3, -0.1)
    generic = [
        ftzeros.StepFunction((Fraction(0), Fraction(1, 3), Fraction(7, 10), Fraction(1)), (1, 2, 4), frozenset({1})),
        ftzeros.StepFunction((Fraction(0), Fraction(1, 2), Fraction(1)), (1, 3), frozenset({1})),
    ]
    for step in generic:
        count = ftzeros.half_plane_count(step, rect, ctx)
        _require(count == 0, f"{count} zeros below the axis for {step.to_text()!r}")

    exceptional = ftzeros.StepFunction((Fraction(0), Fraction(1, 2), Fraction(1)), (1, 2))
    census = ftzeros.real_zero_census(exceptional, 1, 40, ctx)
    expected = ftzeros.exceptional_zeros(exceptional, 40)
    found = census.real_zeros
    _require(len(found) == len(expected), f"{len(found)} real zeros, expected {len(expected)}")
    with ctx.workprec():
        for x, target in zip(found, expected):
            _require(abs(x - target) < ZERO_TOLERANCE, f"real zero {x}, expected {target}")
    return f"ambient structure for K = {AMBIENT_K}, exceptional zeros at 4 pi k"


def check_asymptotics(ctx: PrecisionContext) -> str:
    points = ftzeros.asymptotic_check(3, [50, 100], ctx)
    for point in points:
        _require(point.relative_deviation < ASYMPTOTIC_SLACK,
                 f"x^4 Phi_3(x) = {mpmath.nstr(point.scaled, 8)} at x = {point.x}")
    for z in (0, 1, 2):
        value, error = ftzeros.phi_alpha_eval(2, z, ctx)
        with ctx.workprec():
            closed = mpmath.sqrt(mpmath.pi) / 2 * mpmath.exp(-mpmath.mpf(z) ** 2 / 4)
            _require(abs(value - closed) <= error + ctx.tolerance(closed), f"Phi_2({z}) = {value}, expected {closed}")
    return ", ".join(f"x = {mpmath.nstr(p.x, 4)}: {mpmath.nstr(p.scaled, 6)}" for p in points)


def _cosine_tail(T, terms: int):
    """``int_T^inf cos(2x)/x^2 dx`` after ``terms`` integrations by parts, with a bound on the rest."""
    s, c = mpmath.sin(2 * T), mpmath.cos(2 * T)
    value = mpmath.mpf(0)
    factor = mpmath.mpf(1)
    p = 2
    for k in range(terms):
        if k % 2 == 0:
            value += factor * -s / (2 * T**p)
            factor *= mpmath.mpf(p) / 2
        else:
            value += factor * c / (2 * T**p)
            factor *= -mpmath.mpf(p) / 2
        p += 1
    return value, abs(factor) * T ** (1 - p) / (p - 1)


def _tail_terms(T) -> int:
    return max(1, min(400, int(2 * T) - 2))


def sinc_square_integral(ctx: PrecisionContext):
    """``int_R sin^2(x)/x^2 dx``, expected to be pi."""

    def estimate(T):
        value, _ = _cosine_tail(T, _tail_terms(T))
        return 1 / (2 * T) - value / 2

    def bound(T):
        return _cosine_tail(T, _tail_terms(T))[1] / 2

    value, error = integrate(lambda x: mpmath.sinc(x) ** 2, 0, mpmath.inf, bound, ctx, panel_width=2,
                             tail_estimate=estimate)
    with ctx.workprec():
        return 2 * value, 2 * error


def _odd_square_tail(N):
    """Euler-Maclaurin value of ``sum_{k > N} (2k+1)^{-2}`` and a bound on its remainder."""
    u = mpmath.mpf(2 * N + 3)
    value = 1 / (2 * u) + 1 / (2 * u**2)
    for j in range(1, EULER_MACLAURIN_TERMS + 1):
        value += mpmath.bernoulli(2 * j) * 2 ** (2 * j - 1) / u ** (2 * j + 1)
    m = EULER_MACLAURIN_TERMS + 1
    return value, 2 * abs(mpmath.bernoulli(2 * m)) * 2 ** (2 * m - 1) / u ** (2 * m + 1)


def odd_square_sum(ctx: PrecisionContext):
    """``sum over all integers k of (2k+1)^{-2}``, expected to be pi^2/4."""
    value, error = sum_with_tail(
        lambda k: 1 / mpmath.mpf(2 * k + 1) ** 2,
        lambda N: _odd_square_tail(N)[1],
        ctx,
        start=0,
        tail_estimate=lambda N: _odd_square_tail(N)[0],
    )
    with ctx.workprec():
        return 2 * value, 2 * error


def check_quadrature(ctx: PrecisionContext) -> str:
    value, error = sinc_square_integral(ctx)
    with ctx.workprec():
        _require(abs(value - mpmath.pi) <= error + ctx.tolerance(mpmath.pi), f"int sinc^2 = {value}")
    total, total_error = odd_square_sum(ctx)
    with ctx.workprec():
        normalized = 4 * total / mpmath.pi**2
        _require(abs(normalized - 1) <= 4 * total_error / mpmath.pi**2 + ctx.tolerance(1),
                 f"4/pi^2 sum (2k+1)^-2 = {normalized}")
    return f"deviations {mpmath.nstr(abs(value - mpmath.pi), 3)}, {mpmath.nstr(abs(normalized - 1), 3)}"


CHECKS: Dict[str, Callable[[PrecisionContext], str]] = {
    "constant": check_constant,
    "turan": check_turan,
    "ledger": check_ledger,
    "zeros": check_zeros,
    "sum_rule": check_sum_rule,
    "heat": check_heat,
    "lp": check_lp,
    "transforms": check_transforms,
    "asymptotics": check_asymptotics,
    "quadrature": check_quadrature,
}


# RUNNER #


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    error: Optional[BaseException] = None

    def row(self) -> Dict:
        return {"check": self.name, "passed": self.passed, "detail": self.detail}


def run_checks(ctx: PrecisionContext, only: Optional[Sequence[str]] = None) -> List[CheckResult]:
    """Run the named checks, all of them by default, in a fixed order.

    :raises UsageError: Unknown check name.
    """
    names = list(CHECKS) if not only else list(only)
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise UsageError(f"unknown checks {', '.join(unknown)}, choose from {', '.join(CHECKS)}")
    results = []
    for name in names:
        logger.info("running check %s", name)
        try:
            results.append(CheckResult(name, True, CHECKS[name](ctx)))
        except (XiZeroError, ValueError, ArithmeticError) as err:
            logger.error("check %s failed: %s", name, err)
            results.append(CheckResult(name, False, str(err), err))
    return results

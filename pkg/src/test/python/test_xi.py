"""Tests for the cosine transform, its zeros, the sum rule and the heat flow."""

from fractions import Fraction
import random

import mpmath
import pytest

from data_models import RealPolynomial
from errors import InsufficientData, StripViolation
from numerics import PrecisionContext
import xi


def zeta_ordinate(n):
    with mpmath.workdps(30):
        return mpmath.im(mpmath.zetazero(n))


def probabilists_hermite(n):
    """``He_n`` from ``He_{k+1} = z He_k - k He_{k-1}``."""
    z = RealPolynomial((0, 1))
    previous, current = RealPolynomial((1,)), z
    if n == 0:
        return previous
    for k in range(1, n):
        previous, current = current, z * current - previous * k
    return current


# EVALUATION #


def test_value_at_origin_is_b0(ctx, table):
    result = xi.xi_hat(0, ctx=ctx)
    with ctx.workprec():
        assert result.value > 0
        assert abs(result.value - table.b(0)) < 1e-14 * table.b(0)


def test_even(ctx):
    left, right = xi.xi_hat(-1.7, ctx=ctx), xi.xi_hat(1.7, ctx=ctx)
    with ctx.workprec():
        assert abs(left.value - right.value) <= left.error_bound + right.error_bound


def test_matches_riemann_xi(ctx):
    z = mpmath.mpf(12)
    with mpmath.workdps(30):
        s = mpmath.mpf(1) / 2 + 1j * z / 2
        oracle = (s * (s - 1) / 2 * mpmath.pi ** (-s / 2) * mpmath.gamma(s / 2) * mpmath.zeta(s)).real / 8
    result = xi.xi_hat(z, ctx=ctx)
    assert abs(result.value - oracle) < 1e-15 * abs(oracle) + result.error_bound


@pytest.mark.parametrize("z", [0, 5, 15, 28])
def test_methods_agree(ctx, z):
    series, integral = xi.xi_cross_check(z, ctx)
    assert series.error_bound < 1e-10 and integral.error_bound < 1e-10


def test_complex_argument(ctx):
    series, integral = xi.xi_cross_check(mpmath.mpc(3, 0.5), ctx)
    assert isinstance(series.value, mpmath.mpc)


def test_strip_violation(ctx):
    with pytest.raises(StripViolation):
        xi.xi_hat(mpmath.mpc(0, 1.5), ctx=ctx)
    with pytest.raises(ValueError):
        xi.XiEvalRequest(1, method="taylor")


@pytest.mark.parametrize("z", [0, 12, 40])
def test_integral_bound_covers_finer_evaluation(ctx, z):
    fine_ctx = PrecisionContext(bits=2 * ctx.bits, rel_tol=1e-40, abs_tol=1e-45)
    coarse = xi.xi_hat(z, method="integral", ctx=ctx)
    fine = xi.xi_hat(z, method="integral", ctx=fine_ctx)
    with fine_ctx.workprec():
        assert abs(coarse.value - fine.value) <= coarse.error_bound + fine.error_bound


def test_heat_bound_covers_finer_evaluation(ctx):
    fine_ctx = PrecisionContext(bits=2 * ctx.bits, rel_tol=1e-40, abs_tol=1e-45)
    coarse, fine = xi.xi_heat(6, 0.25, ctx), xi.xi_heat(6, 0.25, fine_ctx)
    with fine_ctx.workprec():
        assert abs(coarse.value - fine.value) <= coarse.error_bound + fine.error_bound


def test_sign_change_near_first_zero(ctx):
    x1 = 2 * zeta_ordinate(1)
    below, above = xi.xi_hat(x1 - 0.05, ctx=ctx), xi.xi_hat(x1 + 0.05, ctx=ctx)
    assert below.value * above.value < 0


def test_transform_matches_pointwise(ctx):
    transform = xi.XiTransform(20, ctx)
    for x in (0, 7, 20):
        fixed = transform.evaluate(x)
        pointwise = xi.xi_hat(x, ctx=ctx)
        with ctx.workprec():
            assert abs(fixed.value - pointwise.value) <= fixed.error_bound + pointwise.error_bound
    with pytest.raises(ValueError):
        transform.evaluate(21)


# ZEROS #


def test_no_zero_below_twenty(ctx):
    assert xi.positive_zeros(20, ctx) == []


@pytest.mark.parametrize("X, count", [(30, 1), (55, 3), (62, 3), (65, 4)])
def test_zero_counts(xi_zeros, X, count):
    assert len([r for r in xi_zeros if r.location <= X]) == count


def test_zeros_match_zeta_ordinates(ctx):
    zeros = xi.positive_zeros(65, ctx)
    assert len(zeros) == 4
    for n, record in enumerate(zeros, start=1):
        assert record.simple
        assert abs(record.location - 2 * zeta_ordinate(n)) < 1e-10
    locations = [r.location for r in zeros]
    assert locations == sorted(locations)


def test_window_is_enforced(ctx):
    with pytest.raises(ValueError):
        xi.positive_zeros(250, ctx)
    with pytest.raises(ValueError):
        xi.positive_zeros(0, ctx)


def test_spacing_monitor(xi_zeros):
    assert xi.zero_spacing_warnings(xi_zeros) == []
    close = xi.zero_spacing_warnings(xi_zeros[:2], min_gap=100)
    assert len(close) == 1


# SUM RULE #


def test_sum_rule_gap_shrinks(ctx, table, xi_zeros):
    first = xi.sum_rule_report(1, ctx, zeros=xi_zeros)
    five = xi.sum_rule_report(5, ctx, zeros=xi_zeros)
    ten = xi.sum_rule_report(10, ctx, zeros=xi_zeros)
    assert first.gap > first.gap_error
    assert ten.gap < five.gap < first.gap
    with ctx.workprec():
        expected = table.b(1) / (2 * table.b(0))
        assert abs(ten.target - expected) < 1e-14 * expected


def test_sum_rule_needs_zeros(ctx, xi_zeros):
    with pytest.raises(InsufficientData):
        xi.sum_rule_report(len(xi_zeros) + 1, ctx, zeros=xi_zeros)
    with pytest.raises(ValueError):
        xi.sum_rule_report(0, ctx, zeros=xi_zeros)


# HEAT FLOW #


def test_heat_at_zero_parameter(ctx):
    heat = xi.xi_heat(5, 0, ctx)
    direct = xi.xi_hat(10, ctx=ctx)
    with ctx.workprec():
        assert abs(heat.value - 8 * direct.value) <= heat.error_bound + 8 * direct.error_bound


def test_heat_increases_value_at_origin(ctx):
    cold, warm = xi.xi_heat(0, 0, ctx), xi.xi_heat(0, 0.1, ctx)
    assert warm.value - cold.value > warm.error_bound + cold.error_bound


def test_heat_parameter_limit(ctx):
    with pytest.raises(ValueError):
        xi.xi_heat(1, 2, ctx)
    with pytest.raises(StripViolation):
        xi.xi_heat(mpmath.mpc(1, 2), 0, ctx)


def test_heat_flow_keeps_real_zeros(ctx):
    cold, _ = xi.heat_zero_count(0, 0, 40, ctx)
    warm, records = xi.heat_zero_count(0.125, 0, 40, ctx)
    assert cold == 6
    assert warm >= cold
    assert all(r.simple for r in records)


def test_heat_poly_shifts_constant():
    A, lam = Fraction(3), Fraction(5, 7)
    result = xi.heat_poly(RealPolynomial((A * A, 0, 1)), lam)
    assert result == RealPolynomial((A * A - 2 * lam, 0, 1))


def test_heat_poly_constant_unchanged():
    assert xi.heat_poly(RealPolynomial((Fraction(4, 3),)), 7) == RealPolynomial((Fraction(4, 3),))


@pytest.mark.parametrize("n", range(11))
def test_heat_poly_gives_hermite(n):
    c = 2
    result = xi.heat_poly(RealPolynomial.monomial(n), Fraction(c * c, 2))
    he = probabilists_hermite(n)
    expected = RealPolynomial(tuple(coeff * c ** (n - k) for k, coeff in enumerate(he.coeffs)))
    assert result == expected


def test_heat_poly_semigroup():
    rng = random.Random(7)
    for _ in range(10):
        p = RealPolynomial(tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(rng.randint(2, 8))))
        mu, nu = Fraction(rng.randint(-5, 5), 3), Fraction(rng.randint(-5, 5), 4)
        assert xi.heat_poly(xi.heat_poly(p, mu), nu) == xi.heat_poly(p, mu + nu)


def test_heat_poly_floating():
    result = xi.heat_poly(RealPolynomial((1, 0, 1)), 0.25)
    assert abs(result.coeffs[0] - 0.5) < 1e-20

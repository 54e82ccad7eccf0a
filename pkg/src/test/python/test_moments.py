"""Tests for the moments, Turan differences and determinant criteria."""

from fractions import Fraction
import random

import mpmath
import pytest

from data_models import CoeffSequence, RealPolynomial
from errors import InsufficientData, ZeroLeadingCoefficient
import moments
from numerics import PrecisionContext


def big_xi(t):
    """Riemann's Xi on the real line from mpmath's zeta."""
    s = mpmath.mpf(1) / 2 + 1j * t
    return (s * (s - 1) / 2 * mpmath.pi ** (-s / 2) * mpmath.gamma(s / 2) * mpmath.zeta(s)).real


@pytest.fixture(scope="module")
def loose_ctx():
    """Wide determinant gate for floating moment data."""
    return PrecisionContext(bits=80, rel_tol=1e-8, abs_tol=1e-18, max_escalations=1)


# MOMENTS #


def test_b0_matches_xi_at_center(ctx, table):
    single = moments.b_moment(0, ctx)
    with mpmath.workprec(100):
        oracle = big_xi(0) / 8
        assert abs(table.b(0) - oracle) <= table.b_error(0)
        assert abs(single.value - oracle) <= single.error_bound
    assert abs(float(table.b(0)) - 0.0621400972) < 1e-9


def test_b1_matches_second_derivative(table):
    with mpmath.workdps(40):
        oracle = -mpmath.diff(big_xi, 0, 2) / 32
        assert abs(table.b(1) - oracle) <= table.b_error(1) + 1e-25 * oracle


@pytest.mark.slow
def test_table_bounds_cover_finer_table(table):
    fine = moments.moment_table(4, PrecisionContext(bits=200, rel_tol=1e-45, abs_tol=1e-50, max_escalations=0))
    with mpmath.workprec(200):
        for k in range(5):
            assert abs(table.b(k) - fine.b(k)) <= table.b_error(k) + fine.b_error(k)


def test_fixed_rule_agrees_with_adaptive(ctx, table):
    for k in (0, 3, 7):
        single = moments.b_moment(k, ctx)
        with ctx.workprec():
            assert abs(single.value - table.b(k)) <= single.error_bound + table.b_error(k)
            assert single.error_bound < 1e-12 * single.value


def test_hankel_constant(ctx, table):
    value, error = moments.hankel_constant(table, ctx)
    assert abs(value / moments.HANKEL_CONSTANT - 1) < 1e-8
    assert error < 1e-10 * value


def test_taylor_coefficients(table):
    assert table.c(0) == table.b(0)
    with mpmath.workprec(table.bits):
        assert abs(table.c(1) - table.b(1) / 2) < 1e-20
    assert table.c(5) > 0
    assert all(table.b(k) > 0 for k in range(table.kmax + 1))


def test_c_coeff_scales_moment(ctx, table):
    c2 = moments.c_coeff(2, ctx)
    with ctx.workprec():
        assert abs(c2.value - table.b(2) / 24) <= c2.error_bound + 1e-12 * c2.value
        assert abs(c2.value - table.c(2)) <= 1e-12 * c2.value


def test_table_bounds(table, ctx):
    with pytest.raises(InsufficientData):
        table.b(table.kmax + 1)
    with pytest.raises(ValueError):
        moments.MomentTable.build(moments.MAX_MOMENT_INDEX + 1, ctx)
    rows = table.rows()
    assert [row["k"] for row in rows] == list(range(table.kmax + 1))


# TURAN #


@pytest.mark.parametrize("n", range(1, 11))
def test_turan_differences(ctx, table, n):
    result = moments.turan_delta(n, ctx, table)
    assert result.delta > result.delta_error
    assert result.strict > -result.strict_error


def test_turan_needs_positive_index(ctx, table):
    with pytest.raises(ValueError):
        moments.turan_delta(0, ctx, table)


def test_c_sequence_second_minors(table, loose_ctx):
    seq = CoeffSequence(tuple(table.c(k) for k in range(12)), rel_error=table.rel_error())
    assert moments.dnr(seq, 3, 2, loose_ctx) > 0
    report = moments.total_positivity_scan(seq, 6, 2, loose_ctx)
    assert report.all_positive
    assert report.min_margin > 0


# TOEPLITZ MINORS #


def test_first_order_minor_is_entry():
    seq = CoeffSequence((3, 5, Fraction(7, 2), 1))
    assert [moments.dnr(seq, n, 1) for n in range(4)] == [3, 5, Fraction(7, 2), 1]


def test_second_order_minor_at_origin():
    seq = CoeffSequence((3, 5, 2))
    assert moments.dnr(seq, 0, 2) == 9


def test_inverse_factorial_minor():
    assert moments.dnr(CoeffSequence.inverse_factorials(5), 1, 2) == Fraction(1, 2)


def test_minor_out_of_range():
    with pytest.raises(InsufficientData):
        moments.dnr(CoeffSequence((1, 2, 3)), 2, 2)
    with pytest.raises(ValueError):
        moments.dnr(CoeffSequence((1, 2, 3)), 0, 0)


def test_binomials_totally_positive():
    report = moments.total_positivity_scan(CoeffSequence.binomial(8), 4, 4)
    assert report.all_positive
    assert len(report.minors) == 5 * 4
    assert all(isinstance(v, Fraction) for _, _, v in report.minors)


def test_interior_zero_is_a_violation():
    seq = CoeffSequence((1, 1, 0, 1, 1, 1, 1))
    report = moments.total_positivity_scan(seq, 3, 2)
    assert not report.all_positive
    assert (2, 1, 0) in report.violations


def test_scan_needs_leading_coefficient():
    with pytest.raises(ZeroLeadingCoefficient):
        moments.total_positivity_scan(CoeffSequence((0, 1, 2)), 1, 1)


# POWER SUMS AND HANKEL FORMS #


def test_power_sums_simple_zero():
    assert moments.power_sums(CoeffSequence((1, -1)), 1) == [1]


def test_power_sums_double_zero():
    assert moments.power_sums(CoeffSequence((1, -2, 1)), 2) == [2, 2]


def test_power_sums_need_leading_coefficient():
    with pytest.raises(ZeroLeadingCoefficient):
        moments.power_sums(CoeffSequence((0, 1)), 1)


def test_power_sums_match_reciprocal_zeros():
    rng = random.Random(20240229)
    for _ in range(20):
        zeros = [Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 5)) for _ in range(rng.randint(1, 4))]
        poly = RealPolynomial((1,))
        for lam in zeros:
            poly = poly * RealPolynomial((1, -1 / lam))
        m = 5
        coeffs = tuple(poly.coeffs) + (0,) * (m + 1 - len(poly.coeffs))
        sums = moments.power_sums(CoeffSequence(coeffs), m)
        assert sums == [sum(lam ** (-k) for lam in zeros) for k in range(1, m + 1)]


def test_xi_power_sum_two(table):
    data = moments.xi_taylor_data(table, 6)
    assert data[1] == 0 and data[3] == 0
    s = moments.power_sums(data, 6)
    with mpmath.workprec(table.bits):
        assert abs(s[1] - (-2 * data[2] / data[0])) < 1e-20
        assert abs(s[0]) < 1e-30


def test_hankel_first_minor_is_s2():
    c = CoeffSequence((1, Fraction(-3, 2), Fraction(1, 2), 0, 0))
    s = moments.power_sums(c, 4)
    assert s[1] == c[1] ** 2 - 2 * c[2]
    result = moments.hankel_positive(s[1:], 0)
    assert result.minors == (s[1],)


def test_hankel_two_real_zeros():
    c = CoeffSequence((1, Fraction(-3, 2), Fraction(1, 2), 0, 0))
    s = moments.power_sums(c, 4)
    assert s == [1 + Fraction(1, 2**k) for k in range(1, 5)]
    result = moments.hankel_positive(s[1:], 1)
    assert result.all_positive
    assert result.minors[1] == s[1] * s[3] - s[2] ** 2


def test_hankel_on_xi_data(table, loose_ctx):
    data = moments.xi_taylor_data(table, 4)
    s = moments.power_sums(data, 4)
    result = moments.hankel_positive(s[1:], 1, loose_ctx, rel_error=5 * table.rel_error())
    assert result.all_positive


def test_hankel_needs_entries():
    with pytest.raises(InsufficientData):
        moments.hankel_positive([1, 2], 1)


@pytest.mark.parametrize(
    "coeffs, last_minor, all_real, distinct",
    [
        ((-1, 0, 1), 4, True, 2),
        ((1, 0, 1), -4, False, 2),
        ((1, -2, 1), 0, True, 1),
    ],
)
def test_borchardt_hermite(coeffs, last_minor, all_real, distinct):
    result = moments.borchardt_hermite(RealPolynomial(coeffs))
    assert result.minors == (2, last_minor)
    assert result.all_real is all_real
    assert result.distinct_count == distinct


def test_borchardt_hermite_rejects_constants():
    with pytest.raises(ValueError):
        moments.borchardt_hermite(RealPolynomial((3,)))

"""Tests for finite Fourier transforms, their real and nonreal zeros and the alpha family."""

from fractions import Fraction

import mpmath
import numpy as np
import pytest

from data_models import RealPolynomial, to_mpf
from errors import CommonZero, StripViolation, StructureViolation, UsageError
import ftzeros
from ftzeros import Rectangle, StepFunction

CONSTANT = StepFunction((0, 1), (1,))
HALVES = StepFunction((0, Fraction(1, 2), 1), (1, 2))
PROXY = StepFunction((0, Fraction(7071, 10000), 1), (1, 2), proxies={1})
FALLING = StepFunction((0, Fraction(1, 2), 1), (2, 1))


def near_zero(result, ctx):
    return abs(result.value) <= result.error_bound + ctx.tolerance(1)


# DENSITIES #


def test_step_function_basics():
    assert HALVES.A == 1
    assert HALVES.increasing and not FALLING.increasing
    assert HALVES.mass == Fraction(3, 2)
    assert HALVES(Fraction(1, 4)) == 1 and HALVES(Fraction(3, 4)) == 2
    assert HALVES.kinks == (Fraction(1, 2),)


@pytest.mark.parametrize(
    "breakpoints, values, proxies",
    [
        ((0,), (), ()),
        ((1, 2), (1,), ()),
        ((0, 1, 1), (1, 2), ()),
        ((0, 1), (1, 2), ()),
        ((0, 1), (1,), (1,)),
    ],
)
def test_step_function_rejects(breakpoints, values, proxies):
    with pytest.raises(ValueError):
        StepFunction(breakpoints, values, proxies)


def test_fixture_text():
    text = "# proxy for 1/sqrt(2)\nA=1\n0/1 1\n7071/10000 2 irrational\n"
    step = StepFunction.parse(text)
    assert step == PROXY
    assert StepFunction.parse(step.to_text()) == step


@pytest.mark.parametrize("text", ["0 1\n1/2 2\n", "A=1\n0 1 rational\n", "A=1\n0 x\n", "A=1\n1/2 1\n"])
def test_fixture_text_errors(text):
    with pytest.raises(UsageError):
        StepFunction.parse(text)


def test_registered_densities():
    assert ftzeros.get_density("exp", 2).A == 2
    assert ftzeros.get_density("hat", 5).A == 2
    with pytest.raises(UsageError):
        ftzeros.get_density("gauss")


def test_monotone_gate():
    with pytest.raises(ValueError):
        ftzeros.SampledDensity("falling", lambda t: 1 - t, 1, True, 1)


def test_random_step_is_increasing():
    step = ftzeros.random_increasing_step(np.random.default_rng(3), 5)
    assert step.increasing and step.A == 1 and len(step.values) == 5


def test_angles():
    assert ftzeros.as_angle("pi/2") == mpmath.pi / 2
    assert ftzeros.as_angle("0") == 0
    assert ftzeros.as_angle(1) == 1
    for bad in ("pi", "4", "half"):
        with pytest.raises(UsageError):
            ftzeros.as_angle(bad)


# TRANSFORMS #


def test_constant_density(ctx):
    assert near_zero(ftzeros.ft_eval(CONSTANT, 2 * mpmath.pi, ctx), ctx)
    assert ftzeros.ft_eval(CONSTANT, 0, ctx).value == 1
    z = mpmath.mpf("0.7")
    with ctx.workprec():
        expected = (mpmath.expj(z) - 1) / (1j * z)
        assert abs(ftzeros.ft_eval(CONSTANT, z, ctx).value - expected) < 1e-20


def test_hat_density(ctx):
    hat = ftzeros.get_density("hat")
    result = ftzeros.ft_eval(hat, 1, ctx)
    with ctx.workprec():
        expected = mpmath.expj(1) * 4 * mpmath.sin(mpmath.mpf(1) / 2) ** 2
        assert abs(result.value - expected) <= result.error_bound + 1e-14
    assert near_zero(ftzeros.ft_eval(hat, 2 * mpmath.pi, ctx), ctx)


def test_identity_sine_part(ctx):
    result = ftzeros.ft_eval(ftzeros.get_density("identity"), 1, ctx)
    with ctx.workprec():
        one = mpmath.mpf(1)
        expected = mpmath.cos(one) * (mpmath.tan(one) - one)
        assert abs(mpmath.im(result.value) - expected) <= result.error_bound + 1e-14


def test_closed_form_matches_quadrature(ctx):
    sampled = ftzeros.SampledDensity("halves", lambda t: to_mpf(HALVES(t)), 1, False, 2, kinks=(0.5,))
    rng = np.random.default_rng(20)
    for x, y in zip(rng.uniform(-30, 30, 20), rng.uniform(-2, 2, 20)):
        z = mpmath.mpc(x, y)
        closed = ftzeros.ft_eval(HALVES, z, ctx)
        quadrature = ftzeros.ft_eval(sampled, z, ctx)
        with ctx.workprec():
            assert abs(closed.value - quadrature.value) <= closed.error_bound + quadrature.error_bound


def test_transform_strip(ctx):
    with pytest.raises(StripViolation):
        ftzeros.ft_eval(CONSTANT, mpmath.mpc(0, 9), ctx)


def test_cosine_part(ctx):
    at_pi = ftzeros.w_eval(CONSTANT, "pi/2", mpmath.pi, ctx)
    assert near_zero(at_pi, ctx)
    at_one = ftzeros.w_eval(CONSTANT, "pi/2", 1, ctx)
    assert abs(at_one.value - mpmath.sin(1)) < 1e-15


def test_sine_part_vanishes_at_origin(ctx):
    for phi in (HALVES, ftzeros.get_density("exp")):
        assert abs(ftzeros.w_eval(phi, 0, 0, ctx).value) < 1e-20
    with pytest.raises(ValueError):
        ftzeros.w_eval(CONSTANT, 0, mpmath.mpc(1, 1), ctx)


def test_fourier_rule_matches_pointwise(ctx):
    exp = ftzeros.get_density("exp")
    rule = ftzeros.FourierRule(exp, 20, ctx, y_max=2)
    for z in (mpmath.mpc(3, 0), mpmath.mpc(-11, -1.5), mpmath.mpc(19, -2)):
        direct = ftzeros.ft_eval(exp, z, ctx)
        with ctx.workprec():
            assert abs(rule.f(z) - direct.value) <= rule.error + direct.error_bound


# EXCEPTIONAL STEP FUNCTIONS #


def test_exceptional_test():
    assert ftzeros.exceptional_test(HALVES)
    assert not ftzeros.exceptional_test(PROXY)
    with pytest.raises(ValueError):
        ftzeros.exceptional_test(FALLING)


def test_exceptional_zeros(ctx):
    assert ftzeros.exceptional_period(HALVES) == 2
    assert ftzeros.exceptional_period(PROXY) is None
    zeros = ftzeros.exceptional_zeros(HALVES, 40)
    assert len(zeros) == 3
    for x in zeros:
        assert near_zero(ftzeros.ft_eval(HALVES, x, ctx), ctx)
    assert not near_zero(ftzeros.ft_eval(HALVES, 2 * mpmath.pi, ctx), ctx)


def test_census_of_exceptional_step(ctx):
    census = ftzeros.real_zero_census(HALVES, 1, 40, ctx)
    expected = ftzeros.exceptional_zeros(HALVES, 40)
    assert len(census.real_zeros) == len(expected)
    for found, exact in zip(census.real_zeros, expected):
        assert abs(found - exact) < 1e-12


def test_census_of_irrational_proxy(ctx):
    census = ftzeros.real_zero_census(PROXY, 1, 40, ctx)
    assert census.c_zeros
    assert census.real_zeros == []
    assert census.min_gap > census.threshold


# AMBIENT INTERVALS #


def test_cosine_intervals_of_identity(ctx):
    report = ftzeros.ambient_report(ftzeros.get_density("identity"), "pi/2", 6, ctx)
    assert [i.p for i in report.intervals] == list(range(2, 8))
    first = report.intervals[0]
    with ctx.workprec():
        assert abs(first.lo - mpmath.pi / 2) < 1e-20 and abs(first.hi - 3 * mpmath.pi / 2) < 1e-20
    assert all(i.lo < i.zero.location < i.hi and i.zero.simple for i in report.intervals)
    assert report.origin is None


def test_sine_intervals_of_identity(ctx):
    report = ftzeros.ambient_report(ftzeros.get_density("identity"), 0, 6, ctx)
    assert report.origin is not None
    first = report.intervals[0].zero.location
    assert mpmath.pi < first < 2 * mpmath.pi


def test_intervals_of_exponential(ctx):
    report = ftzeros.ambient_report(ftzeros.get_density("exp"), "pi/2", 4, ctx)
    assert len(report.intervals) == 4
    assert len(report.rows()) == 4


def test_intervals_of_random_steps(ctx):
    rng = np.random.default_rng(8)
    for _ in range(3):
        step = ftzeros.random_increasing_step(rng, 4)
        for alpha in ("pi/2", 0):
            report = ftzeros.ambient_report(step, alpha, 8, ctx)
            assert len(report.intervals) == 8


def test_ambient_report_needs_increasing(ctx):
    with pytest.raises(UsageError):
        ftzeros.ambient_report(FALLING, "pi/2", 4, ctx)
    with pytest.raises(UsageError):
        ftzeros.ambient_report(HALVES, 0, 4, ctx)
    with pytest.raises(ValueError):
        ftzeros.ambient_report(HALVES, "pi/2", 0, ctx)


def test_ambient_report_flags_broken_structure(ctx, monkeypatch):
    monkeypatch.setattr(ftzeros.FourierRule, "w", lambda self, alpha, x: mpmath.mpf(1))
    with pytest.raises(StructureViolation):
        ftzeros.ambient_report(ftzeros.get_density("identity"), "pi/2", 2, ctx)


# HALF-PLANE COUNTS #


def test_exponential_has_no_zeros_below(ctx):
    assert ftzeros.half_plane_count(ftzeros.get_density("exp"), Rectangle(-20, 20, -3, -0.1), ctx) == 0


def test_contour_near_a_real_zero(ctx):
    rect = Rectangle(2 * float(mpmath.pi) - 0.5, 2 * float(mpmath.pi) + 0.5, -0.3, -0.05)
    assert ftzeros.half_plane_count(CONSTANT, rect, ctx) == 0


def test_non_exceptional_step_has_no_zeros_below(ctx):
    assert ftzeros.half_plane_count(PROXY, Rectangle(-20, 20, -3, -0.1), ctx) == 0


def test_falling_step_has_zeros_below(ctx):
    # (e^{iz} + e^{iz/2} - 2)/(iz) vanishes at (2k + 1) 2 pi - 2i log 2
    assert ftzeros.half_plane_count(FALLING, Rectangle(-20, 20, -3, -0.5), ctx) == 4


def test_rectangle_must_lie_below_axis():
    with pytest.raises(UsageError):
        Rectangle(-1, 1, -1, 0.5)
    with pytest.raises(StripViolation):
        Rectangle(-1, 1, -10, -1)


# HERMITE-BIEHLER #


def test_interlaced_pair():
    interlaced, _ = ftzeros.hermite_biehler_check(RealPolynomial((-1, 0, 1)), RealPolynomial((0, 1)))
    assert interlaced


def test_nested_pair():
    interlaced, _ = ftzeros.hermite_biehler_check(RealPolynomial((-1, 0, 1)), RealPolynomial((-4, 0, 1)))
    assert not interlaced


def test_lower_half_plane_product():
    # (z + 2i)(z + i) = z^2 - 2 + 3iz
    result = ftzeros.hermite_biehler_check(RealPolynomial((-2, 0, 1)), RealPolynomial((0, 3)))
    assert result.interlaced and result.wronskian_sign_ok
    assert result.x0 == 0 and result.wronskian == 6
    assert not ftzeros.hermite_biehler_check(RealPolynomial((-2, 0, 1)), RealPolynomial((0, 3)), "upper").wronskian_sign_ok


def test_wronskian_tries_one_before_minus_one():
    # W = 2x^3 - 6x vanishes at 0, W(1) = -4, W(-1) = 4
    result = ftzeros.hermite_biehler_check(RealPolynomial((0, 0, -3, 1)), RealPolynomial((1, 1)))
    assert result.x0 == 1 and result.wronskian == -4
    assert not result.wronskian_sign_ok


def test_common_zero():
    with pytest.raises(CommonZero):
        ftzeros.hermite_biehler_check(RealPolynomial((-1, 0, 1)), RealPolynomial((-1, 1)))
    with pytest.raises(ValueError):
        ftzeros.hermite_biehler_check(RealPolynomial((1,)), RealPolynomial((-1, 1)))


# THE PHI_ALPHA FAMILY #


def test_gaussian_member(ctx):
    result = ftzeros.phi_alpha_eval(2, 1, ctx)
    with ctx.workprec():
        expected = mpmath.sqrt(mpmath.pi) / 2 * mpmath.exp(mpmath.mpf(-1) / 4)
        assert abs(result.value - expected) <= result.error_bound + ctx.tolerance(expected)


def test_asymptotic_law(ctx):
    assert abs(ftzeros.phi_alpha_limit(3) + 6) < 1e-12
    points = ftzeros.asymptotic_check(3, [50, 100], ctx)
    assert all(p.relative_deviation < 0.05 for p in points)
    assert points[1].relative_deviation < points[0].relative_deviation


def test_quartic_member_has_real_zero(ctx):
    zeros = ftzeros.phi_alpha_zeros(4, 1, 6, ctx)
    assert zeros and all(1 < z.location < 6 for z in zeros)


def test_alpha_must_exceed_one(ctx):
    with pytest.raises(UsageError):
        ftzeros.phi_alpha_eval(1, 0, ctx)


# ZERO SUMS #


def test_specimen_zero_sum(ctx):
    sums = ftzeros.bernstein_zero_sum(ftzeros.specimen_families(), [10 * mpmath.pi, 100 * mpmath.pi], ctx)
    assert abs(sums[1].partial - 0.5) < 0.02
    assert abs(sums[1].partial - 0.5) < abs(sums[0].partial - 0.5)
    assert sums[1].count > sums[0].count


def test_symmetric_family_cancels(ctx):
    family = [ftzeros.ZeroFamily("plus", lambda k: k), ftzeros.ZeroFamily("minus", lambda k: -k)]
    (total,) = ftzeros.bernstein_zero_sum(family, [50], ctx)
    assert abs(total.partial) < 1e-12 and total.count == 100


def test_specimen_log_derivative(ctx):
    assert abs(-mpmath.re(ftzeros.specimen_log_derivative(ctx)) - 0.5) < 1e-20

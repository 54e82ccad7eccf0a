"""Tests for the kernel, its derivatives, windows and the bound ledger."""

import mpmath
import pytest

from errors import InequalityViolated, TailNotDecaying
from numerics import PrecisionContext
import phi


def brute_force_phi(t, terms=30, bits=240):
    with mpmath.workprec(bits):
        t = mpmath.mpf(t)
        total = mpmath.mpf(0)
        for n in range(1, terms + 1):
            total += (2 * mpmath.pi**2 * n**4 * mpmath.exp(9 * t) - 3 * mpmath.pi * n**2 * mpmath.exp(5 * t)) * mpmath.exp(
                -mpmath.pi * n**2 * mpmath.exp(4 * t)
            )
        return total


@pytest.mark.parametrize("t", [0, 0.25, 1, 2])
def test_phi_matches_brute_force(ctx, t):
    result = phi.phi_eval(t, 0, ctx)
    oracle = brute_force_phi(t)
    with ctx.workprec():
        assert abs(result.value - oracle) <= result.error_bound + ctx.tolerance(oracle)
    assert result.terms_used >= 2
    assert result.tail_bound <= result.error_bound


@pytest.mark.parametrize("t", [k / 10 for k in range(1, 16)])
def test_phi_is_even(ctx, t):
    left, right = phi.phi_eval(-t, 0, ctx), phi.phi_eval(t, 0, ctx)
    with ctx.workprec():
        assert abs(left.value - right.value) <= left.error_bound + right.error_bound


@pytest.mark.parametrize("order", [0, 1, 2])
@pytest.mark.parametrize("t", [0, 0.25, 0.5, 0.75, 1, 1.5, 2, -0.3])
def test_error_bound_covers_finer_evaluation(ctx, t, order):
    fine_ctx = PrecisionContext(bits=2 * ctx.bits, rel_tol=1e-40, abs_tol=1e-45)
    coarse, fine = phi.phi_eval(t, order, ctx), phi.phi_eval(t, order, fine_ctx)
    with fine_ctx.workprec():
        assert abs(coarse.value - fine.value) <= coarse.error_bound + fine.error_bound
        assert coarse.error_bound <= 2 * ctx.tolerance(coarse.value)


def test_error_bound_includes_term_rounding(ctx):
    result = phi.phi_eval(2, 0, ctx)
    assert result.error_bound > 1000 * result.tail_bound


def test_derivative_matches_difference_quotient(full_ctx):
    ctx = full_ctx
    h = mpmath.mpf("1e-8")
    with ctx.workprec():
        t = mpmath.mpf("0.3")
        slope = (phi.phi_eval(t + h, 0, ctx).value - phi.phi_eval(t - h, 0, ctx).value) / (2 * h)
        d1 = phi.phi_eval(t, 1, ctx).value
        assert abs(slope - d1) < 1e-9 * abs(d1)


@pytest.mark.parametrize("order", [0, 1])
def test_difference_quotient_is_second_order(full_ctx, order):
    ctx = full_ctx
    with ctx.workprec():
        t = mpmath.mpf("0.3")
        exact = phi.phi_eval(t, order + 1, ctx).value

        def defect(h):
            slope = (phi.phi_eval(t + h, order, ctx).value - phi.phi_eval(t - h, order, ctx).value) / (2 * h)
            return abs(slope - exact)

        h = mpmath.mpf("1e-3")
        assert mpmath.log(defect(h) / defect(h / 2), 2) >= 1.9


def test_derivative_vanishes_at_origin(ctx):
    assert abs(phi.phi_eval(0, 1, ctx).value) < 1e-12
    assert phi.phi_eval(0, 2, ctx).value < 0


def test_phi_positive_and_decreasing(ctx):
    values = [phi.phi_eval(t, 0, ctx).value for t in (0, 0.25, 0.5, 1, 1.5)]
    assert all(v > 0 for v in values)
    assert all(b < a for a, b in zip(values[:-1], values[1:]))


def test_first_term_plus_remainder(ctx):
    t = 0.2
    with ctx.workprec():
        total = phi.first_term(t, 1) + phi.psi_eval(t, 1, ctx).value
        assert abs(total - phi.phi_eval(t, 1, ctx).value) < 1e-14 * abs(total)


def test_companion_kernel(ctx):
    with ctx.workprec():
        assert phi.phi38_eval(1, ctx).value == 2 * phi.phi_eval(0.5, 0, ctx).value


@pytest.mark.parametrize("t", [0, 0.5, 1, 2, 3])
def test_decay_ratio_bound(ctx, t):
    with ctx.workprec():
        assert phi.decay_ratio(t, ctx) <= 4 * mpmath.pi**2 * mpmath.mpf(203) / 202


def test_window_meets_envelope():
    T = phi.phi_window(power=4, log_tol=-70)
    assert T >= 1
    assert phi.phi_tail_envelope(T, 4) <= mpmath.exp(-70)
    assert phi.phi_tail_envelope(0) == mpmath.inf


def test_tail_bound_needs_two_terms():
    assert phi.kernel_tail_bound(0, 0, 1) == mpmath.inf
    assert phi.kernel_tail_bound(0, 0, 6) < mpmath.mpf("1e-40")


def test_bad_order_and_far_negative_argument(ctx):
    with pytest.raises(ValueError):
        phi.phi_eval(0, 3, ctx)
    with pytest.raises(TailNotDecaying):
        phi.phi_eval(-4, 0, ctx)


def test_ledger_at_origin(ctx):
    report = phi.phi_ledger([0], ctx)
    (ratio,) = report.by_name("ratio_decreasing")
    assert not ratio.applicable
    assert report.min_margin("log_concavity") > 0


def test_ledger_phi_over_first_term(ctx):
    report = phi.phi_ledger([0.5], ctx)
    assert report.min_margin("phi_over_a") > 0


@pytest.mark.slow
def test_ledger_on_default_grid(ctx):
    report = phi.phi_ledger(phi.default_ledger_grid(), ctx)
    assert report.passed
    assert {c.name for c in report.checks} == set(phi.LEDGER_CHECKS)
    assert len(report.rows()) == len(report.checks)
    assert report.min_margin("final_bound") > 0


def test_ledger_rejects_negative_points(ctx):
    with pytest.raises(ValueError):
        phi.phi_ledger([-0.25], ctx)


def test_strict_ledger_raises(ctx, monkeypatch):
    monkeypatch.setattr(phi, "FIRST_TERM_RATIO", mpmath.mpf("0.5"))
    with pytest.raises(InequalityViolated) as info:
        phi.phi_ledger([0.5], ctx)
    assert info.value.name == "phi_over_a"
    report = phi.phi_ledger([0.5], ctx, strict=False)
    assert [c.name for c in report.failures()] == ["phi_over_a"]


def test_default_grid():
    assert phi.default_ledger_grid() == [k * 0.25 for k in range(9)]


def test_sampler_tracks_worst_relative_error(ctx):
    sampler = phi.KernelSampler(ctx)
    values = [sampler(t) for t in (0, 0.5, 1.5)]
    assert sampler.calls == 3
    with ctx.workprec():
        assert values[1] == phi.phi_eval(0.5, 0, ctx).value
        worst = max(e.error_bound / e.value for e in (phi.phi_eval(t, 0, ctx) for t in (0, 0.5, 1.5)))
        assert sampler.worst == worst
        assert sampler.error(values[0]) >= worst * values[0]
    sampler.worst = mpmath.mpf(1)
    assert sampler.error(1) == mpmath.inf

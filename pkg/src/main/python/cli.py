"""Batch command line front end.

Every subcommand returns a list of flat records that are written to stdout as
JSON or CSV, optionally with samples of a curve for an SVG plot. Exit codes:
0 success, 1 usage error, 2 numeric failure, 3 violation of a proved statement.
"""

import argparse
from dataclasses import dataclass, field
from fractions import Fraction
import logging
from pathlib import Path
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO, Tuple

import mpmath

from config import RunConfig, resolve_config
from data_models import CoeffSequence, RealPolynomial, TaylorSeq, to_mpf
from errors import (
    InequalityViolated,
    MethodDisagreement,
    StructureViolation,
    UsageError,
    XiZeroError,
    exit_code_for,
)
from export import digits_for, emit_csv, emit_json, emit_plot
import ftzeros
import lp
import moments
from numerics import PrecisionContext
import phi
import selftest
import xi

logger = logging.getLogger(__name__)

PROG = "xizero"
PLOT_SAMPLES = 400
SPECIMEN_POLY = "0,130,35,5,-5,1"


class ArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as :class:`UsageError`."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage().rstrip()}")


@dataclass
class Outcome:
    """Records of one subcommand run.

    :param rows: Flat records for stdout.
    :param samples: ``(x, y)`` pairs for ``--plot``.
    :param labels: Axis titles of the plot.
    :param failure: Raised after the records are written.
    """

    rows: List[Dict[str, Any]]
    samples: List[Tuple[Any, Any]] = field(default_factory=list)
    labels: Tuple[str, str] = ("x", "y")
    failure: Optional[XiZeroError] = None


# ARGUMENT PARSING #


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot read number {text!r}") from None


def _fraction_list(text: str) -> List[Fraction]:
    items = [item for item in text.split(",") if item.strip()]
    if not items:
        raise UsageError("empty list")
    return [_fraction(item) for item in items]


def _grid(text: str) -> List[Fraction]:
    """``a:b:step`` as the exact points ``a, a + step, ... <= b``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must read 'start:stop:step', got {text!r}")
    start, stop, step = (_fraction(p) for p in parts)
    if step <= 0 or stop < start:
        raise UsageError(f"empty grid {text!r}")
    count = int((stop - start) / step)
    return [start + k * step for k in range(count + 1)]


def _points(args) -> List[Fraction]:
    if args.grid:
        return _grid(args.grid)
    return _fraction_list(args.t)


def _polynomial(text: str) -> RealPolynomial:
    """Ascending coefficients ``a_0,a_1,...``."""
    poly = RealPolynomial(tuple(_fraction_list(text)))
    if poly.degree < 1:
        raise UsageError(f"need a polynomial of degree at least 1, got {text!r}")
    return poly


def _density(args, ctx: PrecisionContext) -> ftzeros.Density:
    if args.fixture:
        try:
            text = Path(args.fixture).read_text()
        except OSError as err:
            raise UsageError(f"cannot read fixture {args.fixture}: {err.strerror}") from None
        return ftzeros.StepFunction.parse(text)
    with ctx.workprec():
        return ftzeros.get_density(args.density, to_mpf(_fraction(args.A)))


def _linspace(lo, hi, count: int = PLOT_SAMPLES) -> List[mpmath.mpf]:
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


# SUBCOMMANDS #


def run_phi(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    evaluations = []
    for t in _points(args):
        with ctx.workprec():
            t = to_mpf(t)
        evaluations.append(phi.phi_eval(t, args.order, ctx))
    samples = [(e.t, e.value) for e in evaluations]
    return Outcome([e.row() for e in evaluations], samples, ("t", f"Phi^({args.order})(t)"))


def run_phi_ledger(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    with ctx.workprec():
        grid = [to_mpf(t) for t in _grid(args.grid)]
    report = phi.phi_ledger(grid, ctx, strict=False)
    failure = None
    if report.failures():
        first = report.failures()[0]
        failure = InequalityViolated(first.name, mpmath.nstr(first.t, 6), mpmath.nstr(first.margin, 6))
    samples = []
    for t in grid:
        margins = [c.margin for c in report.checks if c.t == t and c.applicable]
        if margins:
            samples.append((t, min(margins)))
    return Outcome(report.rows(), samples, ("t", "smallest margin"), failure)


def run_moments(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    if not 0 <= args.kmax <= config.moment_kmax:
        raise UsageError(f"--kmax must lie in [0, {config.moment_kmax}]")
    table = moments.moment_table(args.kmax, ctx)
    rows = table.rows()
    if args.kmax >= 2:
        rows.append({"hankel_constant": moments.hankel_constant(table, ctx)})
    with ctx.workprec():
        samples = [(k, mpmath.log10(table.b(k))) for k in range(args.kmax + 1)]
    return Outcome(rows, samples, ("k", "log10 b_k"))


def run_turan(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    table = moments.moment_table(args.n + 1, ctx)
    results = [moments.turan_delta(n, ctx, table) for n in range(1, args.n + 1)]
    failure = None
    for r in results:
        if r.delta < -r.delta_error or r.strict < -r.strict_error:
            failure = InequalityViolated("turan", r.n, mpmath.nstr(min(r.delta, r.strict), 6))
            break
        if not (r.delta > r.delta_error and r.strict > r.strict_error):
            logger.warning("Turan margins at n = %d are within their error bounds", r.n)
    samples = [(r.n, r.strict) for r in results]
    return Outcome([r.row() for r in results], samples, ("n", "strict margin"), failure)


def _c_sequence(length: int, ctx: PrecisionContext) -> CoeffSequence:
    table = moments.moment_table(length, ctx)
    return CoeffSequence(tuple(table.c(k) for k in range(length + 1)), rel_error=table.rel_error())


def run_dnr(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    if args.sequence == "C":
        seq = _c_sequence(args.n + args.r - 1, ctx)
    else:
        seq = CoeffSequence(tuple(_fraction_list(args.sequence)))
    report = moments.total_positivity_scan(seq, args.n, args.r, ctx)
    failure = None
    if args.sequence == "C":
        proved = [(n, r, v) for n, r, v in report.violations if r <= 2]
        if proved:
            n, r, v = proved[0]
            failure = InequalityViolated(f"D(n, {r})", n, v)
    return Outcome(report.rows(), failure=failure)


def run_hankel(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    m = 2 + 2 * args.r
    if args.sequence == "xi":
        table = moments.moment_table(m // 2, ctx)
        data = moments.xi_taylor_data(table, m)
        rel_error = (m + 1) * data.rel_error
    else:
        data = CoeffSequence(tuple(_fraction_list(args.sequence)))
        rel_error = 0
    s = moments.power_sums(data, m)
    result = moments.hankel_positive(s[1:], args.r, ctx, rel_error=rel_error)
    failure = None
    if args.sequence == "xi" and not result.all_positive:
        r = next(k for k, v in enumerate(result.minors) if not v > 0)
        failure = InequalityViolated("hankel minor", r, result.minors[r])
    rows = [dict(row, s=s[row["r"] * 2 + 1]) for row in result.rows()]
    return Outcome(rows, failure=failure)


def _zero_row(n: int, record) -> Dict[str, Any]:
    return {
        "n": n,
        "x": (record.location, record.bracket_width),
        "derivative": record.derivative_magnitude,
        "simple": record.simple,
    }


def run_xi_zeros(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    X = to_mpf(_fraction(args.window))
    zeros = xi.positive_zeros(X, ctx, scan_step=config.scan_step_xi, window=config.xi_window)
    rows = []
    for n, record in enumerate(zeros, start=1):
        row = _zero_row(n, record)
        row["gamma"] = (record.location / 2, record.bracket_width / 2)
        rows.append(row)
    samples = []
    if config.plot is not None:
        transform = xi.XiTransform(X, ctx)
        samples = [(x, transform.scaled(x)) for x in _linspace(mpmath.mpf(0), X)]
    return Outcome(rows, samples, ("x", "exp(pi x/8) S(x)"))


def run_sum_rule(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    window = float(args.window) if args.window else config.xi_window
    zeros = xi.positive_zeros(window, ctx, scan_step=config.scan_step_xi, window=window)
    report = xi.sum_rule_report(args.n, ctx, zeros)
    samples = [(k, xi.sum_rule_report(k, ctx, zeros).gap) for k in range(1, args.n + 1)] if config.plot else []
    return Outcome([report.row()], samples, ("N", "gap"))


def run_heat(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    lam = _fraction(args.lam)
    lo, hi = _fraction(args.lo), _fraction(args.hi)
    with ctx.workprec():
        lam_value = to_mpf(lam)
        count, zeros = xi.heat_zero_count(lam_value, to_mpf(lo), to_mpf(hi), ctx)
    rows = [{"lambda": lam_value, "lo": lo, "hi": hi, "count": count}]
    rows.extend(_zero_row(n, z) for n, z in enumerate(zeros, start=1))
    samples = []
    if config.plot is not None:
        transform = xi.XiTransform(2 * to_mpf(hi), ctx, heat=lam_value)
        samples = [(z, transform.scaled(2 * z)) for z in _linspace(to_mpf(lo), to_mpf(hi))]
    return Outcome(rows, samples, ("z", "scaled Xi_lambda(z)"))


def run_jensen(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    p = _polynomial(args.poly)
    shrink = _fraction(args.shrink)
    report = lp.jensen_disks(p, ctx, shrink=shrink)
    failure = None
    if not report.all_contained:
        w = report.outside[0]
        failure = StructureViolation(f"point {mpmath.nstr(w, 10)} lies outside every Jensen disk")
    return Outcome(report.rows(), failure=failure)


def _taylor_sequence(text: str, N: int, ctx: PrecisionContext) -> TaylorSeq:
    if text == "zeta":
        return moments.zeta_taylor_seq(moments.moment_table(N, ctx), N)
    if text in lp.MULTIPLIER_FIXTURES:
        return lp.named_sequence(text, N)
    return TaylorSeq(tuple(_fraction_list(text)))


def run_ms_test(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    g = _taylor_sequence(args.sequence, args.n, ctx)
    passed, first = lp.multiplier_sequence_test(g, args.n)
    row = {"sequence": args.sequence, "n": args.n, "passed": passed, "first_failure": first}
    turan = lp.turan_check(g)
    row["turan_min"] = min(turan) if turan else None
    return Outcome([row])


def run_lp_check(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    p = _polynomial(args.poly)
    distinct = lp.sturm_count(p)
    only_real = lp.has_only_real_zeros(p)
    bh = moments.borchardt_hermite(p)
    row = {
        "degree": p.degree,
        "distinct_real": distinct,
        "real_with_multiplicity": lp.real_root_count(p),
        "only_real": only_real,
        "borchardt_hermite_real": bh.all_real,
        "distinct_count": bh.distinct_count,
    }
    rows = [row]
    failure = None
    if bh.all_real != only_real or (only_real and bh.distinct_count != distinct):
        failure = MethodDisagreement(f"Borchardt-Hermite and Sturm disagree on {p}")
    if args.partner:
        result = ftzeros.hermite_biehler_check(p, _polynomial(args.partner), args.half_plane)
        rows.append({
            "interlaced": result.interlaced,
            "wronskian_sign_ok": result.wronskian_sign_ok,
            "wronskian": result.wronskian,
            "x0": result.x0,
            "half_plane": result.half_plane,
        })
    return Outcome(rows, failure=failure)


def run_ft_zeros(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    density = _density(args, ctx)
    lo, hi = _fraction(args.lo), _fraction(args.hi)
    with ctx.workprec():
        census = ftzeros.real_zero_census(density, to_mpf(lo), to_mpf(hi), ctx)
    rows = census.rows()
    if isinstance(density, ftzeros.StepFunction) and density.increasing:
        rows.append({
            "exceptional": ftzeros.exceptional_test(density),
            "period": ftzeros.exceptional_period(density),
        })
    samples = []
    if config.plot is not None:
        rule = ftzeros.FourierRule(density, float(max(abs(lo), abs(hi))), ctx)
        samples = [(x, mpmath.re(rule.f(x))) for x in _linspace(to_mpf(lo), to_mpf(hi))]
    return Outcome(rows, samples, ("x", "C_A(x)"))


def run_w_report(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    density = _density(args, ctx)
    report = ftzeros.ambient_report(density, args.alpha, args.k, ctx)
    samples = []
    if config.plot is not None:
        hi = report.intervals[-1].hi
        rule = ftzeros.FourierRule(density, float(hi), ctx)
        samples = [(x, rule.w(report.alpha, x)) for x in _linspace(mpmath.mpf(0), hi)]
    return Outcome(report.rows(), samples, ("x", "W(x)"))


def run_half_plane(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    density = _density(args, ctx)
    bounds = [float(v) for v in _fraction_list(args.rect)]
    if len(bounds) != 4:
        raise UsageError("--rect needs x_lo,x_hi,y_lo,y_hi")
    rect = ftzeros.Rectangle(*bounds)
    count = ftzeros.half_plane_count(density, rect, ctx)
    increasing = density.increasing if isinstance(density, ftzeros.StepFunction) else density.monotone_increasing
    failure = None
    if increasing and count:
        failure = StructureViolation(f"{count} zeros below the real axis for an increasing density")
    row = {"x_lo": bounds[0], "x_hi": bounds[1], "y_lo": bounds[2], "y_hi": bounds[3], "count": count}
    return Outcome([row], failure=failure)


def run_phi_alpha(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    alpha = _fraction(args.alpha)
    with ctx.workprec():
        alpha_value = to_mpf(alpha)
        x_list = [to_mpf(x) for x in _fraction_list(args.x_list)]
    points = ftzeros.asymptotic_check(alpha_value, x_list, ctx)
    rows = [dict(p.row(), alpha=alpha_value) for p in points]
    return Outcome(rows, [(p.x, p.scaled) for p in points], ("x", "x^(alpha+1) Phi_alpha(x)"))


def run_selftest(args, config: RunConfig, ctx: PrecisionContext) -> Outcome:
    only = [name.strip() for name in args.only.split(",")] if args.only else None
    results = selftest.run_checks(ctx, only)
    failed = [r for r in results if not r.passed]
    failure = None
    if failed:
        first = failed[0].error
        failure = first if isinstance(first, XiZeroError) else StructureViolation(f"check {failed[0].name} failed")
    return Outcome([r.row() for r in results], failure=failure)


# PARSER #


def _common_options() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--bits", type=int, help="Working precision in bits.")
    common.add_argument("--rel-tol", type=float, dest="rel_tol", help="Target relative error.")
    common.add_argument("--abs-tol", type=float, dest="abs_tol", help="Absolute error floor.")
    common.add_argument("--format", choices=("json", "csv"), dest="output_format", help="Output format.")
    common.add_argument("--plot", type=Path, help="Write an SVG plot of the sampled curve.")
    common.add_argument("--config", help="Configuration file with key = value lines.")
    common.add_argument("-v", "--verbose", action="count", default=0, help="More log output on stderr.")
    return common


def _density_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--fixture", help="Step function fixture file.")
    parser.add_argument("--density", default="identity", help=f"Named density: {', '.join(ftzeros.DENSITY_NAMES)}.")
    parser.add_argument("--A", default="1", help="Length of the support of a named density.")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog=PROG, description="Zeros of the Riemann Xi function and of related entire functions.")
    common = _common_options()
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=ArgumentParser)
    sub.required = True

    def command(name: str, handler: Callable, help_text: str) -> ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.set_defaults(handler=handler)
        return p

    p = command("phi", run_phi, "Evaluate the kernel or its derivatives.")
    p.add_argument("--t", default="0", help="Comma separated arguments.")
    p.add_argument("--grid", help="Arguments as start:stop:step.")
    p.add_argument("--order", type=int, choices=(0, 1, 2), default=0, help="Derivative order.")

    p = command("phi-ledger", run_phi_ledger, "Check the inequalities of the kernel bound ledger.")
    p.add_argument("--grid", default="0:2:1/4", help="Grid as start:stop:step.")

    p = command("moments", run_moments, "Moments b_k and coefficients C_k.")
    p.add_argument("--kmax", type=int, default=3, help="Largest moment index.")

    p = command("turan", run_turan, "Turan-type differences for n = 1..N.")
    p.add_argument("--n", type=int, default=10, help="Largest index.")

    p = command("dnr", run_dnr, "Toeplitz minors D(n, r).")
    p.add_argument("--n", type=int, default=10, help="Largest diagonal index.")
    p.add_argument("--r", type=int, default=2, help="Largest order.")
    p.add_argument("--sequence", default="C", help="'C' for C_k, or comma separated coefficients.")

    p = command("hankel", run_hankel, "Hankel minors of power sums.")
    p.add_argument("--r", type=int, default=2, help="Largest minor index.")
    p.add_argument("--sequence", default="xi", help="'xi' for the transform data, or comma separated coefficients.")

    p = command("xi-zeros", run_xi_zeros, "Positive real zeros of the cosine transform.")
    p.add_argument("--window", default="65", help="Right end X of the scan.")

    p = command("sum-rule", run_sum_rule, "Partial sums of 1/x_n^2 against b_1/(2 b_0).")
    p.add_argument("--n", type=int, default=10, help="Number of zeros.")
    p.add_argument("--window", help="Scan window, the configured xi_window by default.")

    p = command("heat", run_heat, "Real zeros of Xi_lambda.")
    p.add_argument("--lambda", dest="lam", default="0", help="Heat parameter.")
    p.add_argument("--lo", default="0", help="Left end of the scan.")
    p.add_argument("--hi", default="40", help="Right end of the scan.")

    p = command("jensen", run_jensen, "Jensen disks and the points they must contain.")
    p.add_argument("--poly", default=SPECIMEN_POLY, help="Ascending coefficients.")
    p.add_argument("--shrink", default="0", help="Shift of the shifted sum.")

    p = command("ms-test", run_ms_test, "Multiplier sequence test through Jensen polynomials.")
    p.add_argument("--sequence", default="alternating",
                   help=f"'zeta', one of {', '.join(lp.MULTIPLIER_FIXTURES)}, or comma separated gamma_k.")
    p.add_argument("--n", type=int, default=8, help="Largest Jensen polynomial degree.")

    p = command("lp-check", run_lp_check, "Reality of the zeros of a polynomial.")
    p.add_argument("--poly", required=True, help="Ascending coefficients.")
    p.add_argument("--partner", help="Second polynomial Q for the Hermite-Biehler check of P + iQ.")
    p.add_argument("--half-plane", dest="half_plane", choices=("lower", "upper"), default="lower")

    p = command("ft-zeros", run_ft_zeros, "Real zeros of a finite Fourier transform.")
    _density_options(p)
    p.add_argument("--lo", default="0", help="Left end of the window.")
    p.add_argument("--hi", default="40", help="Right end of the window.")

    p = command("w-report", run_w_report, "Zeros of W in the ambient intervals.")
    _density_options(p)
    p.add_argument("--alpha", default="pi/2", help="Angle in [0, pi), e.g. 'pi/2' or '0'.")
    p.add_argument("--k", type=int, default=8, help="Number of intervals past the first.")

    p = command("half-plane", run_half_plane, "Zeros of a finite Fourier transform in a rectangle below the axis.")
    _density_options(p)
    p.add_argument("--rect", default="-20,20,-3,-1/10", help="x_lo,x_hi,y_lo,y_hi.")

    p = command("phi-alpha", run_phi_alpha, "Asymptotics of int_0^inf exp(-t^alpha) cos(xt) dt.")
    p.add_argument("--alpha", default="3", help="Exponent above 1.")
    p.add_argument("--x-list", dest="x_list", default="50,100", help="Comma separated arguments.")

    p = command("selftest", run_selftest, "Run the acceptance checks.")
    p.add_argument("--only", help=f"Comma separated subset of {', '.join(selftest.CHECKS)}.")
    return parser


# DISPATCH #


def _configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)


def _config_flags(args) -> Dict[str, Any]:
    keys = ("bits", "rel_tol", "abs_tol", "output_format", "plot", "config")
    return {key: getattr(args, key, None) for key in keys}


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    """Run one subcommand.

    :param argv: Arguments without the program name, ``sys.argv[1:]`` by default.
    :param stdout: Stream for the records.

    :return: Exit code.
    """
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        sys.stderr.write(f"{err}\n")
        return err.exit_code
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)

    _configure_logging(args.verbose)
    try:
        config = resolve_config(_config_flags(args))
        ctx = config.context()
        logger.info("%s at %d bits", args.command, ctx.bits)
        outcome = args.handler(args, config, ctx)
        emit = emit_json if config.output_format == "json" else emit_csv
        emit(outcome.rows, stdout, digits_for(config.bits))
        if config.plot is not None:
            if not outcome.samples:
                raise UsageError(f"{args.command} has no curve to plot")
            emit_plot(outcome.samples, config.plot, *outcome.labels)
        if outcome.failure is not None:
            raise outcome.failure
    except Exception as err:
        logger.error("%s: %s", type(err).__name__, err)
        logger.debug("traceback", exc_info=True)
        return exit_code_for(err)
    return 0


if __name__ == "__main__":
    sys.exit(main())

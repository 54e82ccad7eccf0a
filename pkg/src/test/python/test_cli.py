"""Tests for the command line entry point."""

import io
import json
import os

import pytest

import cli
from errors import InequalityViolated, NoConvergence, StripViolation, exit_code_for
import xi

FAST = ["--bits", "80", "--rel-tol", "1e-15", "--abs-tol", "1e-18"]


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in list(os.environ):
        if name.startswith("XIZERO_"):
            monkeypatch.delenv(name)


def run(*argv):
    stdout = io.StringIO()
    code = cli.main(list(argv), stdout=stdout)
    return code, stdout.getvalue()


def test_sum_rule_json():
    code, out = run("sum-rule", "--n", "10", "--window", "110", *FAST)
    assert code == 0
    (row,) = json.loads(out)
    assert row["n"] == "10"
    assert float(row["gap"]) > 0
    assert float(row["partial"]) < float(row["target"])


def test_moments_csv():
    code, out = run("moments", "--kmax", "3", "--format", "csv", *FAST)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("k,k_err,b,b_err,c,c_err")
    assert len(lines) == 6


def test_lp_check_with_partner():
    code, out = run("lp-check", "--poly=-1,0,1", "--partner", "0,1", *FAST)
    assert code == 0
    first, second = json.loads(out)
    assert first["only_real"] is True and first["distinct_real"] == "2"
    assert second["interlaced"] is True


def test_ms_test_reports_failure_index():
    code, out = run("ms-test", "--sequence", "1,1,3,7,13,21,31", "--n", "6", *FAST)
    assert code == 0
    (row,) = json.loads(out)
    assert row["passed"] is False and row["first_failure"] == "2"


def test_ms_test_named_sequence():
    code, out = run("ms-test", *FAST)
    assert code == 0
    assert json.loads(out)[0]["passed"] is True


def test_jensen_specimen():
    code, out = run("jensen", *FAST)
    assert code == 0
    assert json.loads(out)


def test_hankel_explicit_sequence():
    code, out = run("hankel", "--sequence=1,-3/2,1/2,0,0", "--r", "1", *FAST)
    assert code == 0
    assert len(json.loads(out)) == 2


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["nonsense"],
        ["moments", "--kmax", "many"],
        ["ft-zeros", "--density", "no-such-density"],
        ["phi-alpha", "--alpha", "1"],
        ["selftest", "--only", "bogus"],
    ],
)
def test_usage_errors(argv):
    code, _ = run(*argv)
    assert code == 1


def test_help():
    code, _ = run("--help")
    assert code == 0


def test_plot_without_samples(tmp_path):
    code, _ = run("dnr", "--n", "2", "--r", "2", "--sequence", "1,1,1/2,1/6,1/24",
                  "--plot", str(tmp_path / "dnr.svg"), *FAST)
    assert code == 1


def test_phi_plot(tmp_path):
    target = tmp_path / "phi.svg"
    code, out = run("phi", "--grid", "0:1:1/4", "--plot", str(target), *FAST)
    assert code == 0
    assert len(json.loads(out)) == 5
    assert target.read_text().lstrip().startswith("<?xml")


def test_half_plane_fixture(tmp_path):
    fixture = tmp_path / "falling.txt"
    fixture.write_text("# decreasing step\nA=1\n0 2\n1/2 1\n")
    code, out = run("half-plane", "--fixture", str(fixture), "--rect", "-20,20,-3,-1/2", *FAST)
    assert code == 0
    assert json.loads(out)[0]["count"] == "4"


def test_half_plane_flags_increasing_density(monkeypatch):
    monkeypatch.setattr(cli.ftzeros, "half_plane_count", lambda density, rect, ctx: 1)
    code, _ = run("half-plane", "--density", "exp", *FAST)
    assert code == 3


def test_violation_exit_code(monkeypatch):
    def violated(*args, **kwargs):
        raise InequalityViolated("turan", 1, -1)

    monkeypatch.setattr(cli.moments, "turan_delta", violated)
    code, _ = run("turan", "--n", "2", *FAST)
    assert code == 3


def test_numeric_exit_code(monkeypatch):
    def stalled(*args, **kwargs):
        raise NoConvergence("bracket did not shrink")

    monkeypatch.setattr(xi, "positive_zeros", stalled)
    code, _ = run("xi-zeros", "--window", "30", *FAST)
    assert code == 2


@pytest.mark.parametrize(
    "err, code",
    [
        (StripViolation(3j, 1), 1),
        (ValueError("bad --n"), 1),
        (FileNotFoundError("run.cfg"), 1),
        (ZeroDivisionError("division by zero"), 2),
        (OverflowError("exponent too large"), 2),
        (TypeError("unsupported operand"), 3),
        (KeyError("k"), 3),
        (AttributeError("no attribute"), 3),
    ],
)
def test_unexpected_errors_are_not_usage_errors(monkeypatch, err, code):
    def failing(*args, **kwargs):
        raise err

    monkeypatch.setattr(cli.moments, "turan_delta", failing)
    assert run("turan", "--n", "2", *FAST)[0] == code
    assert exit_code_for(err) == code


def test_config_file_sets_format(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("output_format = csv\n")
    code, out = run("moments", "--kmax", "1", "--config", str(path), *FAST)
    assert code == 0
    assert out.startswith("k,")

"""Tests for layered run configuration."""

from pathlib import Path

import pytest

import config
from errors import UsageError


def test_defaults():
    run = config.resolve_config({}, environ={})
    assert run.bits == 128 and run.rel_tol == 1e-25 and run.output_format == "json"
    assert run.plot is None and run.moment_kmax == 64
    ctx = run.context()
    assert ctx.bits == 128 and ctx.max_escalations == 2


def test_environment_overrides_defaults():
    run = config.resolve_config({}, environ={"XIZERO_BITS": "256", "XIZERO_REL_TOL": "1e-40"})
    assert run.bits == 256 and run.rel_tol == 1e-40


def test_file_then_flags(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# precision\nbits = 96\noutput-format = csv\nxi_window = 120\n")
    run = config.resolve_config({"config": str(path), "bits": 200, "plot": None}, environ={"XIZERO_BITS": "64"})
    assert run.bits == 200
    assert run.output_format == "csv"
    assert run.xi_window == 120.0


def test_config_file_from_environment(tmp_path):
    path = tmp_path / "env.cfg"
    path.write_text("abs_tol = 1e-12\n")
    run = config.resolve_config({}, environ={config.CONFIG_ENV: str(path)})
    assert run.abs_tol == 1e-12


def test_plot_becomes_path():
    run = config.resolve_config({"plot": "out.svg"}, environ={})
    assert run.plot == Path("out.svg")


@pytest.mark.parametrize(
    "flags",
    [
        {"output_format": "xml"},
        {"bits": "many"},
        {"precision": 3},
    ],
)
def test_invalid_flags(flags):
    with pytest.raises(UsageError):
        config.resolve_config(flags, environ={})


def test_invalid_context():
    run = config.resolve_config({"bits": 20}, environ={})
    with pytest.raises(UsageError):
        run.context()


@pytest.mark.parametrize("text", ["bits 96\n", " = 3\n"])
def test_malformed_file(tmp_path, text):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(UsageError):
        config.read_config_file(path)


def test_missing_file(tmp_path):
    with pytest.raises(UsageError):
        config.read_config_file(tmp_path / "absent.cfg")


def test_manager_types():
    manager = config.ConfigManager({"flag": False, "count": 1, "name": "a"})
    manager.set("flag", "yes")
    manager.set("Count", "7")
    manager.set("name", 5)
    assert manager.as_dict() == {"flag": True, "count": 7, "name": "5"}
    with pytest.raises(UsageError):
        manager.get("other")

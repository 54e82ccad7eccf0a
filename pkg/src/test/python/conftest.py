"""Shared fixtures: import path, precision contexts, moments and zeros."""

from pathlib import Path
import sys

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[2].joinpath("main/python")))

from moments import moment_table  # noqa: E402
from numerics import PrecisionContext  # noqa: E402
import xi  # noqa: E402


@pytest.fixture(scope="session")
def ctx() -> PrecisionContext:
    """Moderate precision for fast tests."""
    return PrecisionContext(bits=80, rel_tol=1e-15, abs_tol=1e-18, max_escalations=2)


@pytest.fixture(scope="session")
def full_ctx() -> PrecisionContext:
    """The default run precision."""
    return PrecisionContext()


@pytest.fixture(scope="session")
def table(ctx):
    return moment_table(12, ctx)


@pytest.fixture(scope="session")
def xi_zeros(ctx):
    """Positive zeros of the cosine transform below 160 (at least 20)."""
    return xi.positive_zeros(160, ctx, window=160)

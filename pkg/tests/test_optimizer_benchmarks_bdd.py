"""Behavioural tests for equal-budget optimizer benchmarks."""

from __future__ import annotations

from pathlib import Path

import pytest
from pytest_bdd import scenario

from tests.steps.optimizer_benchmarks import *  # noqa: F403

FEATURES_DIR = Path(__file__).resolve().parent.parent / "features"
FEATURE = str(FEATURES_DIR / "optimizer_benchmarks.feature")

pytestmark = [pytest.mark.slow, pytest.mark.timeout(300)]


@scenario(FEATURE, "momentum lowers the final loss")
def test_momentum_ablation() -> None:
    """Momentum beats plain estimates at equal budget."""


@scenario(FEATURE, "lazy subspace refresh beats refreshing every step")
def test_lazy_refresh_ablation() -> None:
    """Keeping the subspace for many steps beats redrawing it each step."""


@scenario(FEATURE, "ZO-MOPI beats ZO-Muon on the quadratic suite")
def test_quadratic_queries_to_target() -> None:
    """ZO-MOPI needs fewer queries than ZO-Muon on the quadratic."""


@scenario(
    FEATURE, "ZO-MOPI is the most query-efficient method on the logistic suite"
)
def test_logistic_queries_to_target() -> None:
    """ZO-MOPI needs the fewest queries on logistic regression."""

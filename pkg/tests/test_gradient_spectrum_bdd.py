"""Behavioural tests for the gradient spectrum comparison."""

from __future__ import annotations

from pathlib import Path

import pytest
from pytest_bdd import scenario

from tests.steps.gradient_spectrum import *  # noqa: F403

FEATURES_DIR = Path(__file__).resolve().parent.parent / "features"
FEATURE = str(FEATURES_DIR / "gradient_spectrum.feature")


@scenario(FEATURE, "estimates carry more tail mass than the exact gradient")
def test_estimate_tail_is_heavier() -> None:
    """Four-query estimates are flatter than the exact gradient."""


@pytest.mark.slow
@pytest.mark.timeout(120)
@scenario(FEATURE, "more queries narrow the tail-mass gap")
def test_gap_narrows_with_queries() -> None:
    """The tail-mass gap shrinks as estimates use more queries."""

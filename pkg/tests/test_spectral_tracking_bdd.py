"""Behavioural tests for partial orthogonalization and subspace tracking."""

from __future__ import annotations

from pathlib import Path

from pytest_bdd import scenario

from tests.steps.spectral_tracking import *  # noqa: F403

FEATURES_DIR = Path(__file__).resolve().parent.parent / "features"
FEATURE = str(FEATURES_DIR / "spectral_tracking.feature")


@scenario(FEATURE, "rank-k orthogonalization lifts losslessly through a basis")
def test_lossless_lift() -> None:
    """Reduced-space rank-k signs lift to the full-space answer."""


@scenario(FEATURE, "power iteration converges to the rank-k sign")
def test_spi_converges() -> None:
    """Warm-started passes converge on a static matrix."""


@scenario(FEATURE, "tracking error contracts by the spectral gap")
def test_spi_contracts() -> None:
    """Each pass shrinks the tangent error by the spectral gap."""


@scenario(FEATURE, "tracking keeps up with a rotating head subspace")
def test_spi_tracks_drift() -> None:
    """A slowly turning head subspace is followed closely."""

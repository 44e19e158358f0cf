"""Global test configuration and shared fixtures."""

from __future__ import annotations

import logging
import typing as typ

import pytest

from zo_mopi.harness.config import LOG_LEVEL_ENV, OUTPUT_ROOT_ENV

if typ.TYPE_CHECKING:
    from pathlib import Path


@pytest.fixture(autouse=True)
def isolated_output_root(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> Path:
    """Send default run output to a per-test directory."""
    root = tmp_path / "runs"
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(root))
    monkeypatch.delenv(LOG_LEVEL_ENV, raising=False)
    return root


@pytest.fixture
def debug_logging(caplog: pytest.LogCaptureFixture) -> pytest.LogCaptureFixture:
    """Capture ``zo_mopi`` debug records."""
    caplog.set_level(logging.DEBUG, logger="zo_mopi")
    return caplog

"""Shared fixtures for unit tests."""

from __future__ import annotations

import collections.abc as cabc

import pytest

from zo_mopi.harness.config import ExperimentConfig
from zo_mopi.linalg import RngStream, StreamId
from zo_mopi.objectives import MatrixQuadratic


def make_rng(seed: int = 0, stream: StreamId = StreamId.DIAGNOSTIC) -> RngStream:
    """Return a fresh stream for test draws."""
    return RngStream(seed, stream)


@pytest.fixture(name="rng_factory")
def rng_factory_fixture() -> cabc.Callable[..., RngStream]:
    """Provide :func:`make_rng` as a fixture."""
    return make_rng


@pytest.fixture(name="rng")
def rng_fixture() -> RngStream:
    """Return a diagnostic stream seeded with 0."""
    return make_rng()


@pytest.fixture(name="quadratic")
def quadratic_fixture() -> MatrixQuadratic:
    """Return a well-conditioned 8x6 quadratic with a planted optimum."""
    return MatrixQuadratic.create(8, 6, condition=4.0, seed=1, x_star_scale=0.5)


def quadratic_experiment(
    kind: str = "zo-mopi", budget: int = 160, **changes: object
) -> ExperimentConfig:
    """Return a small 8x6 quadratic experiment for *kind*."""
    optimizer: dict[str, object] = {"kind": kind}
    if kind in {"zo-mopi", "zo-muon"}:
        optimizer |= {"r": 4, "nu": 5}
    if kind == "zo-mopi":
        optimizer["k"] = 2
    data: dict[str, object] = {
        "name": kind,
        "objective": {"kind": "quadratic", "m": 8, "n": 6, "seed": 1},
        "optimizer": optimizer,
        "budget": budget,
        "eval_every": 5,
        "record_timing": False,
    }
    data.update(changes)
    return ExperimentConfig.from_dict(data)

"""Unit tests for :mod:`zo_mopi.harness.cost`."""

from __future__ import annotations

import pytest

from zo_mopi.harness.config import OptimizerSpec
from zo_mopi.harness.cost import (
    StepCost,
    layer_cost,
    newton_schulz_flops,
    step_cost,
)
from zo_mopi.optimizers import FoMuonConfig, MezoConfig, ZoMopiConfig, ZoMuonConfig


def test_newton_schulz_flops_uses_the_short_side() -> None:
    """Tall and wide inputs cost the same."""
    assert newton_schulz_flops(4, 8, 5) == 5 * (4 * 16 * 8 + 2 * 64)
    assert newton_schulz_flops(8, 4, 5) == newton_schulz_flops(4, 8, 5)
    assert newton_schulz_flops(8, 4, 0) == 0


def test_zo_mopi_cost() -> None:
    """Power iteration plus a thin QR; state is the basis and the momentum."""
    cost = layer_cost(ZoMopiConfig(r=8, k=4), (32, 16))
    assert cost.orthogonalization_flops == 8 * 8 * 16 * 4 + 4 * 16 * 4 * 4
    assert cost.state_floats == 8 * 16 + 16 * 4


def test_zo_muon_runs_newton_schulz_in_the_subspace() -> None:
    """ZO-Muon orthogonalizes an ``r x n`` estimate and keeps no momentum."""
    cost = layer_cost(ZoMuonConfig(r=8, ns_iters=5), (32, 16))
    assert cost == StepCost(newton_schulz_flops(8, 16, 5), 0)


def test_mezo_is_free() -> None:
    """Plain ZO-SGD neither orthogonalizes nor stores state."""
    assert layer_cost(MezoConfig(), (32, 16)) == StepCost(0, 0)


def test_fo_muon_stores_full_momentum() -> None:
    """First-order Muon keeps an ``m x n`` momentum buffer."""
    cost = layer_cost(FoMuonConfig(ns_iters=5), (32, 16))
    assert cost == StepCost(newton_schulz_flops(32, 16, 5), 32 * 16)


def test_unknown_config_has_no_model() -> None:
    """Only the four optimizer configs are priced."""
    with pytest.raises(TypeError, match="no cost model"):
        layer_cost(object(), (2, 2))


def test_step_cost_sums_layers() -> None:
    """Multi-parameter objectives pay for every layer."""
    spec = OptimizerSpec.from_dict({"kind": "zo-mopi", "r": 4, "k": 2})
    shapes = ((8, 6), (6, 3))
    expected = layer_cost(spec.config, shapes[0]) + layer_cost(spec.config, shapes[1])
    assert step_cost(spec, shapes) == expected
    assert step_cost(spec, ()) == StepCost(0, 0)

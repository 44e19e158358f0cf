"""Zeroth-order and first-order matrix optimizers."""

from __future__ import annotations

from .drivers import (
    FoMuonOptimizer,
    MatrixOptimizer,
    MezoOptimizer,
    ZoMopiOptimizer,
    ZoMuonOptimizer,
    build_optimizer,
)
from .fo_muon import fo_muon_step
from .mezo import mezo_step
from .mopi import Orthogonalizer, project_momentum, zo_mopi_step
from .state import (
    CONFIG_TYPES,
    FoMuonConfig,
    MezoConfig,
    MomentumState,
    OptimizerConfig,
    OptimizerKind,
    OptimizerStep,
    ProjectionScale,
    ZoMopiConfig,
    ZoMuonConfig,
)
from .zo_muon import zo_muon_step

__all__ = [
    "CONFIG_TYPES",
    "FoMuonConfig",
    "FoMuonOptimizer",
    "MatrixOptimizer",
    "MezoConfig",
    "MezoOptimizer",
    "MomentumState",
    "OptimizerConfig",
    "OptimizerKind",
    "OptimizerStep",
    "Orthogonalizer",
    "ProjectionScale",
    "ZoMopiConfig",
    "ZoMopiOptimizer",
    "ZoMuonConfig",
    "ZoMuonOptimizer",
    "build_optimizer",
    "fo_muon_step",
    "mezo_step",
    "project_momentum",
    "zo_mopi_step",
    "zo_muon_step",
]

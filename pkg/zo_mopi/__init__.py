"""Zeroth-order matrix optimization with projected momentum.

Updates are orthogonalized against a subspace tracked by streaming power
iteration.

The core pieces are importable from the package root. The experiment
harness (configs, budgeted runs, comparisons) lives in
:mod:`zo_mopi.harness` and is imported lazily on first attribute access.
"""

from __future__ import annotations

import importlib
import typing as typ

from .errors import (
    BudgetExceededError,
    ColdRestartLoopError,
    ConfigInvalidError,
    ConvergenceFailureError,
    DegenerateGapError,
    DimensionMismatchError,
    NonFiniteLossError,
    NumericalError,
    RankDeficientError,
    ZoMopiError,
)
from .estimator import (
    RgeConfig,
    SubspaceState,
    create_subspace,
    reconstruct_full,
    refresh_subspace,
    rge_full,
    rge_subspace,
    smoothed_loss_mc,
)
from .ledger import QueryLedger
from .linalg import (
    RngStream,
    StreamId,
    SvdFactors,
    gaussian_matrix,
    normalize_columns,
    qr_decompose,
    svd_oracle,
)
from .objectives import (
    LogisticTask,
    MatrixQuadratic,
    TinyMlp,
    analytic_gradient,
    eval_loss,
    finite_diff_gradient,
)
from .optimizers import (
    FoMuonConfig,
    MezoConfig,
    MomentumState,
    OptimizerKind,
    ProjectionScale,
    ZoMopiConfig,
    ZoMopiOptimizer,
    ZoMuonConfig,
    build_optimizer,
    fo_muon_step,
    mezo_step,
    project_momentum,
    zo_mopi_step,
    zo_muon_step,
)
from .spectral import (
    NewtonSchulzVariant,
    PartialOrthogonalization,
    SpiCache,
    msign_k_oracle,
    msign_oracle,
    newton_schulz,
    spi_step,
    tracking_error_tangent,
)

if typ.TYPE_CHECKING:
    from types import ModuleType as _ModuleType
else:  # pragma: no cover - typing fallback only
    _ModuleType = type(importlib)


def __getattr__(name: str) -> _ModuleType:
    """Lazily import the harness and other submodules when requested."""
    try:
        module = importlib.import_module(f"{__name__}.{name}")
    except ModuleNotFoundError as exc:
        if exc.name in {f"{__name__}.{name}", name}:
            raise AttributeError(name) from exc
        raise

    globals()[name] = module
    return module


__all__ = [
    "BudgetExceededError",
    "ColdRestartLoopError",
    "ConfigInvalidError",
    "ConvergenceFailureError",
    "DegenerateGapError",
    "DimensionMismatchError",
    "FoMuonConfig",
    "LogisticTask",
    "MatrixQuadratic",
    "MezoConfig",
    "MomentumState",
    "NewtonSchulzVariant",
    "NonFiniteLossError",
    "NumericalError",
    "OptimizerKind",
    "PartialOrthogonalization",
    "ProjectionScale",
    "QueryLedger",
    "RankDeficientError",
    "RgeConfig",
    "RngStream",
    "SpiCache",
    "StreamId",
    "SubspaceState",
    "SvdFactors",
    "TinyMlp",
    "ZoMopiConfig",
    "ZoMopiError",
    "ZoMopiOptimizer",
    "ZoMuonConfig",
    "analytic_gradient",
    "build_optimizer",
    "create_subspace",
    "eval_loss",
    "finite_diff_gradient",
    "fo_muon_step",
    "gaussian_matrix",
    "mezo_step",
    "msign_k_oracle",
    "msign_oracle",
    "newton_schulz",
    "normalize_columns",
    "project_momentum",
    "qr_decompose",
    "reconstruct_full",
    "refresh_subspace",
    "rge_full",
    "rge_subspace",
    "smoothed_loss_mc",
    "spi_step",
    "svd_oracle",
    "tracking_error_tangent",
    "zo_mopi_step",
    "zo_muon_step",
]

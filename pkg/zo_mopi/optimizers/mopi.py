"""ZO-MOPI: subspace RGE, projected momentum and streaming power iteration."""

from __future__ import annotations

import collections.abc as cabc
import logging
import math
import typing as typ

from zo_mopi.errors import DimensionMismatchError
from zo_mopi.estimator import (
    advance_subspace,
    refresh_due,
    refresh_subspace,
    rge_subspace,
)
from zo_mopi.linalg import frobenius_norm
from zo_mopi.spectral import PartialOrthogonalization, SpiCache, spi_step

from .state import MomentumState, OptimizerStep, ProjectionScale

if typ.TYPE_CHECKING:
    from zo_mopi.estimator import LossFn, SubspaceState
    from zo_mopi.ledger import QueryLedger
    from zo_mopi.linalg import Matrix, RngStream

    from .state import ZoMopiConfig

logger = logging.getLogger(__name__)

type Orthogonalizer = cabc.Callable[
    [Matrix, SpiCache], tuple[PartialOrthogonalization, SpiCache]
]
"""Maps the updated momentum and SPI cache to ``(o, cache')``."""


def project_momentum(
    mom: MomentumState,
    a_new: Matrix,
    a_old: Matrix,
    m_rows: int,
    scale: ProjectionScale,
) -> MomentumState:
    """Carry momentum from basis *a_old* into basis *a_new*.

    Returns ``s * a_new.T @ a_old @ mom.m`` where ``s`` is ``1 / m_rows``
    for :attr:`ProjectionScale.AS_WRITTEN_1_OVER_M` and ``1`` for
    :attr:`ProjectionScale.IDENTITY`.
    """
    if a_new.shape != a_old.shape or a_old.shape[1] != mom.m.shape[0]:
        msg = (
            f"cannot project {mom.m.shape} momentum from a {a_old.shape} basis "
            f"into a {a_new.shape} basis"
        )
        raise DimensionMismatchError(msg)
    s = 1.0 / m_rows if scale is ProjectionScale.AS_WRITTEN_1_OVER_M else 1.0
    return MomentumState(m=s * (a_new.T @ (a_old @ mom.m)), beta=mom.beta)


def _check_state(
    x: Matrix,
    sub: SubspaceState,
    mom: MomentumState,
    cache: SpiCache,
    cfg: ZoMopiConfig,
) -> None:
    m, n = x.shape
    problems = []
    if sub.m != m or sub.r != cfg.r:
        problems.append(f"subspace {sub.a.shape} vs parameters {x.shape} and r={cfg.r}")
    if mom.m.shape != (cfg.r, n):
        problems.append(f"momentum {mom.m.shape} vs expected {(cfg.r, n)}")
    if cache.n != n or cache.k != cfg.k:
        problems.append(f"SPI cache {cache.v.shape} vs n={n}, k={cfg.k}")
    if cfg.k > min(cfg.r, n):
        problems.append(f"k={cfg.k} exceeds min(r={cfg.r}, n={n})")
    if problems:
        raise DimensionMismatchError("; ".join(problems))


def zo_mopi_step(  # noqa: PLR0913, RUF100 - the algorithm threads its full state tuple
    x: Matrix,
    sub: SubspaceState,
    mom: MomentumState,
    cache: SpiCache,
    cfg: ZoMopiConfig,
    loss: LossFn,
    batch: int,
    ledger: QueryLedger,
    *,
    rng: RngStream | None = None,
    spi_rng: RngStream | None = None,
    orthogonalize: Orthogonalizer | None = None,
) -> tuple[OptimizerStep, SubspaceState, MomentumState, SpiCache]:
    """Run one ZO-MOPI iteration.

    In order: refresh the subspace when due and project the momentum into
    it; estimate the reduced gradient; update the momentum; partially
    orthogonalize it with one streaming power iteration pass; and step
    ``x' = x - eta * a @ o``.

    Parameters
    ----------
    x : Matrix
        ``m x n`` parameters.
    sub : SubspaceState
        Sampling subspace; also supplies perturbations unless *rng* is set.
    mom : MomentumState
        ``r x n`` momentum.
    cache : SpiCache
        Warm-start right subspace, untouched by subspace refreshes.
    cfg : ZoMopiConfig
        Hyperparameters.
    loss : LossFn
        Objective.
    batch : int
        Mini-batch id for this step.
    ledger : QueryLedger
        Charged exactly ``2 * cfg.n_queries`` times.
    rng : RngStream | None, optional
        Perturbation stream; defaults to ``sub.rng``.
    spi_rng : RngStream | None, optional
        Stream for SPI cold restarts; defaults to ``sub.rng``.
    orthogonalize : Orthogonalizer | None, optional
        Replacement for :func:`~zo_mopi.spectral.spi_step`.

    Returns
    -------
    tuple[OptimizerStep, SubspaceState, MomentumState, SpiCache]
        The step result and the advanced state.
    """
    _check_state(x, sub, mom, cache, cfg)
    refreshed = refresh_due(sub)
    if refreshed:
        sub, a_old = refresh_subspace(sub)
        mom = project_momentum(mom, sub.a, a_old, sub.m, cfg.projection_scale)
    perturbations = rng if rng is not None else sub.rng
    before = ledger.total
    g_hat = rge_subspace(loss, x, sub, cfg.rge, batch, perturbations, ledger)
    mom = MomentumState(m=mom.beta * mom.m + (1.0 - mom.beta) * g_hat, beta=mom.beta)
    if orthogonalize is None:
        restarts = spi_rng if spi_rng is not None else sub.rng
        result, cache = spi_step(mom.m, cache, restarts)
    else:
        result, cache = orthogonalize(mom.m, cache)
    update = cfg.eta * (sub.a @ result.o)
    sub = advance_subspace(sub)
    step = OptimizerStep(
        x=x - update,
        update_norm=frobenius_norm(update),
        queries_used=ledger.total - before,
        diagnostics={
            "refreshed": float(refreshed),
            "spi_age": float(cache.age),
            "cold_restarts": float(cache.cold_restarts),
            "degenerate_columns": float(result.degenerate_columns),
            "expected_update_norm": cfg.eta * math.sqrt(cfg.k),
        },
    )
    return step, sub, mom, cache


__all__ = ["Orthogonalizer", "project_momentum", "zo_mopi_step"]

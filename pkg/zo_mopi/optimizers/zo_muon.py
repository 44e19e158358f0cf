"""ZO-Muon baseline: subspace RGE orthogonalized by Newton-Schulz."""

from __future__ import annotations

import typing as typ

from zo_mopi.estimator import (
    advance_subspace,
    refresh_due,
    refresh_subspace,
    rge_subspace,
)
from zo_mopi.linalg import frobenius_norm
from zo_mopi.spectral import newton_schulz

from .state import OptimizerStep

if typ.TYPE_CHECKING:
    from zo_mopi.estimator import LossFn, SubspaceState
    from zo_mopi.ledger import QueryLedger
    from zo_mopi.linalg import Matrix, RngStream

    from .state import ZoMuonConfig


def zo_muon_step(  # noqa: PLR0913, RUF100 - mirrors the estimator's argument list
    x: Matrix,
    sub: SubspaceState,
    cfg: ZoMuonConfig,
    loss: LossFn,
    batch: int,
    rng: RngStream,
    ledger: QueryLedger,
) -> tuple[OptimizerStep, SubspaceState]:
    """Run one ZO-Muon iteration.

    The subspace is refreshed lazily on its own interval. The reduced
    estimate is orthogonalized directly; there is no momentum.
    """
    refreshed = refresh_due(sub)
    if refreshed:
        sub, _ = refresh_subspace(sub)
    before = ledger.total
    g_hat = rge_subspace(loss, x, sub, cfg.rge, batch, rng, ledger)
    o = newton_schulz(g_hat, cfg.ns_iters, coefficients=cfg.ns_variant.coefficients)
    update = cfg.eta * (sub.a @ o)
    step = OptimizerStep(
        x=x - update,
        update_norm=frobenius_norm(update),
        queries_used=ledger.total - before,
        diagnostics={"refreshed": float(refreshed)},
    )
    return step, advance_subspace(sub)


__all__ = ["zo_muon_step"]

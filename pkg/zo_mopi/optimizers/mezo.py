"""MeZO baseline: full-space two-point ZO-SGD."""

from __future__ import annotations

import typing as typ

from zo_mopi.estimator import rge_full
from zo_mopi.linalg import frobenius_norm

from .state import OptimizerStep

if typ.TYPE_CHECKING:
    from zo_mopi.estimator import LossFn
    from zo_mopi.ledger import QueryLedger
    from zo_mopi.linalg import Matrix, RngStream

    from .state import MezoConfig


def mezo_step(  # noqa: PLR0913, RUF100 - mirrors the estimator's argument list
    x: Matrix,
    cfg: MezoConfig,
    loss: LossFn,
    batch: int,
    rng: RngStream,
    ledger: QueryLedger,
) -> OptimizerStep:
    """Return ``x - eta * rge_full(...)`` as an :class:`OptimizerStep`."""
    before = ledger.total
    update = cfg.eta * rge_full(loss, x, cfg.rge, batch, rng, ledger)
    return OptimizerStep(
        x=x - update,
        update_norm=frobenius_norm(update),
        queries_used=ledger.total - before,
    )


__all__ = ["mezo_step"]

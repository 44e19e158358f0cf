"""Central finite-difference gradient oracle."""

from __future__ import annotations

import typing as typ

import numpy as np

from zo_mopi._validators import validate_positive_finite
from zo_mopi.ledger import QueryLedger

from .base import as_params, check_params

if typ.TYPE_CHECKING:
    import collections.abc as cabc

    from zo_mopi.linalg import Matrix

    from .base import Objective, Params

FINITE_DIFF_PHASE: typ.Final[str] = "finite_difference"


def finite_diff_gradient(
    obj: Objective,
    params: Matrix | cabc.Sequence[Matrix],
    batch: int,
    h: float,
    *,
    ledger: QueryLedger | None = None,
) -> Params:
    """Return the central-difference gradient of every parameter entry.

    Costs ``2 * (total entries)`` evaluations, each routed through
    *ledger* (a private one when omitted) so non-finite losses raise
    :class:`~zo_mopi.errors.NonFiniteLossError`.
    """
    validate_positive_finite(h, name="h")
    point = as_params(params)
    check_params(obj, point)
    book = ledger if ledger is not None else QueryLedger()
    grads = []
    for layer, x in enumerate(point):

        def loss(candidate: Matrix, b: int, /, layer: int = layer) -> float:
            return obj.loss((*point[:layer], candidate, *point[layer + 1 :]), b)

        grad = np.zeros_like(x, dtype=np.float64)
        for index in np.ndindex(*x.shape):
            bumped = np.array(x, dtype=np.float64, copy=True)
            bumped[index] += h
            plus = book.evaluate(loss, bumped, batch, FINITE_DIFF_PHASE)
            bumped[index] -= 2.0 * h
            minus = book.evaluate(loss, bumped, batch, FINITE_DIFF_PHASE)
            grad[index] = (plus - minus) / (2.0 * h)
        grads.append(grad)
    return tuple(grads)


__all__ = ["FINITE_DIFF_PHASE", "finite_diff_gradient"]

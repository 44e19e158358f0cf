"""Per-step orthogonalization cost and optimizer state size.

Counts are multiply-adds times two, summed over every matrix parameter.
They are analytic and do not depend on data, so they are reported next to
query counts rather than measured.
"""

from __future__ import annotations

import dataclasses as dc
import typing as typ

from zo_mopi.optimizers import (
    FoMuonConfig,
    MezoConfig,
    ZoMopiConfig,
    ZoMuonConfig,
)

if typ.TYPE_CHECKING:
    import collections.abc as cabc

    from .config import OptimizerSpec


@dc.dataclass(frozen=True, slots=True)
class StepCost:
    """Floating-point work and persistent state of one optimizer step."""

    orthogonalization_flops: int
    state_floats: int

    def __add__(self, other: StepCost) -> StepCost:
        """Sum the costs of two parameters."""
        return StepCost(
            self.orthogonalization_flops + other.orthogonalization_flops,
            self.state_floats + other.state_floats,
        )


def newton_schulz_flops(rows: int, cols: int, iters: int) -> int:
    """Return the flops of ``iters`` quintic iterations on a ``rows x cols`` input.

    The iteration runs on the wide orientation, so with ``a = min`` and
    ``b = max`` each pass forms ``X X^T`` (``2a^2 b``), its square
    (``2a^3``) and the product with ``X`` (``2a^2 b``).
    """
    a, b = min(rows, cols), max(rows, cols)
    return iters * (4 * a * a * b + 2 * a**3)


def layer_cost(config: object, shape: tuple[int, int]) -> StepCost:
    """Return the cost of one step of *config* on a ``shape`` parameter."""
    _, n = shape
    match config:
        case ZoMopiConfig(r=r, k=k):
            # two power-iteration products plus the thin QR of an n x k block
            return StepCost(8 * r * n * k + 4 * n * k * k, r * n + n * k)
        case ZoMuonConfig(r=r, ns_iters=iters):
            return StepCost(newton_schulz_flops(r, n, iters), 0)
        case MezoConfig():
            return StepCost(0, 0)
        case FoMuonConfig(ns_iters=iters):
            rows, cols = shape
            return StepCost(newton_schulz_flops(rows, cols, iters), rows * cols)
        case _:
            msg = f"no cost model for {type(config).__name__}"
            raise TypeError(msg)


def step_cost(
    spec: OptimizerSpec, shapes: cabc.Iterable[tuple[int, int]]
) -> StepCost:
    """Return the cost of one step over every parameter in *shapes*."""
    total = StepCost(0, 0)
    for shape in shapes:
        total += layer_cost(spec.config, shape)
    return total


__all__ = ["StepCost", "layer_cost", "newton_schulz_flops", "step_cost"]

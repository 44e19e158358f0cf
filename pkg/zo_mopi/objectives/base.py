"""Common objective protocol and per-layer adapters."""

from __future__ import annotations

import enum
import typing as typ

import numpy as np

from zo_mopi.errors import DimensionMismatchError

if typ.TYPE_CHECKING:
    import collections.abc as cabc

    from zo_mopi.estimator import LossFn
    from zo_mopi.linalg import Matrix

type Params = tuple[Matrix, ...]


class ObjectiveKind(enum.StrEnum):
    """Objectives the harness can build."""

    QUADRATIC = "quadratic"
    LOGISTIC = "logistic"
    MLP = "mlp"


class Objective(typ.Protocol):
    """Forward-pass objective over one or more matrix parameters."""

    @property
    def kind(self) -> ObjectiveKind:
        """Return the objective family."""
        ...

    @property
    def n_batches(self) -> int:
        """Return the number of distinct training batches."""
        ...

    def parameter_shapes(self) -> tuple[tuple[int, int], ...]:
        """Return the shape of each matrix parameter."""
        ...

    def initial_params(self, seed: int) -> Params:
        """Return deterministic starting parameters for *seed*."""
        ...

    def loss(self, params: Params, batch: int) -> float:
        """Return the mini-batch loss."""
        ...

    def gradient(self, params: Params, batch: int) -> Params:
        """Return the exact mini-batch gradient."""
        ...


def as_params(params: Matrix | cabc.Sequence[Matrix]) -> Params:
    """Wrap a single matrix as a one-element parameter tuple."""
    if isinstance(params, np.ndarray):
        return (params,)
    return tuple(params)


def check_params(obj: Objective, params: Params) -> None:
    """Raise :class:`DimensionMismatchError` if *params* do not fit *obj*."""
    shapes = tuple(p.shape for p in params)
    if shapes != obj.parameter_shapes():
        expected = obj.parameter_shapes()
        msg = f"{obj.kind} expects parameter shapes {expected}, got {shapes}"
        raise DimensionMismatchError(msg)


def eval_loss(
    obj: Objective, params: Matrix | cabc.Sequence[Matrix], batch: int
) -> float:
    """Return ``obj.loss`` for a matrix or a parameter sequence."""
    return obj.loss(as_params(params), batch)


def analytic_gradient(
    obj: Objective, params: Matrix | cabc.Sequence[Matrix], batch: int
) -> Params:
    """Return ``obj.gradient`` for a matrix or a parameter sequence."""
    return obj.gradient(as_params(params), batch)


def layer_loss(obj: Objective, params: Params, layer: int) -> LossFn:
    """Return the loss as a function of ``params[layer]`` alone."""

    def loss(x: Matrix, batch: int, /) -> float:
        return obj.loss((*params[:layer], x, *params[layer + 1 :]), batch)

    return loss


def layer_gradient(
    obj: Objective, params: Params, layer: int
) -> cabc.Callable[[Matrix, int], Matrix]:
    """Return the gradient with respect to ``params[layer]`` alone."""

    def gradient(x: Matrix, batch: int) -> Matrix:
        return obj.gradient((*params[:layer], x, *params[layer + 1 :]), batch)[layer]

    return gradient


def softmax_cross_entropy(
    logits: Matrix, labels: np.ndarray
) -> tuple[float, Matrix]:
    """Return mean cross-entropy and ``(softmax - onehot) / batch``."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(labels.size)
    loss = float(np.mean(log_norm - shifted[rows, labels]))
    delta = np.exp(shifted - log_norm[:, np.newaxis])
    delta[rows, labels] -= 1.0
    return loss, delta / labels.size


__all__ = [
    "Objective",
    "ObjectiveKind",
    "Params",
    "analytic_gradient",
    "as_params",
    "check_params",
    "eval_loss",
    "layer_gradient",
    "layer_loss",
    "softmax_cross_entropy",
]

"""Multinomial logistic regression with a single ``d x C`` weight matrix."""

from __future__ import annotations

import dataclasses as dc
import typing as typ

import numpy as np

from zo_mopi._validators import validate_non_negative_finite
from zo_mopi.errors import DimensionMismatchError
from zo_mopi.linalg import RngStream, StreamId

from .base import ObjectiveKind, check_params, softmax_cross_entropy
from .dataset import split_dataset, synthetic_dataset

if typ.TYPE_CHECKING:
    from zo_mopi.linalg import Matrix

    from .base import Params
    from .dataset import Dataset, SplitData

DEFAULT_L2: typ.Final[float] = 1e-4
INIT_SCALE: typ.Final[float] = 0.01


@dc.dataclass(frozen=True, slots=True)
class LogisticTask:
    """Mean cross-entropy of ``softmax(X W)`` plus ``l2/2 * ||W||_F^2``."""

    data: SplitData
    l2: float = DEFAULT_L2

    def __post_init__(self) -> None:
        """Validate the ridge coefficient."""
        validate_non_negative_finite(self.l2, name="l2")

    @classmethod
    def create(  # noqa: PLR0913, RUF100 - construction knobs are keyword-only
        cls,
        seed: int,
        *,
        dim: int = 128,
        n_classes: int = 8,
        train_count: int = 1024,
        eval_count: int = 256,
        batch_size: int = 16,
        l2: float = DEFAULT_L2,
    ) -> LogisticTask:
        """Build a task on a synthetic latent-factor dataset."""
        data = synthetic_dataset(
            seed, dim=dim, n_classes=n_classes, count=train_count + eval_count
        )
        return cls(data=split_dataset(data, eval_count, batch_size, seed), l2=l2)

    @classmethod
    def from_dataset(
        cls,
        data: Dataset,
        *,
        eval_count: int,
        batch_size: int = 16,
        seed: int = 0,
        l2: float = DEFAULT_L2,
    ) -> LogisticTask:
        """Build a task on an externally loaded dataset."""
        return cls(data=split_dataset(data, eval_count, batch_size, seed), l2=l2)

    @property
    def kind(self) -> ObjectiveKind:
        """Return :attr:`ObjectiveKind.LOGISTIC`."""
        return ObjectiveKind.LOGISTIC

    @property
    def n_batches(self) -> int:
        """Return the number of training batches."""
        return self.data.n_batches

    @property
    def weight_shape(self) -> tuple[int, int]:
        """Return ``(d, C)``."""
        return self.data.train.dim, self.data.train.n_classes

    def parameter_shapes(self) -> tuple[tuple[int, int], ...]:
        """Return the single weight shape."""
        return (self.weight_shape,)

    def initial_params(self, seed: int) -> Params:
        """Return small Gaussian weights drawn from the init stream."""
        rng = RngStream(seed, StreamId.INIT).split(1)
        return (INIT_SCALE * rng.normal(*self.weight_shape),)

    def __call__(self, w: Matrix, batch: int, /) -> float:
        """Return the loss of weight matrix *w* on *batch*."""
        if w.shape != self.weight_shape:
            msg = f"expected a {self.weight_shape} weight, got {w.shape}"
            raise DimensionMismatchError(msg)
        features, labels = self.data.batch(batch)
        value, _ = softmax_cross_entropy(features @ w, labels)
        return value + 0.5 * self.l2 * float(np.sum(w * w))

    def loss(self, params: Params, batch: int) -> float:
        """Return the mini-batch loss."""
        check_params(self, params)
        return self(params[0], batch)

    def gradient(self, params: Params, batch: int) -> Params:
        """Return ``X.T (P - Y) / B + l2 * W``."""
        check_params(self, params)
        (w,) = params
        features, labels = self.data.batch(batch)
        _, delta = softmax_cross_entropy(features @ w, labels)
        return (features.T @ delta + self.l2 * w,)


__all__ = ["LogisticTask"]

"""Two-layer tanh network with a hand-written backward pass."""

from __future__ import annotations

import dataclasses as dc
import math
import typing as typ

import numpy as np

from zo_mopi._validators import validate_non_negative_finite, validate_positive_int
from zo_mopi.linalg import RngStream, StreamId

from .base import ObjectiveKind, check_params, softmax_cross_entropy
from .dataset import split_dataset, synthetic_dataset

if typ.TYPE_CHECKING:
    from .base import Params
    from .dataset import SplitData


@dc.dataclass(frozen=True, slots=True)
class TinyMlp:
    """``softmax(tanh(X w1) w2)`` cross-entropy plus a ridge on both layers."""

    data: SplitData
    hidden: int
    l2: float = 0.0

    def __post_init__(self) -> None:
        """Validate the hidden width and ridge coefficient."""
        validate_positive_int(self.hidden, name="hidden")
        validate_non_negative_finite(self.l2, name="l2")

    @classmethod
    def create(  # noqa: PLR0913, RUF100 - construction knobs are keyword-only
        cls,
        seed: int,
        *,
        dim: int = 32,
        hidden: int = 16,
        n_classes: int = 4,
        train_count: int = 512,
        eval_count: int = 128,
        batch_size: int = 16,
        l2: float = 0.0,
    ) -> TinyMlp:
        """Build a network over a synthetic latent-factor dataset."""
        data = synthetic_dataset(
            seed, dim=dim, n_classes=n_classes, count=train_count + eval_count
        )
        split = split_dataset(data, eval_count, batch_size, seed)
        return cls(data=split, hidden=hidden, l2=l2)

    @property
    def kind(self) -> ObjectiveKind:
        """Return :attr:`ObjectiveKind.MLP`."""
        return ObjectiveKind.MLP

    @property
    def n_batches(self) -> int:
        """Return the number of training batches."""
        return self.data.n_batches

    def parameter_shapes(self) -> tuple[tuple[int, int], ...]:
        """Return ``((d, h), (h, C))``."""
        train = self.data.train
        return (train.dim, self.hidden), (self.hidden, train.n_classes)

    def initial_params(self, seed: int) -> Params:
        """Return scaled Gaussian weights with unit fan-in variance."""
        rng = RngStream(seed, StreamId.INIT).split(2)
        (d, h), (_, c) = self.parameter_shapes()
        return rng.normal(d, h) / math.sqrt(d), rng.normal(h, c) / math.sqrt(h)

    def _ridge(self, params: Params) -> float:
        return 0.5 * self.l2 * sum(float(np.sum(p * p)) for p in params)

    def loss(self, params: Params, batch: int) -> float:
        """Return the mini-batch loss."""
        check_params(self, params)
        w1, w2 = params
        features, labels = self.data.batch(batch)
        value, _ = softmax_cross_entropy(np.tanh(features @ w1) @ w2, labels)
        return value + self._ridge(params)

    def gradient(self, params: Params, batch: int) -> Params:
        """Backpropagate through the softmax, ``w2`` and the tanh layer."""
        check_params(self, params)
        w1, w2 = params
        features, labels = self.data.batch(batch)
        hidden = np.tanh(features @ w1)
        _, delta = softmax_cross_entropy(hidden @ w2, labels)
        grad_w2 = hidden.T @ delta + self.l2 * w2
        back = (delta @ w2.T) * (1.0 - hidden * hidden)
        grad_w1 = features.T @ back + self.l2 * w1
        return grad_w1, grad_w2


__all__ = ["TinyMlp"]

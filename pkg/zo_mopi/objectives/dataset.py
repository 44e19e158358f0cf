"""Classification datasets and deterministic mini-batch partitions."""

from __future__ import annotations

import dataclasses as dc
import logging
import typing as typ

import numpy as np

from zo_mopi._validators import validate_non_negative_finite, validate_positive_int
from zo_mopi.errors import DimensionMismatchError
from zo_mopi.linalg import RngStream, StreamId, gaussian_matrix, qr_decompose

if typ.TYPE_CHECKING:
    from pathlib import Path

    import numpy.typing as npt

    from zo_mopi.linalg import Matrix

logger = logging.getLogger(__name__)

EVAL_BATCH: typ.Final[int] = -1
"""Batch id selecting the held-out evaluation split."""


@dc.dataclass(frozen=True, slots=True)
class Dataset:
    """Feature rows with integer class labels in ``[0, n_classes)``."""

    features: Matrix
    labels: npt.NDArray[np.int64]
    n_classes: int

    def __post_init__(self) -> None:
        """Check shapes, label range and finiteness."""
        validate_positive_int(self.n_classes, name="n_classes")
        if self.features.ndim != 2 or self.labels.shape != (self.features.shape[0],):
            shapes = (self.features.shape, self.labels.shape)
            msg = f"features {shapes[0]} and labels {shapes[1]} disagree"
            raise DimensionMismatchError(msg)
        labels = self.labels
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            msg = f"labels must lie in [0, {self.n_classes})"
            raise ValueError(msg)
        if not np.all(np.isfinite(self.features)):
            msg = "features must be finite"
            raise ValueError(msg)

    @property
    def count(self) -> int:
        """Return the number of examples."""
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        """Return the feature dimension."""
        return int(self.features.shape[1])

    def take(
        self, index: npt.NDArray[np.int64]
    ) -> tuple[Matrix, npt.NDArray[np.int64]]:
        """Return the features and labels at *index*."""
        return self.features[index], self.labels[index]


@dc.dataclass(frozen=True, slots=True)
class SplitData:
    """Training set with a seeded batch partition plus a held-out split.

    Batch ids are taken modulo :attr:`n_batches`; :data:`EVAL_BATCH`
    selects the whole held-out split.
    """

    train: Dataset
    held_out: Dataset
    order: npt.NDArray[np.int64]
    batch_size: int

    def __post_init__(self) -> None:
        """Check the partition against the training set."""
        validate_positive_int(self.batch_size, name="batch_size")
        count = self.train.count
        if self.batch_size > count or self.order.shape != (count,):
            msg = f"cannot partition {count} examples into batches of {self.batch_size}"
            raise DimensionMismatchError(msg)

    @property
    def n_batches(self) -> int:
        """Return the number of full training batches."""
        return self.train.count // self.batch_size

    @classmethod
    def partition(
        cls, train: Dataset, held_out: Dataset, batch_size: int, seed: int
    ) -> SplitData:
        """Shuffle *train* with a stream derived from *seed*."""
        order = RngStream(seed, StreamId.DATA).split(1).permutation(train.count)
        return cls(train=train, held_out=held_out, order=order, batch_size=batch_size)

    def batch(self, batch_id: int) -> tuple[Matrix, npt.NDArray[np.int64]]:
        """Return the mini-batch for *batch_id*."""
        if batch_id == EVAL_BATCH:
            return self.held_out.features, self.held_out.labels
        start = (batch_id % self.n_batches) * self.batch_size
        return self.train.take(self.order[start : start + self.batch_size])


def _sample_labels(logits: Matrix, rng: RngStream) -> npt.NDArray[np.int64]:
    shifted = np.exp(logits - logits.max(axis=1, keepdims=True))
    cumulative = np.cumsum(shifted / shifted.sum(axis=1, keepdims=True), axis=1)
    draws = rng.uniform(logits.shape[0])[:, np.newaxis]
    labels = (cumulative < draws).sum(axis=1)
    return np.minimum(labels, logits.shape[1] - 1).astype(np.int64)


def synthetic_dataset(  # noqa: PLR0913, RUF100 - generator knobs are all keyword-only
    seed: int,
    *,
    dim: int = 128,
    n_classes: int = 8,
    count: int = 1280,
    latent: int = 2,
    signal: float = 3.0,
    noise: float = 0.05,
) -> Dataset:
    """Generate a classification set with low-dimensional latent structure.

    Latent factors ``z ~ N(0, I_latent)`` are mapped into feature space by
    an orthonormal loading and scaled by *signal*; isotropic Gaussian
    noise of scale *noise* is added. Labels are sampled from a planted
    softmax over ``z``.
    """
    validate_positive_int(dim, name="dim")
    validate_positive_int(n_classes, name="n_classes")
    validate_positive_int(count, name="count")
    validate_positive_int(latent, name="latent")
    validate_non_negative_finite(signal, name="signal")
    validate_non_negative_finite(noise, name="noise")
    if latent > dim:
        msg = f"latent={latent} exceeds dim={dim}"
        raise DimensionMismatchError(msg)
    rng = RngStream(seed, StreamId.DATA)
    loading, _ = qr_decompose(gaussian_matrix(rng, dim, latent))
    planted = 2.0 * gaussian_matrix(rng, latent, n_classes)
    z = gaussian_matrix(rng, count, latent)
    features = signal * (z @ loading.T) + noise * gaussian_matrix(rng, count, dim)
    labels = _sample_labels(z @ planted, rng)
    return Dataset(features=features, labels=labels, n_classes=n_classes)


def split_dataset(
    data: Dataset, held_out: int, batch_size: int, seed: int
) -> SplitData:
    """Hold out the last *held_out* examples and partition the rest."""
    validate_positive_int(held_out, name="held_out")
    if held_out >= data.count:
        msg = f"held_out={held_out} leaves no training examples out of {data.count}"
        raise DimensionMismatchError(msg)
    cut = data.count - held_out
    train = Dataset(data.features[:cut], data.labels[:cut], data.n_classes)
    evaluation = Dataset(data.features[cut:], data.labels[cut:], data.n_classes)
    return SplitData.partition(train, evaluation, batch_size, seed)


def load_dataset(path: Path, *, n_classes: int | None = None) -> Dataset:
    """Read a whitespace-separated text dataset.

    Each non-blank line holds an integer label followed by the features.
    Lines starting with ``#`` are ignored. When *n_classes* is omitted it
    is ``max(label) + 1``.
    """
    try:
        table = np.loadtxt(path, comments="#", ndmin=2, dtype=np.float64)
    except (OSError, ValueError) as exc:
        msg = f"{path}: {exc}"
        raise ValueError(msg) from exc
    if table.shape[0] == 0 or table.shape[1] < 2:
        msg = f"{path}: expected a label and at least one feature per line"
        raise ValueError(msg)
    raw_labels = table[:, 0]
    if not np.all(raw_labels == np.round(raw_labels)):
        msg = f"{path}: labels must be integers"
        raise ValueError(msg)
    labels = raw_labels.astype(np.int64)
    classes = n_classes if n_classes is not None else int(labels.max()) + 1
    features = np.ascontiguousarray(table[:, 1:])
    logger.info(
        "Loaded %d examples with %d features from %s", *features.shape, path
    )
    return Dataset(features=features, labels=labels, n_classes=classes)


__all__ = [
    "EVAL_BATCH",
    "Dataset",
    "SplitData",
    "load_dataset",
    "split_dataset",
    "synthetic_dataset",
]

"""Unit tests for :mod:`zo_mopi.objectives`."""

from __future__ import annotations

import math
import typing as typ

import numpy as np
import pytest

from zo_mopi.errors import DimensionMismatchError
from zo_mopi.ledger import QueryLedger
from zo_mopi.linalg import RngStream, StreamId, frobenius_norm
from zo_mopi.objectives import (
    EVAL_BATCH,
    Dataset,
    LogisticTask,
    MatrixQuadratic,
    TinyMlp,
    analytic_gradient,
    eval_loss,
    finite_diff_gradient,
    layer_gradient,
    layer_loss,
    load_dataset,
    synthetic_dataset,
)

if typ.TYPE_CHECKING:
    import collections.abc as cabc
    from pathlib import Path

    from zo_mopi.objectives import Objective, Params


def _small_logistic() -> LogisticTask:
    return LogisticTask.create(
        3, dim=6, n_classes=3, train_count=32, eval_count=8, batch_size=8
    )


def _small_mlp() -> TinyMlp:
    return TinyMlp.create(
        4, dim=8, hidden=4, n_classes=3, train_count=32, eval_count=8, batch_size=8
    )


def _max_error(a: Params, b: Params) -> float:
    return max(float(np.max(np.abs(x - y))) for x, y in zip(a, b, strict=True))


def test_quadratic_is_zero_at_optimum(quadratic: MatrixQuadratic) -> None:
    """The planted optimum has zero loss and zero gradient."""
    assert quadratic(quadratic.x_star, 0) == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(
        analytic_gradient(quadratic, quadratic.x_star, 0)[0], 0.0, atol=1e-15
    )
    assert quadratic.smoothness == pytest.approx(4.0, rel=1e-10)


def test_quadratic_gradient_is_lipschitz(quadratic: MatrixQuadratic) -> None:
    """``||grad f(X) - grad f(Y)|| <= L ||X - Y||`` on random pairs."""
    rng = RngStream(0, StreamId.DIAGNOSTIC)
    for _ in range(100):
        x, y = rng.normal(8, 6), rng.normal(8, 6)
        gap = frobenius_norm(
            quadratic.gradient((x,), 0)[0] - quadratic.gradient((y,), 0)[0]
        )
        assert gap <= quadratic.smoothness * frobenius_norm(x - y) * (1.0 + 1e-12)


def test_quadratic_noise_is_per_batch() -> None:
    """Training batches add fixed noise; the eval batch is noise free."""
    quad = MatrixQuadratic.create(3, 2, noise=0.5, seed=1, n_batches=4)
    x = np.ones((3, 2))
    assert quad(x, 0) == quad(x, 4)
    assert quad(x, 0) != quad(x, 1)
    clean = MatrixQuadratic(x_star=quad.x_star, h_left=quad.h_left)
    assert quad(x, EVAL_BATCH) == pytest.approx(clean(x, 0))
    assert quad.n_batches == 4


def test_quadratic_rejects_indefinite_curvature() -> None:
    """``h_left`` must be positive definite."""
    with pytest.raises(ValueError, match="positive definite"):
        MatrixQuadratic(x_star=np.zeros((2, 1)), h_left=np.diag([1.0, -1.0]))


def test_quadratic_rejects_wrong_shape(quadratic: MatrixQuadratic) -> None:
    """Parameters must match the planted optimum."""
    with pytest.raises(DimensionMismatchError):
        quadratic(np.zeros((2, 2)), 0)
    with pytest.raises(DimensionMismatchError):
        eval_loss(quadratic, [np.zeros((2, 2))], 0)


def test_logistic_at_zero_weights_is_log_classes() -> None:
    """Uniform predictions give ``ln C`` with zero ridge."""
    task = _small_logistic()
    assert eval_loss(task, np.zeros((6, 3)), 0) == pytest.approx(math.log(3.0))
    grad = analytic_gradient(task, np.zeros((6, 3)), 0)[0]
    np.testing.assert_allclose(grad.sum(axis=1), 0.0, atol=1e-12)


@pytest.mark.parametrize(
    "build",
    [
        lambda: MatrixQuadratic.create(3, 3, condition=3.0, seed=2),
        _small_logistic,
        _small_mlp,
    ],
    ids=["quadratic", "logistic", "mlp"],
)
def test_finite_differences_match_analytic(build: cabc.Callable[[], Objective]) -> None:
    """Central differences agree with every analytic gradient."""
    obj = build()
    params = obj.initial_params(1)
    if isinstance(obj, MatrixQuadratic):
        params = (RngStream(1, StreamId.DIAGNOSTIC).normal(3, 3),)
    ledger = QueryLedger()
    numeric = finite_diff_gradient(obj, params, 0, 1e-5, ledger=ledger)
    exact = obj.gradient(params, 0)
    for fd, an in zip(numeric, exact, strict=True):
        assert np.all(np.abs(fd - an) <= 1e-4 * (1.0 + np.abs(an)))
    assert ledger.total == 2 * sum(p.size for p in params)


def test_finite_difference_error_is_second_order() -> None:
    """Shrinking ``h`` tenfold shrinks the error about a hundredfold."""
    mlp = _small_mlp()
    params = mlp.initial_params(0)
    exact = mlp.gradient(params, 0)
    coarse = _max_error(finite_diff_gradient(mlp, params, 0, 1e-3), exact)
    fine = _max_error(finite_diff_gradient(mlp, params, 0, 1e-4), exact)
    assert 25.0 <= coarse / fine <= 400.0


def test_batches_are_deterministic() -> None:
    """The same batch id always selects the same examples."""
    task = _small_logistic()
    w = task.initial_params(0)[0]
    assert task.loss((w,), 2) == task.loss((w,), 2)
    assert task.loss((w,), 2) == task.loss((w,), 2 + task.n_batches)
    assert task.n_batches == 4


def test_initial_params_depend_on_seed() -> None:
    """Different seeds give different starting weights."""
    mlp = _small_mlp()
    first, second = mlp.initial_params(0), mlp.initial_params(1)
    assert [p.shape for p in first] == [(8, 4), (4, 3)]
    assert not np.array_equal(first[0], second[0])


def test_layer_adapters_match_full_objective() -> None:
    """Per-layer views agree with the multi-parameter objective."""
    mlp = _small_mlp()
    params = mlp.initial_params(0)
    loss = layer_loss(mlp, params, 1)
    grad = layer_gradient(mlp, params, 1)
    assert loss(params[1], 0) == mlp.loss(params, 0)
    np.testing.assert_array_equal(grad(params[1], 0), mlp.gradient(params, 0)[1])


def test_synthetic_dataset_is_reproducible() -> None:
    """The generator depends only on its seed and knobs."""
    first = synthetic_dataset(5, dim=4, n_classes=2, count=10)
    second = synthetic_dataset(5, dim=4, n_classes=2, count=10)
    np.testing.assert_array_equal(first.features, second.features)
    np.testing.assert_array_equal(first.labels, second.labels)
    assert first.labels.min() >= 0
    assert first.labels.max() < 2


def test_dataset_rejects_out_of_range_labels() -> None:
    """Labels must index a class."""
    with pytest.raises(ValueError, match="labels"):
        Dataset(np.zeros((2, 3)), np.array([0, 5]), 3)


def test_load_dataset(tmp_path: Path) -> None:
    """Text files hold a label then features; comments are skipped."""
    path = tmp_path / "data.txt"
    text = "# label f1 f2\n0 1.0 2.0\n\n2 3.0 4.0\n1 5.0 6.0\n"
    path.write_text(text, encoding="utf-8")
    data = load_dataset(path)
    assert data.count == 3
    assert data.dim == 2
    assert data.n_classes == 3
    np.testing.assert_array_equal(data.labels, [0, 2, 1])


def test_load_dataset_rejects_fractional_labels(tmp_path: Path) -> None:
    """Labels must be integers."""
    path = tmp_path / "bad.txt"
    path.write_text("0.5 1.0\n", encoding="utf-8")
    with pytest.raises(ValueError, match="integers"):
        load_dataset(path)


def test_load_dataset_reports_missing_file(tmp_path: Path) -> None:
    """A missing file is a ``ValueError`` naming the path."""
    with pytest.raises(ValueError, match="missing.txt"):
        load_dataset(tmp_path / "missing.txt")

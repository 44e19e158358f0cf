"""Unit tests for :mod:`zo_mopi.linalg`."""

from __future__ import annotations

import math

import numpy as np
import pytest

from zo_mopi.errors import DimensionMismatchError, RankDeficientError
from zo_mopi.linalg import (
    RngStream,
    StreamId,
    as_matrix,
    frobenius_norm,
    gaussian_matrix,
    normalize_columns,
    orthogonal_complement,
    orthonormality_error,
    qr_decompose,
    svd_oracle,
)


def test_gaussian_matrix_is_reproducible() -> None:
    """The same ``(seed, stream)`` pair yields identical draws."""
    first = RngStream(7, StreamId.PERTURBATION)
    second = RngStream(7, StreamId.PERTURBATION)
    a = gaussian_matrix(first, 3, 4)
    b = gaussian_matrix(second, 3, 4)
    np.testing.assert_array_equal(a, b)
    assert a.shape == (3, 4)
    assert first.counter == 12


def test_gaussian_matrix_moments() -> None:
    """A million draws have mean ~0 and variance ~1."""
    draws = gaussian_matrix(RngStream(0, StreamId.DIAGNOSTIC), 1000, 1000)
    assert abs(float(draws.mean())) <= 4.0 / 1000
    assert abs(float(draws.var()) - 1.0) <= 4.0 * math.sqrt(2.0) / 1000


def test_streams_are_isolated() -> None:
    """Interleaving two streams does not change either sequence."""
    solo_a = RngStream(3, StreamId.SUBSPACE).normal(2, 5)
    solo_b = RngStream(3, StreamId.SPI).normal(2, 5)
    a = RngStream(3, StreamId.SUBSPACE)
    b = RngStream(3, StreamId.SPI)
    mixed_b_first = b.normal(2, 5)
    mixed_a = a.normal(2, 5)
    np.testing.assert_array_equal(solo_a, mixed_a)
    np.testing.assert_array_equal(solo_b, mixed_b_first)
    assert not np.array_equal(solo_a, solo_b)


def test_split_and_clone() -> None:
    """Children differ from each other and clones replay from the start."""
    parent = RngStream(11, StreamId.PERTURBATION)
    first = parent.normal(2, 2)
    np.testing.assert_array_equal(parent.clone().normal(2, 2), first)
    child0 = parent.split(0).normal(2, 2)
    child1 = parent.split(1).normal(2, 2)
    assert not np.array_equal(child0, child1)
    np.testing.assert_array_equal(parent.split(0).normal(2, 2), child0)


@pytest.mark.parametrize(
    ("seed", "error"),
    [(-1, ValueError), (True, TypeError), (2**64, ValueError)],
)
def test_rng_stream_rejects_bad_seeds(seed: int, error: type[Exception]) -> None:
    """Seeds must be 64-bit unsigned integers."""
    with pytest.raises(error):
        RngStream(seed, StreamId.INIT)


def test_qr_of_identity() -> None:
    """The identity factors as ``I @ I``."""
    q, r = qr_decompose(np.eye(3))
    np.testing.assert_allclose(q, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(r, np.eye(3), atol=1e-15)


def test_qr_of_positive_diagonal() -> None:
    """A positive diagonal stays in ``r`` with ``q = I``."""
    q, r = qr_decompose(np.diag([2.0, 3.0]))
    np.testing.assert_allclose(q, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(r, np.diag([2.0, 3.0]), atol=1e-15)


def test_qr_of_random_tall_matrix(rng: RngStream) -> None:
    """Random factors reconstruct, are orthonormal and have positive diag(r)."""
    m = rng.normal(8, 3)
    q, r = qr_decompose(m)
    assert q.shape == (8, 3)
    assert r.shape == (3, 3)
    assert frobenius_norm(q @ r - m) <= 1e-10 * max(1.0, frobenius_norm(m))
    assert orthonormality_error(q) <= 1e-10
    assert np.all(np.diag(r) > 0.0)
    np.testing.assert_array_equal(np.tril(r, -1), 0.0)


def test_qr_does_not_mutate_input(rng: RngStream) -> None:
    """The caller's matrix is left untouched."""
    m = rng.normal(5, 2)
    copy = m.copy()
    qr_decompose(m)
    np.testing.assert_array_equal(m, copy)


def test_qr_rejects_duplicate_columns() -> None:
    """A collapsed pivot raises :class:`RankDeficientError`."""
    m = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    with pytest.raises(RankDeficientError, match="collapsed"):
        qr_decompose(m)


def test_qr_rejects_wide_input() -> None:
    """QR needs at least as many rows as columns."""
    with pytest.raises(DimensionMismatchError, match="rows >= cols"):
        qr_decompose(np.ones((2, 3)))


def test_normalize_columns() -> None:
    """Columns get unit norm; zero columns stay zero."""
    out = normalize_columns(np.array([[3.0, 0.0], [4.0, 0.0]]))
    np.testing.assert_allclose(out, [[0.6, 0.0], [0.8, 0.0]], atol=1e-15)


def test_svd_of_diagonal() -> None:
    """A positive diagonal is its own SVD."""
    factors = svd_oracle(np.diag([5.0, 2.0]))
    np.testing.assert_allclose(factors.sigma, [5.0, 2.0], atol=1e-15)
    np.testing.assert_allclose(np.abs(factors.u), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(np.abs(factors.v), np.eye(2), atol=1e-15)


def test_svd_sorts_singular_values() -> None:
    """Values come back nonincreasing regardless of column order."""
    factors = svd_oracle(np.diag([1.0, 4.0, 2.0]))
    np.testing.assert_allclose(factors.sigma, [4.0, 2.0, 1.0], atol=1e-14)
    expected = np.diag([1.0, 4.0, 2.0])
    np.testing.assert_allclose(factors.reconstruct(), expected, atol=1e-14)


def test_svd_of_rank_one(rng: RngStream) -> None:
    """A rank-one matrix has one nonzero value and a complete ``u``."""
    u0 = normalize_columns(rng.normal(6, 1))
    v0 = normalize_columns(rng.normal(4, 1))
    factors = svd_oracle(u0 @ v0.T)
    np.testing.assert_allclose(factors.sigma, [1.0, 0.0, 0.0, 0.0], atol=1e-12)
    assert orthonormality_error(factors.u) <= 1e-10
    assert orthonormality_error(factors.v) <= 1e-10


@pytest.mark.parametrize("shape", [(6, 4), (4, 6), (5, 5)])
def test_svd_reconstructs_random_matrices(
    rng: RngStream, shape: tuple[int, int]
) -> None:
    """Tall, wide and square inputs reconstruct with orthonormal factors."""
    m = rng.normal(*shape)
    factors = svd_oracle(m)
    p = min(shape)
    assert factors.u.shape == (shape[0], p)
    assert factors.v.shape == (shape[1], p)
    assert frobenius_norm(factors.reconstruct() - m) <= 1e-10 * frobenius_norm(m)
    assert orthonormality_error(factors.u) <= 1e-10
    assert orthonormality_error(factors.v) <= 1e-10
    assert np.all(np.diff(factors.sigma) <= 0.0)


def test_svd_recovers_planted_spectrum(rng: RngStream) -> None:
    """Singular values of ``U diag(s) V^T`` match ``s``."""
    sigma = np.array([9.0, 5.0, 2.5, 1.0, 0.25])
    u, _ = qr_decompose(rng.normal(12, 5))
    v, _ = qr_decompose(rng.normal(7, 5))
    factors = svd_oracle((u * sigma) @ v.T)
    np.testing.assert_allclose(factors.sigma, sigma, atol=1e-10)


def test_svd_rejects_non_finite() -> None:
    """NaN input is refused."""
    with pytest.raises(ValueError, match="finite"):
        svd_oracle(np.array([[1.0, math.nan], [0.0, 1.0]]))


def test_frobenius_norm_examples() -> None:
    """Zero, identity and a 3-4-5 row."""
    assert frobenius_norm(np.zeros((2, 2))) == 0.0
    assert frobenius_norm(np.eye(3)) == pytest.approx(math.sqrt(3.0), abs=1e-15)
    assert frobenius_norm(np.array([[3.0, 4.0]])) == pytest.approx(5.0, abs=1e-15)


def test_orthogonal_complement(rng: RngStream) -> None:
    """A basis and its complement form an orthogonal matrix."""
    basis, _ = qr_decompose(rng.normal(5, 2))
    complement = orthogonal_complement(basis)
    assert complement.shape == (5, 3)
    full = np.column_stack([basis, complement])
    assert orthonormality_error(full) <= 1e-10


def test_as_matrix_rejects_vectors() -> None:
    """One-dimensional input is not a matrix."""
    with pytest.raises(DimensionMismatchError, match="2-D"):
        as_matrix([1.0, 2.0])

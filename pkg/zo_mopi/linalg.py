"""Dense small-matrix numerics shared by the optimizers and the oracles.

Matrices are plain two-dimensional ``float64`` numpy arrays. Every public
operation returns a fresh array and never mutates its inputs, so matrices
can be shared freely between threads. :class:`RngStream` is the only
mutable object here; it is owned by exactly one caller and split, never
shared.

QR and SVD are implemented directly (Householder reflections and one-sided
Jacobi rotations) so their conventions are fixed: ``r`` always has a
strictly positive diagonal, and singular values come back sorted in
nonincreasing order.
"""

from __future__ import annotations

import dataclasses as dc
import enum
import functools
import math
import typing as typ

import numpy as np
import numpy.typing as npt

from ._validators import validate_non_negative_int, validate_positive_int
from .errors import ConvergenceFailureError, DimensionMismatchError, RankDeficientError

type Matrix = npt.NDArray[np.float64]
type Vector = npt.NDArray[np.float64]
type _ColumnPairs = tuple[npt.NDArray[np.intp], npt.NDArray[np.intp]]

COLLAPSE_TOL: typ.Final[float] = 1e-12
"""Absolute norm below which a column is treated as collapsed."""

JACOBI_MAX_SWEEPS: typ.Final[int] = 100
_JACOBI_TOL: typ.Final[float] = 1e-12
_NULL_FLOOR: typ.Final[float] = 8.0
_U64: typ.Final[int] = 2**64


class StreamId(enum.IntEnum):
    """Named random streams so each concern draws from its own sequence."""

    INIT = 1
    PERTURBATION = 2
    SUBSPACE = 3
    SPI = 4
    DATA = 5
    NOISE = 6
    DIAGNOSTIC = 7


@dc.dataclass(slots=True)
class RngStream:
    """Counter-based Gaussian stream keyed by ``(seed, stream_id)``.

    The stream wraps numpy's Philox bit generator with the 128-bit key
    ``stream_id << 64 | seed``, so the same pair reproduces the same draws
    on every platform and distinct stream ids never overlap.

    Attributes
    ----------
    seed : int
        64-bit unsigned seed.
    stream_id : int
        64-bit unsigned stream identifier.
    counter : int
        Number of scalar draws consumed so far.
    """

    seed: int
    stream_id: int = 0
    counter: int = dc.field(default=0, init=False)
    _generator: np.random.Generator = dc.field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        """Validate the key and build the underlying generator."""
        validate_non_negative_int(self.seed, name="seed")
        validate_non_negative_int(self.stream_id, name="stream_id")
        if self.seed >= _U64 or self.stream_id >= _U64:
            msg = "seed and stream_id must fit in 64 bits"
            raise ValueError(msg)
        key = (self.stream_id << 64) | self.seed
        self._generator = np.random.Generator(np.random.Philox(key=key))

    def normal(self, rows: int, cols: int) -> Matrix:
        """Draw a ``rows x cols`` matrix of i.i.d. standard normals."""
        out = self._generator.standard_normal((rows, cols))
        self.counter += rows * cols
        return out

    def uniform(self, size: int) -> Vector:
        """Draw *size* i.i.d. uniforms on ``[0, 1)``."""
        out = self._generator.random(size)
        self.counter += size
        return out

    def permutation(self, size: int) -> npt.NDArray[np.int64]:
        """Return a random permutation of ``range(size)``."""
        out = self._generator.permutation(size)
        self.counter += size
        return out

    def split(self, tag: int) -> RngStream:
        """Derive an independent child stream identified by *tag*."""
        validate_non_negative_int(tag, name="tag")
        child = np.random.SeedSequence([self.seed, self.stream_id, tag])
        stream_id = int(child.generate_state(1, np.uint64)[0])
        return RngStream(self.seed, stream_id)

    def clone(self) -> RngStream:
        """Return a fresh stream that replays this one from its first draw."""
        return RngStream(self.seed, self.stream_id)


@dc.dataclass(frozen=True, slots=True)
class SvdFactors:
    """Compact SVD ``u @ diag(sigma) @ v.T`` with ``p = min(rows, cols)``."""

    u: Matrix
    sigma: Vector
    v: Matrix

    def reconstruct(self) -> Matrix:
        """Return ``u @ diag(sigma) @ v.T``."""
        return (self.u * self.sigma) @ self.v.T


def as_matrix(values: npt.ArrayLike) -> Matrix:
    """Return *values* as a finite two-dimensional ``float64`` array."""
    out = np.array(values, dtype=np.float64)
    if out.ndim != 2 or 0 in out.shape:
        msg = f"expected a non-empty 2-D matrix, got shape {out.shape}"
        raise DimensionMismatchError(msg)
    return out


def gaussian_matrix(rng: RngStream, m: int, n: int) -> Matrix:
    """Return an ``m x n`` matrix of i.i.d. standard normal draws.

    The stream counter advances by exactly ``m * n``.
    """
    validate_positive_int(m, name="m")
    validate_positive_int(n, name="n")
    return rng.normal(m, n)


def frobenius_norm(m: Matrix) -> float:
    """Return the Frobenius norm of *m*."""
    return float(np.linalg.norm(m))


def orthonormality_error(q: Matrix) -> float:
    """Return ``||q.T q - I||_F``."""
    return frobenius_norm(q.T @ q - np.eye(q.shape[1]))


def normalize_columns(m: Matrix) -> Matrix:
    """Scale every column of *m* to unit norm.

    Columns whose norm is at most :data:`COLLAPSE_TOL` are set to zero.
    """
    norms = np.linalg.norm(m, axis=0)
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > COLLAPSE_TOL)
    return m * scale


def _householder_vectors(r: Matrix) -> list[Vector]:
    """Triangularize *r* in place and return the unit reflector vectors."""
    cols = r.shape[1]
    reflectors: list[Vector] = []
    for j in range(cols):
        x = r[j:, j]
        norm_x = float(np.linalg.norm(x))
        if norm_x <= COLLAPSE_TOL:
            msg = f"column {j} collapsed to norm {norm_x:.3e} during QR"
            raise RankDeficientError(msg)
        v = x.copy()
        v[0] += math.copysign(norm_x, x[0])
        v /= np.linalg.norm(v)
        r[j:, j:] -= 2.0 * np.outer(v, v @ r[j:, j:])
        reflectors.append(v)
    return reflectors


def qr_decompose(m: Matrix) -> tuple[Matrix, Matrix]:
    """Return the thin QR factorization of a tall matrix.

    Parameters
    ----------
    m : Matrix
        Input with ``rows >= cols`` and full column rank.

    Returns
    -------
    tuple[Matrix, Matrix]
        ``q`` (``rows x cols``, orthonormal columns) and ``r``
        (``cols x cols``, upper triangular with strictly positive diagonal).

    Raises
    ------
    DimensionMismatchError
        If ``rows < cols``.
    RankDeficientError
        If a pivot column collapses below :data:`COLLAPSE_TOL`; callers
        that sampled *m* should resample.
    """
    rows, cols = m.shape
    if rows < cols:
        msg = f"qr_decompose needs rows >= cols, got {rows}x{cols}"
        raise DimensionMismatchError(msg)
    r = np.array(m, dtype=np.float64, copy=True)
    reflectors = _householder_vectors(r)
    q = np.eye(rows, cols)
    for j in range(cols - 1, -1, -1):
        v = reflectors[j]
        q[j:, :] -= 2.0 * np.outer(v, v @ q[j:, :])
    r = np.triu(r[:cols, :])
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    return q * signs, r * signs[:, np.newaxis]


@functools.lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[_ColumnPairs, ...]:
    """Return a schedule of disjoint column pairs covering every pair once."""
    players = list(range(n + (n % 2)))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = [
            (players[i], players[size - 1 - i])
            for i in range(size // 2)
            if n not in {players[i], players[size - 1 - i]}
        ]
        if pairs:
            p, q = zip(*pairs, strict=True)
            rounds.append((np.array(p, dtype=np.intp), np.array(q, dtype=np.intp)))
        players = [players[0], players[-1], *players[1:-1]]
    return tuple(rounds)


def _jacobi_round(work: Matrix, v: Matrix, pair: _ColumnPairs, floor: float) -> float:
    """Rotate each column pair orthogonal; return the largest pre-rotation cosine."""
    p, q = pair
    ap, aq = work[:, p], work[:, q]
    alpha = np.einsum("ij,ij->j", ap, ap)
    beta = np.einsum("ij,ij->j", aq, aq)
    gamma = np.einsum("ij,ij->j", ap, aq)
    scale = np.sqrt(alpha * beta)
    live = (alpha > floor) & (beta > floor)
    cosine = np.divide(np.abs(gamma), scale, out=np.zeros_like(gamma), where=live)
    active = cosine > _JACOBI_TOL
    if not active.any():
        return float(cosine.max(initial=0.0))
    zeta = (beta - alpha) / (2.0 * np.where(active, gamma, 1.0))
    t = np.where(zeta >= 0.0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
    c = np.where(active, 1.0 / np.sqrt(1.0 + t * t), 1.0)
    s = np.where(active, c * t, 0.0)
    work[:, p], work[:, q] = c * ap - s * aq, s * ap + c * aq
    vp, vq = v[:, p], v[:, q]
    v[:, p], v[:, q] = c * vp - s * vq, s * vp + c * vq
    return float(cosine.max())


def _complete_orthonormal(u: Matrix, filled: npt.NDArray[np.bool_]) -> Matrix:
    """Replace the unfilled columns of *u* with an orthonormal completion."""
    rows = u.shape[0]
    basis = u[:, filled]
    for j in np.flatnonzero(~filled):
        residual = np.eye(rows) - basis @ basis.T
        residual -= basis @ (basis.T @ residual)
        pick = int(np.argmax(np.linalg.norm(residual, axis=0)))
        column = residual[:, pick] / np.linalg.norm(residual[:, pick])
        u[:, j] = column
        basis = np.column_stack([basis, column])
    return u


def orthogonal_complement(basis: Matrix) -> Matrix:
    """Return an orthonormal basis of the complement of span(*basis*).

    *basis* must be ``n x k`` with orthonormal columns; the result is
    ``n x (n - k)``.
    """
    n, k = basis.shape
    if k > n:
        msg = f"basis has more columns than rows: {n}x{k}"
        raise DimensionMismatchError(msg)
    padded = np.zeros((n, n))
    padded[:, :k] = basis
    filled = np.arange(n) < k
    return _complete_orthonormal(padded, filled)[:, k:]


def _svd_tall(m: Matrix, max_sweeps: int) -> SvdFactors:
    cols = m.shape[1]
    work = np.array(m, dtype=np.float64, copy=True)
    v = np.eye(cols)
    scale = max(frobenius_norm(m), 1e-300)
    floor = (_NULL_FLOOR * cols * np.finfo(np.float64).eps * scale) ** 2
    schedule = _round_robin(cols)
    for _ in range(max_sweeps):
        off = max(
            (_jacobi_round(work, v, pair, floor) for pair in schedule), default=0.0
        )
        if off <= _JACOBI_TOL:
            break
    else:
        msg = f"one-sided Jacobi did not converge within {max_sweeps} sweeps"
        raise ConvergenceFailureError(msg)
    sigma = np.linalg.norm(work, axis=0)
    filled = sigma * sigma > floor
    sigma = np.where(filled, sigma, 0.0)
    u = np.divide(work, sigma, out=np.zeros_like(work), where=filled)
    if not filled.all():
        u = _complete_orthonormal(u, filled)
    order = np.argsort(-sigma, kind="stable")
    return SvdFactors(u=u[:, order], sigma=sigma[order], v=v[:, order])


def svd_oracle(m: Matrix, *, max_sweeps: int = JACOBI_MAX_SWEEPS) -> SvdFactors:
    """Return the compact SVD of *m* by one-sided Jacobi rotations.

    This is a test and diagnostic oracle; the optimizer hot paths never
    call it.

    Raises
    ------
    ValueError
        When *m* contains NaN or infinity.
    ConvergenceFailureError
        When the sweep cap is hit before every column pair is orthogonal
        to within ``1e-12`` relative cosine.
    """
    if not np.all(np.isfinite(m)):
        msg = "svd_oracle requires finite entries"
        raise ValueError(msg)
    rows, cols = m.shape
    if rows >= cols:
        return _svd_tall(m, max_sweeps)
    flipped = _svd_tall(m.T, max_sweeps)
    return SvdFactors(u=flipped.v, sigma=flipped.sigma, v=flipped.u)


__all__ = [
    "COLLAPSE_TOL",
    "Matrix",
    "RngStream",
    "StreamId",
    "SvdFactors",
    "Vector",
    "as_matrix",
    "frobenius_norm",
    "gaussian_matrix",
    "normalize_columns",
    "orthogonal_complement",
    "orthonormality_error",
    "qr_decompose",
    "svd_oracle",
]

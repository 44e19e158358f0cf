"""Spectral operators on momentum matrices.

Exact ``msign``/``msign_k`` oracles built on :func:`~zo_mopi.linalg.svd_oracle`
exist for tests and diagnostics. The hot paths use either a Newton-Schulz
polynomial iteration (ZO-Muon, FO-Muon) or one warm-started streaming power
iteration pass per optimizer step (ZO-MOPI).
"""

from __future__ import annotations

import dataclasses as dc
import enum
import logging
import typing as typ

import numpy as np

from ._validators import validate_non_negative_int, validate_positive_int
from .errors import (
    ColdRestartLoopError,
    DegenerateGapError,
    DimensionMismatchError,
    RankDeficientError,
)
from .linalg import (
    COLLAPSE_TOL,
    frobenius_norm,
    gaussian_matrix,
    normalize_columns,
    qr_decompose,
    svd_oracle,
)

if typ.TYPE_CHECKING:
    from .linalg import Matrix, RngStream, Vector

logger = logging.getLogger(__name__)

MSIGN_RELATIVE_CUTOFF: typ.Final[float] = 1e-10
DEGENERATE_GAP_TOL: typ.Final[float] = 1e-10
SINGULAR_TOL: typ.Final[float] = 1e-12
NS_DEFAULT_ITERS: typ.Final[int] = 5


@dc.dataclass(frozen=True, slots=True)
class NewtonSchulzCoefficients:
    """Coefficients of the odd quintic ``a*x + b*x**3 + c*x**5``."""

    a: float
    b: float
    c: float


NS_CONVERGENT: typ.Final = NewtonSchulzCoefficients(15 / 8, -10 / 8, 3 / 8)
"""Classic quintic: ``sigma = 1`` is a fixed point and iterates increase to it."""

NS_MUON: typ.Final = NewtonSchulzCoefficients(3.4445, -4.7750, 2.0315)
"""Muon's tuned quintic: faster early growth, oscillates around 0.7..1.2."""


class NewtonSchulzVariant(enum.StrEnum):
    """Named Newton-Schulz coefficient triples."""

    CONVERGENT = "convergent"
    MUON = "muon"

    @property
    def coefficients(self) -> NewtonSchulzCoefficients:
        """Return the coefficient triple for this variant."""
        return NS_CONVERGENT if self is NewtonSchulzVariant.CONVERGENT else NS_MUON


@dc.dataclass(frozen=True, slots=True)
class SpiCache:
    """Right singular subspace carried between streaming power iterations.

    Attributes
    ----------
    v : Matrix
        ``n x k`` matrix with orthonormal columns.
    k : int
        Tracked rank.
    age : int
        Power iteration passes since the last cold start.
    cold_restarts : int
        Number of cold restarts performed over the cache's lifetime.
    """

    v: Matrix
    k: int
    age: int = 0
    cold_restarts: int = 0

    def __post_init__(self) -> None:
        """Check the basis shape against the tracked rank."""
        validate_positive_int(self.k, name="k")
        validate_non_negative_int(self.age, name="age")
        validate_non_negative_int(self.cold_restarts, name="cold_restarts")
        n, k = self.v.shape
        if k != self.k or self.k > n:
            msg = f"SpiCache basis shape {n}x{k} does not match k={self.k}"
            raise DimensionMismatchError(msg)

    @property
    def n(self) -> int:
        """Return the ambient column dimension."""
        return int(self.v.shape[0])


@dc.dataclass(frozen=True, slots=True)
class PartialOrthogonalization:
    """Rank-``k`` partial orthogonalization ``o = u @ v.T``."""

    o: Matrix
    u: Matrix
    v: Matrix

    @property
    def degenerate_columns(self) -> int:
        """Return how many columns of ``u`` collapsed to zero."""
        return int(np.count_nonzero(np.linalg.norm(self.u, axis=0) == 0.0))


def msign_oracle(g: Matrix) -> Matrix:
    """Return the polar factor ``U @ V.T`` of *g* via the SVD oracle.

    Singular values below ``1e-10 * sigma_1`` are treated as zero and
    their directions are dropped.
    """
    factors = svd_oracle(g)
    if factors.sigma[0] == 0.0:
        return np.zeros_like(g, dtype=np.float64)
    keep = factors.sigma > MSIGN_RELATIVE_CUTOFF * factors.sigma[0]
    return factors.u[:, keep] @ factors.v[:, keep].T


def msign_k_oracle(g: Matrix, k: int) -> Matrix:
    """Return ``U[:, :k] @ V[:, :k].T`` for the top-*k* singular pairs of *g*.

    Raises
    ------
    DegenerateGapError
        If ``sigma_k - sigma_{k+1} < 1e-10 * sigma_1``; the top-*k*
        subspace is then not unique.
    """
    validate_positive_int(k, name="k")
    if k > min(g.shape):
        msg = f"k={k} exceeds min{g.shape}"
        raise DimensionMismatchError(msg)
    factors = svd_oracle(g)
    sigma = factors.sigma
    if k < sigma.size and sigma[k - 1] - sigma[k] < DEGENERATE_GAP_TOL * sigma[0]:
        msg = f"singular values {sigma[k - 1]:.6g} and {sigma[k]:.6g} are tied at k={k}"
        raise DegenerateGapError(msg)
    return factors.u[:, :k] @ factors.v[:, :k].T


def newton_schulz(
    g: Matrix,
    iters: int = NS_DEFAULT_ITERS,
    *,
    coefficients: NewtonSchulzCoefficients = NS_MUON,
) -> Matrix:
    """Approximate ``msign(g)`` with a quintic Newton-Schulz iteration.

    The input is divided by its Frobenius norm first so every singular
    value starts in ``(0, 1]``. A zero input returns zeros.

    Parameters
    ----------
    g : Matrix
        Matrix to orthogonalize.
    iters : int, optional
        Number of polynomial iterations.
    coefficients : NewtonSchulzCoefficients, optional
        Quintic coefficients; :data:`NS_MUON` by default. Pass
        :data:`NS_CONVERGENT` when the iterates must converge to the polar
        factor.

    Returns
    -------
    Matrix
        Approximate polar factor with the shape of *g*.
    """
    validate_positive_int(iters, name="iters")
    norm = frobenius_norm(g)
    if norm <= COLLAPSE_TOL:
        return np.zeros_like(g, dtype=np.float64)
    x = np.asarray(g, dtype=np.float64) / norm
    tall = x.shape[0] > x.shape[1]
    if tall:
        x = x.T
    a, b, c = coefficients.a, coefficients.b, coefficients.c
    for _ in range(iters):
        gram = x @ x.T
        x = a * x + (b * gram + c * (gram @ gram)) @ x
    return x.T if tall else x


def cold_start_cache(
    n: int, k: int, rng: RngStream, *, cold_restarts: int = 0
) -> SpiCache:
    """Build an :class:`SpiCache` from the QR of a Gaussian ``n x k`` draw."""
    validate_positive_int(n, name="n")
    validate_positive_int(k, name="k")
    if k > n:
        msg = f"k={k} exceeds n={n}"
        raise DimensionMismatchError(msg)
    try:
        q, _ = qr_decompose(gaussian_matrix(rng, n, k))
    except RankDeficientError:
        logger.warning("Gaussian SPI start was rank deficient; resampling once")
        q, _ = qr_decompose(gaussian_matrix(rng, n, k))
    return SpiCache(v=q, k=k, cold_restarts=cold_restarts)


def _power_pass(m: Matrix, v: Matrix) -> Matrix:
    """Return the orthonormalized ``m.T @ (m @ v)``."""
    q = m.T @ (m @ v)
    scale = frobenius_norm(q)
    if scale <= COLLAPSE_TOL:
        msg = f"momentum annihilates the cached subspace (norm {scale:.3e})"
        raise RankDeficientError(msg)
    v_new, _ = qr_decompose(q / scale)
    return v_new


def spi_step(
    m: Matrix, cache: SpiCache, rng: RngStream
) -> tuple[PartialOrthogonalization, SpiCache]:
    """Run one warm-started streaming power iteration pass.

    Parameters
    ----------
    m : Matrix
        ``r x n`` momentum matrix.
    cache : SpiCache
        Right subspace from the previous step.
    rng : RngStream
        Caller-owned stream that draws the fresh start of a cold restart.

    Returns
    -------
    tuple[PartialOrthogonalization, SpiCache]
        The partial orthogonalization of *m* and the advanced cache.

    Raises
    ------
    ColdRestartLoopError
        If the pass is rank deficient both from the cached subspace and
        from a fresh Gaussian start.
    """
    rows, cols = m.shape
    if cols != cache.n:
        msg = f"momentum has {cols} columns but the SPI cache tracks n={cache.n}"
        raise DimensionMismatchError(msg)
    if cache.k > min(rows, cols):
        msg = f"SPI rank k={cache.k} exceeds min({rows}, {cols})"
        raise DimensionMismatchError(msg)
    try:
        v_new = _power_pass(m, cache.v)
        next_cache = SpiCache(v_new, cache.k, cache.age + 1, cache.cold_restarts)
    except RankDeficientError as exc:
        logger.debug("SPI cold restart at age %d: %s", cache.age, exc)
        fresh = cold_start_cache(
            cache.n, cache.k, rng, cold_restarts=cache.cold_restarts + 1
        )
        try:
            v_new = _power_pass(m, fresh.v)
        except RankDeficientError as again:
            msg = "streaming power iteration stayed rank deficient after a cold restart"
            raise ColdRestartLoopError(msg) from again
        next_cache = SpiCache(v_new, cache.k, 1, fresh.cold_restarts)
    u = normalize_columns(m @ v_new)
    return PartialOrthogonalization(o=u @ v_new.T, u=u, v=v_new), next_cache


def tracking_error_tangent(v: Matrix, v_star: Matrix, v_perp: Matrix) -> float:
    """Return ``||(v_perp.T v)(v_star.T v)^-1||_2``, the tangent tracking error.

    Returns ``inf`` when ``v_star.T v`` is singular, which happens when the
    tracked subspace has a direction orthogonal to ``span(v_star)``.
    """
    if v.shape != v_star.shape or v_perp.shape[0] != v.shape[0]:
        msg = f"incompatible bases {v.shape}, {v_star.shape}, {v_perp.shape}"
        raise DimensionMismatchError(msg)
    aligned = v_star.T @ v
    if svd_oracle(aligned).sigma[-1] <= SINGULAR_TOL:
        return float("inf")
    leaked = v_perp.T @ v
    if leaked.shape[0] == 0:
        return 0.0
    tangent = np.linalg.solve(aligned.T, leaked.T).T
    return float(svd_oracle(tangent).sigma[0])


def principal_angles(v1: Matrix, v2: Matrix) -> Vector:
    """Return the principal angles (radians, ascending) between two bases.

    Cosines come from ``v1.T v2`` and sines from the part of ``v2`` outside
    ``span(v1)``, so angles near zero keep full precision.
    """
    if v1.shape != v2.shape:
        msg = f"bases must have the same shape, got {v1.shape} and {v2.shape}"
        raise DimensionMismatchError(msg)
    overlap = v1.T @ v2
    cosines = np.clip(svd_oracle(overlap).sigma, 0.0, 1.0)
    sines = np.clip(svd_oracle(v2 - v1 @ overlap).sigma[::-1], 0.0, 1.0)
    return np.arctan2(sines, cosines)


__all__ = [
    "NS_CONVERGENT",
    "NS_DEFAULT_ITERS",
    "NS_MUON",
    "NewtonSchulzCoefficients",
    "NewtonSchulzVariant",
    "PartialOrthogonalization",
    "SpiCache",
    "cold_start_cache",
    "msign_k_oracle",
    "msign_oracle",
    "newton_schulz",
    "principal_angles",
    "spi_step",
    "tracking_error_tangent",
]

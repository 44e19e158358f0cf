"""Zeroth-order gradient estimation.

Two-point randomized gradient estimates (RGE) in the full parameter space
and in a lazily resampled rank-``r`` subspace, plus a Monte-Carlo estimate
of the Gaussian-smoothed objective used by the smoothing-bias checks.

Every loss evaluation is routed through a :class:`~zo_mopi.ledger.QueryLedger`,
so an estimate with ``n_queries = N`` always costs exactly ``2N`` queries.
Both evaluations of one perturbation share the same batch id.
"""

from __future__ import annotations

import dataclasses as dc
import logging
import math
import typing as typ

import numpy as np

from ._validators import (
    validate_non_negative_finite,
    validate_positive_finite,
    validate_positive_int,
)
from .errors import DimensionMismatchError, RankDeficientError
from .ledger import QueryLedger
from .linalg import RngStream, gaussian_matrix, qr_decompose

if typ.TYPE_CHECKING:
    from .linalg import Matrix

logger = logging.getLogger(__name__)

SMOOTHING_PHASE: typ.Final[str] = "smoothing"


class LossFn(typ.Protocol):
    """Deterministic loss of one matrix parameter on one mini-batch."""

    def __call__(self, params: Matrix, batch: int, /) -> float:
        """Return the loss of *params* on batch *batch*."""
        ...


@dc.dataclass(frozen=True, slots=True)
class RgeConfig:
    """Smoothing radius and number of perturbations per estimate.

    Attributes
    ----------
    mu : float
        Smoothing radius, in parameter units.
    n_queries : int
        Number of perturbations ``N``; one estimate costs ``2N`` queries.
    """

    mu: float = 1e-3
    n_queries: int = 4

    def __post_init__(self) -> None:
        """Validate the smoothing radius and query count."""
        validate_positive_finite(self.mu, name="mu")
        validate_positive_int(self.n_queries, name="n_queries")

    @property
    def queries_per_estimate(self) -> int:
        """Return the ledger cost of one estimate."""
        return 2 * self.n_queries


@dc.dataclass(frozen=True, slots=True)
class SubspaceState:
    """Orthonormal sampling basis and its lazy refresh schedule.

    Attributes
    ----------
    a : Matrix
        ``m x r`` basis with orthonormal columns.
    nu : int
        Refresh interval in optimizer steps.
    rng : RngStream
        Stream the basis is drawn from; owned by this state alone.
    steps_since_refresh : int
        Estimates made with the current basis.
    refreshes : int
        Resamples performed after the initial draw.
    """

    a: Matrix
    nu: int
    rng: RngStream
    steps_since_refresh: int = 0
    refreshes: int = 0

    def __post_init__(self) -> None:
        """Check the basis shape and schedule."""
        validate_positive_int(self.nu, name="nu")
        m, r = self.a.shape
        if not 1 <= r <= m:
            msg = f"subspace basis must satisfy 1 <= r <= m, got {m}x{r}"
            raise DimensionMismatchError(msg)

    @property
    def m(self) -> int:
        """Return the ambient row dimension."""
        return int(self.a.shape[0])

    @property
    def r(self) -> int:
        """Return the subspace rank."""
        return int(self.a.shape[1])


def _sample_basis(m: int, r: int, rng: RngStream) -> Matrix:
    try:
        q, _ = qr_decompose(gaussian_matrix(rng, m, r))
    except RankDeficientError:
        logger.warning(
            "Gaussian %dx%d subspace draw was rank deficient; resampling", m, r
        )
        q, _ = qr_decompose(gaussian_matrix(rng, m, r))
    return q


def create_subspace(m: int, r: int, nu: int, rng: RngStream) -> SubspaceState:
    """Draw the initial ``m x r`` orthonormal basis."""
    validate_positive_int(m, name="m")
    validate_positive_int(r, name="r")
    if r > m:
        msg = f"subspace rank r={r} exceeds m={m}"
        raise DimensionMismatchError(msg)
    return SubspaceState(a=_sample_basis(m, r, rng), nu=nu, rng=rng)


def refresh_due(sub: SubspaceState) -> bool:
    """Return whether the basis must be resampled before the next estimate."""
    return sub.steps_since_refresh >= sub.nu


def advance_subspace(sub: SubspaceState) -> SubspaceState:
    """Count one estimate made with the current basis."""
    return dc.replace(sub, steps_since_refresh=sub.steps_since_refresh + 1)


def refresh_subspace(sub: SubspaceState) -> tuple[SubspaceState, Matrix]:
    """Resample the basis and return the new state with the old basis.

    The old basis lets the caller carry momentum into the new subspace.
    """
    a_new = _sample_basis(sub.m, sub.r, sub.rng)
    refreshes = sub.refreshes + 1
    logger.debug("Refreshed %dx%d subspace (refresh %d)", sub.m, sub.r, refreshes)
    refreshed = dc.replace(sub, a=a_new, steps_since_refresh=0, refreshes=refreshes)
    return refreshed, sub.a


def _check_finite_params(x: Matrix) -> None:
    if not np.all(np.isfinite(x)):
        msg = "parameters must be finite"
        raise ValueError(msg)


def rge_full(
    loss: LossFn,
    x: Matrix,
    cfg: RgeConfig,
    batch: int,
    rng: RngStream,
    ledger: QueryLedger,
) -> Matrix:
    """Return the full-space two-point RGE of ``grad f(x)``.

    Parameters
    ----------
    loss : LossFn
        Objective evaluated at perturbed points.
    x : Matrix
        Current ``m x n`` parameters.
    cfg : RgeConfig
        Smoothing radius and perturbation count.
    batch : int
        Mini-batch id shared by every evaluation of this estimate.
    rng : RngStream
        Stream the Gaussian perturbations are drawn from.
    ledger : QueryLedger
        Charged exactly ``2 * cfg.n_queries`` times.

    Returns
    -------
    Matrix
        ``m x n`` estimate.
    """
    _check_finite_params(x)
    m, n = x.shape
    estimate = np.zeros((m, n))
    for _ in range(cfg.n_queries):
        z = gaussian_matrix(rng, m, n)
        plus = ledger.evaluate(loss, x + cfg.mu * z, batch)
        minus = ledger.evaluate(loss, x - cfg.mu * z, batch)
        estimate += ((plus - minus) / (2.0 * cfg.mu)) * z
    return estimate / cfg.n_queries


def rge_subspace(
    loss: LossFn,
    x: Matrix,
    sub: SubspaceState,
    cfg: RgeConfig,
    batch: int,
    rng: RngStream,
    ledger: QueryLedger,
) -> Matrix:
    """Return the reduced ``r x n`` RGE with perturbations ``a @ B``.

    The estimate lives in the coordinates of ``sub.a``; use
    :func:`reconstruct_full` for a full-space view.
    """
    _check_finite_params(x)
    m, n = x.shape
    if m != sub.m:
        msg = f"parameters have {m} rows but the subspace basis has {sub.m}"
        raise DimensionMismatchError(msg)
    estimate = np.zeros((sub.r, n))
    for _ in range(cfg.n_queries):
        b = gaussian_matrix(rng, sub.r, n)
        direction = sub.a @ b
        plus = ledger.evaluate(loss, x + cfg.mu * direction, batch)
        minus = ledger.evaluate(loss, x - cfg.mu * direction, batch)
        estimate += ((plus - minus) / (2.0 * cfg.mu)) * b
    return estimate / cfg.n_queries


def reconstruct_full(a: Matrix, g_hat: Matrix) -> Matrix:
    """Return the full-space view ``a @ g_hat`` of a reduced estimate.

    Used only for logging and diagnostics.
    """
    if a.shape[1] != g_hat.shape[0]:
        msg = f"cannot lift a {g_hat.shape} estimate with a {a.shape} basis"
        raise DimensionMismatchError(msg)
    return a @ g_hat


def smoothed_loss_mc(
    loss: LossFn,
    x: Matrix,
    mu: float,
    samples: int,
    rng: RngStream,
    *,
    batch: int = 0,
    ledger: QueryLedger | None = None,
) -> tuple[float, float]:
    """Estimate ``E[f(x + mu U)]`` over Gaussian ``U``.

    Returns
    -------
    tuple[float, float]
        Sample mean and its standard error. With ``mu == 0`` this is
        ``f(x)`` from a single evaluation and a zero standard error.
    """
    validate_non_negative_finite(mu, name="mu")
    validate_positive_int(samples, name="samples")
    if samples < 2:
        msg = "samples must be >= 2"
        raise ValueError(msg)
    book = ledger if ledger is not None else QueryLedger()
    if mu == 0.0:
        return book.evaluate(loss, x, batch, SMOOTHING_PHASE), 0.0
    m, n = x.shape
    values = np.empty(samples)
    for i in range(samples):
        shifted = x + mu * gaussian_matrix(rng, m, n)
        values[i] = book.evaluate(loss, shifted, batch, SMOOTHING_PHASE)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(samples))


def smoothing_bias_bound(smoothness: float, mu: float, dim: int) -> float:
    """Return the bound ``L * mu**2 * dim / 2`` on ``|f_mu(x) - f(x)|``.

    For an ``L``-smooth ``f`` and standard Gaussian ``U`` in ``dim``
    dimensions, ``E ||U||^2 = dim``; the familiar ``L mu^2 / 2`` is the
    ``dim = 1`` (unit second moment) case.
    """
    validate_non_negative_finite(smoothness, name="smoothness")
    validate_non_negative_finite(mu, name="mu")
    validate_positive_int(dim, name="dim")
    return 0.5 * smoothness * mu * mu * dim


__all__ = [
    "LossFn",
    "RgeConfig",
    "SubspaceState",
    "advance_subspace",
    "create_subspace",
    "reconstruct_full",
    "refresh_due",
    "refresh_subspace",
    "rge_full",
    "rge_subspace",
    "smoothed_loss_mc",
    "smoothing_bias_bound",
]

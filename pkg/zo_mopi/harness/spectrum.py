"""First-order versus zeroth-order gradient spectra at one point.

Both gradients are taken on the same mini-batch at the same parameters.
The zeroth-order side is either a full-space RGE or the full-space view
``a @ g_hat`` of a subspace estimate, so the comparison shows how much of
the estimate's mass lands outside the dominant directions of the true
gradient.
"""

from __future__ import annotations

import csv
import dataclasses as dc
import logging
import math
import typing as typ

import numpy as np

from zo_mopi.estimator import (
    RgeConfig,
    create_subspace,
    reconstruct_full,
    rge_full,
    rge_subspace,
)
from zo_mopi.ledger import QueryLedger
from zo_mopi.linalg import RngStream, StreamId, svd_oracle
from zo_mopi.objectives import layer_loss
from zo_mopi.optimizers import MezoConfig, ZoMopiConfig, ZoMuonConfig

if typ.TYPE_CHECKING:
    from pathlib import Path

    from zo_mopi.estimator import SubspaceState
    from zo_mopi.linalg import Vector
    from zo_mopi.objectives import Objective, Params

    from .config import ExperimentConfig

logger = logging.getLogger(__name__)

HEAD_FRACTION: typ.Final[float] = 0.1
DEGENERATE_MASS: typ.Final[float] = 1e-12


@dc.dataclass(frozen=True, slots=True)
class SpectrumReport:
    """Singular values and tail masses of the two gradients.

    ``degenerate`` is set when either spectrum sums to (almost) zero; the
    corresponding tail mass is then NaN.
    """

    fo_sigma: Vector
    zo_sigma: Vector
    tail_mass_fo: float
    tail_mass_zo: float
    k0: int
    degenerate: bool


def head_size(shape: tuple[int, int]) -> int:
    """Return ``ceil(0.1 * min(m, n))``, the number of head singular values."""
    return math.ceil(HEAD_FRACTION * min(shape))


def tail_mass(sigma: Vector, k0: int) -> float:
    """Return the share of ``sum(sigma)`` beyond the first *k0* values."""
    total = float(np.sum(sigma))
    if total <= DEGENERATE_MASS:
        return math.nan
    return float(np.sum(sigma[k0:])) / total


def spectrum_report(  # noqa: PLR0913, RUF100 - mirrors the estimator call
    obj: Objective,
    params: Params,
    batch: int,
    sub: SubspaceState | None,
    cfg: RgeConfig,
    rng: RngStream,
    *,
    layer: int = 0,
    ledger: QueryLedger | None = None,
) -> SpectrumReport:
    """Compare the spectra of the analytic and estimated gradients.

    Parameters
    ----------
    obj : Objective
        Objective with an analytic gradient.
    params : Params
        Parameter point shared by both gradients.
    batch : int
        Mini-batch shared by both gradients.
    sub : SubspaceState | None
        Basis for a subspace estimate, or ``None`` for full-space RGE.
    cfg : RgeConfig
        Smoothing radius and perturbation count of the estimate.
    rng : RngStream
        Perturbation stream.
    layer : int
        Which matrix parameter to analyse.
    ledger : QueryLedger | None
        Ledger charged for the estimate; a private one by default.
    """
    book = ledger if ledger is not None else QueryLedger()
    x = params[layer]
    loss = layer_loss(obj, params, layer)
    fo = obj.gradient(params, batch)[layer]
    if sub is None:
        zo = rge_full(loss, x, cfg, batch, rng, book)
    else:
        zo = reconstruct_full(sub.a, rge_subspace(loss, x, sub, cfg, batch, rng, book))
    k0 = head_size(x.shape)
    fo_sigma = svd_oracle(fo).sigma
    zo_sigma = svd_oracle(zo).sigma
    report = SpectrumReport(
        fo_sigma=fo_sigma,
        zo_sigma=zo_sigma,
        tail_mass_fo=tail_mass(fo_sigma, k0),
        tail_mass_zo=tail_mass(zo_sigma, k0),
        k0=k0,
        degenerate=False,
    )
    if math.isnan(report.tail_mass_fo) or math.isnan(report.tail_mass_zo):
        logger.warning("Degenerate gradient spectrum at batch %d", batch)
        report = dc.replace(report, degenerate=True)
    return report


def spectrum_for_config(cfg: ExperimentConfig, seed: int) -> SpectrumReport:
    """Build the report for *cfg*'s objective at its initial point for *seed*.

    Optimizers with a subspace rank (ZO-MOPI, ZO-Muon) estimate in a fresh
    rank-``r`` subspace; MeZO uses full-space RGE. FO-Muon has no estimate.
    """
    obj = cfg.objective.build()
    params = obj.initial_params(seed)
    optimizer = cfg.optimizer.config
    m, _ = params[0].shape
    sub: SubspaceState | None = None
    match optimizer:
        case ZoMopiConfig(r=r, nu=nu) | ZoMuonConfig(r=r, nu=nu):
            sub_rng = RngStream(seed, StreamId.DIAGNOSTIC).split(0)
            sub = create_subspace(m, min(r, m), nu, sub_rng)
        case MezoConfig():
            pass
        case _:
            msg = f"{cfg.optimizer.kind} has no zeroth-order estimate"
            raise ValueError(msg)
    rge = RgeConfig(mu=optimizer.mu, n_queries=optimizer.n_queries)
    rng = RngStream(seed, StreamId.DIAGNOSTIC).split(1)
    return spectrum_report(obj, params, 0, sub, rge, rng)


def emit_spectrum_csv(report: SpectrumReport, path: Path) -> Path:
    """Write ``index,fo_sigma,zo_sigma`` rows for *report* to *path*."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("index", "fo_sigma", "zo_sigma"))
        pairs = zip(report.fo_sigma, report.zo_sigma, strict=True)
        for i, (fo, zo) in enumerate(pairs):
            writer.writerow((i, format(float(fo), ".17g"), format(float(zo), ".17g")))
    return path


__all__ = [
    "HEAD_FRACTION",
    "SpectrumReport",
    "emit_spectrum_csv",
    "head_size",
    "spectrum_for_config",
    "spectrum_report",
    "tail_mass",
]

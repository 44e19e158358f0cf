"""Fast in-library invariant checks behind ``zo-mopi selftest``."""

from __future__ import annotations

import collections.abc as cabc
import dataclasses as dc
import itertools
import logging
import math
import tempfile
import time
import typing as typ
from pathlib import Path

import numpy as np

from zo_mopi.errors import ZoMopiError
from zo_mopi.ledger import QueryLedger
from zo_mopi.linalg import (
    RngStream,
    StreamId,
    frobenius_norm,
    orthogonal_complement,
    orthonormality_error,
    qr_decompose,
    svd_oracle,
)
from zo_mopi.objectives import MatrixQuadratic
from zo_mopi.optimizers import ZoMopiConfig, ZoMopiOptimizer
from zo_mopi.spectral import (
    NS_CONVERGENT,
    cold_start_cache,
    msign_k_oracle,
    msign_oracle,
    newton_schulz,
    spi_step,
    tracking_error_tangent,
)

from .trajectory import TrajectoryRecord, emit_csv, read_csv

if typ.TYPE_CHECKING:
    from zo_mopi.linalg import Matrix, Vector

logger = logging.getLogger(__name__)

PLANTED_HEAD: typ.Final[tuple[float, ...]] = (8.0, 6.0, 4.0, 2.0)
"""Top singular values of the planted SPI test matrix; gamma = (1/2)^2."""


class SelfTestFailure(ZoMopiError):
    """A self-test check observed a violated invariant."""


def _require(condition: bool, message: str) -> None:  # noqa: FBT001
    if not condition:
        raise SelfTestFailure(message)


@dc.dataclass(frozen=True, slots=True)
class CheckResult:
    """Outcome of one self-test check."""

    name: str
    passed: bool
    detail: str
    elapsed_ms: float


def planted_matrix(rng: RngStream, rows: int, cols: int, sigma: Vector) -> Matrix:
    """Return ``U diag(sigma) V^T`` with random orthonormal ``U`` and ``V``."""
    u, _ = qr_decompose(rng.normal(rows, sigma.size))
    v, _ = qr_decompose(rng.normal(cols, sigma.size))
    return (u * sigma) @ v.T


def planted_gap_spectrum(rows: int, cols: int) -> Vector:
    """Return a spectrum whose head is :data:`PLANTED_HEAD` and tail starts at 1."""
    tail = np.linspace(1.0, 0.1, min(rows, cols) - len(PLANTED_HEAD))
    return np.concatenate([np.asarray(PLANTED_HEAD), tail])


def _check_qr(rng: RngStream) -> str:
    m = rng.normal(32, 16)
    q, r = qr_decompose(m)
    err = max(frobenius_norm(q @ r - m), orthonormality_error(q))
    _require(err <= 1e-10, f"QR error {err:.3e}")
    return f"max error {err:.1e}"


def _check_svd(rng: RngStream) -> str:
    m = rng.normal(24, 16)
    factors = svd_oracle(m)
    err = frobenius_norm(factors.reconstruct() - m)
    _require(err <= 1e-10, f"reconstruction error {err:.3e}")
    _require(bool(np.all(np.diff(factors.sigma) <= 0.0)), "singular values not sorted")
    return f"reconstruction error {err:.1e}"


def _check_lossless(rng: RngStream) -> str:
    worst = 0.0
    for _ in range(10):
        a, _ = qr_decompose(rng.normal(64, 16))
        m = rng.normal(16, 48)
        lifted = a @ msign_k_oracle(a.T @ a @ m, 8)
        worst = max(worst, frobenius_norm(lifted - msign_k_oracle(a @ m, 8)))
    _require(worst <= 1e-8, f"lifted rank-k sign differs by {worst:.3e}")
    return f"worst difference {worst:.1e}"


def _check_spi_convergence(rng: RngStream) -> str:
    m = planted_matrix(rng, 32, 48, planted_gap_spectrum(32, 48))
    target = msign_k_oracle(m, len(PLANTED_HEAD))
    cache = cold_start_cache(48, len(PLANTED_HEAD), rng)
    for _ in range(50):
        result, cache = spi_step(m, cache, rng)
    err = frobenius_norm(result.o - target)
    _require(err <= 1e-6, f"SPI is {err:.3e} from the oracle")
    return f"distance to oracle {err:.1e}"


def _check_spi_contraction(rng: RngStream) -> str:
    k = len(PLANTED_HEAD)
    gamma = (1.0 / PLANTED_HEAD[-1]) ** 2
    m = planted_matrix(rng, 32, 48, planted_gap_spectrum(32, 48))
    v_star = svd_oracle(m).v[:, :k]
    v_perp = orthogonal_complement(v_star)
    cache = cold_start_cache(48, k, rng)
    previous = tracking_error_tangent(cache.v, v_star, v_perp)
    worst = 0.0
    for _ in range(30):
        _, cache = spi_step(m, cache, rng)
        current = tracking_error_tangent(cache.v, v_star, v_perp)
        if 1e-12 < previous < 0.5:  # noqa: PLR2004
            worst = max(worst, current / previous)
        previous = current
    _require(worst <= gamma + 0.02, f"contraction ratio {worst:.3f} > {gamma}")
    return f"worst ratio {worst:.3f} (gamma {gamma:.2f})"


def _check_newton_schulz(rng: RngStream) -> str:
    g = planted_matrix(rng, 32, 32, np.linspace(1.0, 0.5, 32))
    polar = msign_oracle(g)
    distances = [
        frobenius_norm(newton_schulz(g, iters, coefficients=NS_CONVERGENT) - polar)
        for iters in range(1, 9)
    ]
    _require(
        all(b <= a + 1e-12 for a, b in itertools.pairwise(distances)),
        f"distance to polar factor not monotone: {distances}",
    )
    return f"distance after 8 iterations {distances[-1]:.1e}"


def _check_update_norm(rng: RngStream) -> str:
    del rng
    quad = MatrixQuadratic.create(32, 32, seed=3, x_star_scale=1.0 / 16)
    cfg = ZoMopiConfig(eta=1e-2, r=16, k=8, nu=10)
    optimizer = ZoMopiOptimizer.create(cfg, (32, 32), seed=3)
    ledger = QueryLedger()
    x = quad.initial_params(0)[0]
    worst = 0.0
    for step in range(5):
        result = optimizer.step(x, quad, step, ledger)
        worst = max(worst, abs(result.update_norm - cfg.eta * math.sqrt(cfg.k)))
        x = result.x
    expected = 5 * cfg.rge.queries_per_estimate
    _require(worst <= 1e-8, f"update norm off by {worst:.3e}")
    _require(ledger.total == expected, f"ledger {ledger.total} != {expected}")
    return f"norm error {worst:.1e}, {ledger.total} queries"


def _check_csv_round_trip(rng: RngStream) -> str:
    values = rng.normal(10, 3)
    records = [
        TrajectoryRecord(i, 8 * i, float(a), float(b), float(abs(c)), 0.0)
        for i, (a, b, c) in enumerate(values)
    ]
    with tempfile.TemporaryDirectory() as tmp:
        back = read_csv(emit_csv(records, Path(tmp) / "round.csv"))
    _require(back == records, "CSV round trip changed values")
    return f"{len(records)} records exact"


CHECKS: typ.Final[tuple[tuple[str, cabc.Callable[[RngStream], str]], ...]] = (
    ("qr", _check_qr),
    ("svd", _check_svd),
    ("rank-k lossless lift", _check_lossless),
    ("spi convergence", _check_spi_convergence),
    ("spi contraction", _check_spi_contraction),
    ("newton-schulz monotone", _check_newton_schulz),
    ("update norm and ledger", _check_update_norm),
    ("csv round trip", _check_csv_round_trip),
)


def run_selftest(seed: int = 0) -> list[CheckResult]:
    """Run every check in :data:`CHECKS` and collect the outcomes."""
    results = []
    for index, (name, check) in enumerate(CHECKS):
        rng = RngStream(seed, StreamId.DIAGNOSTIC).split(index)
        started = time.perf_counter()
        try:
            detail, passed = check(rng), True
        except ZoMopiError as exc:
            detail, passed = str(exc), False
            logger.warning("Self-test %s failed: %s", name, exc)
        elapsed = (time.perf_counter() - started) * 1000.0
        results.append(CheckResult(name, passed, detail, elapsed))
    return results


def render_results(results: cabc.Sequence[CheckResult]) -> str:
    """Return a pass/fail table."""
    width = max(len(r.name) for r in results)
    lines = [
        f"{'PASS' if r.passed else 'FAIL'}  {r.name.ljust(width)}  {r.detail}"
        for r in results
    ]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"


__all__ = [
    "CHECKS",
    "PLANTED_HEAD",
    "CheckResult",
    "SelfTestFailure",
    "planted_gap_spectrum",
    "planted_matrix",
    "render_results",
    "run_selftest",
]

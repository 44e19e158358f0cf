"""Step definitions for partial orthogonalization and subspace tracking."""

from __future__ import annotations

import dataclasses as dc
import itertools
import typing as typ

from pytest_bdd import given, parsers, then, when

from tests.helpers.planted import HEAD_RANK, PLANTED_GAMMA, drifting_frames
from zo_mopi.harness.selftest import planted_gap_spectrum, planted_matrix
from zo_mopi.linalg import (
    RngStream,
    StreamId,
    frobenius_norm,
    orthogonal_complement,
    qr_decompose,
    svd_oracle,
)
from zo_mopi.spectral import (
    cold_start_cache,
    msign_k_oracle,
    spi_step,
    tracking_error_tangent,
)

if typ.TYPE_CHECKING:
    from zo_mopi.linalg import Matrix

SPI_STEADY_FROM: typ.Final[int] = 30


@dc.dataclass(frozen=True, slots=True)
class LiftCase:
    """An orthonormal basis and a reduced matrix living in its span."""

    a: Matrix
    reduced: Matrix


@dc.dataclass(frozen=True, slots=True)
class SpiRun:
    """Outputs and tangent errors of one cold-started power iteration."""

    final_o: Matrix
    errors: tuple[float, ...]


@given(
    parsers.cfparse(
        "{count:d} random {m:d}x{r:d} orthonormal bases "
        "with {rows:d}x{n:d} reduced matrices"
    ),
    target_fixture="lift_cases",
)
def lift_cases(count: int, m: int, r: int, rows: int, n: int) -> list[LiftCase]:
    """Draw bases and reduced matrices from a diagnostic stream."""
    assert rows == r
    rng = RngStream(0, StreamId.DIAGNOSTIC)
    cases = []
    for _ in range(count):
        a, _ = qr_decompose(rng.normal(m, r))
        cases.append(LiftCase(a=a, reduced=rng.normal(r, n)))
    return cases


@when(
    parsers.cfparse(
        "the rank-{k:d} sign of each reduced matrix is lifted through its basis"
    ),
    target_fixture="lift_errors",
)
def lift_errors(lift_cases: list[LiftCase], k: int) -> list[float]:
    """Compare lifted and full-space rank-k signs."""
    return [
        frobenius_norm(
            case.a @ msign_k_oracle(case.a.T @ case.a @ case.reduced, k)
            - msign_k_oracle(case.a @ case.reduced, k)
        )
        for case in lift_cases
    ]


@then(
    parsers.cfparse(
        "every lift matches the full-space rank-{k:d} sign within {tol:g}"
    )
)
def lifts_match(lift_errors: list[float], k: int, tol: float) -> None:
    """Assert the lift is lossless for every case."""
    assert k > 0
    assert max(lift_errors) <= tol


@given(
    parsers.cfparse(
        "a planted {rows:d}x{cols:d} matrix with a head of {k:d} "
        "and spectral gap {gamma:g}"
    ),
    target_fixture="planted",
)
def planted(rows: int, cols: int, k: int, gamma: float) -> Matrix:
    """Plant the gap spectrum shared with the self-test."""
    assert k == HEAD_RANK
    assert abs(gamma - PLANTED_GAMMA) < 1e-12
    rng = RngStream(7, StreamId.DIAGNOSTIC)
    return planted_matrix(rng, rows, cols, planted_gap_spectrum(rows, cols))


@when(
    parsers.cfparse(
        "{passes:d} power iteration passes run from each of {starts:d} cold starts"
    ),
    target_fixture="spi_runs",
)
def spi_runs(planted: Matrix, passes: int, starts: int) -> list[SpiRun]:
    """Run power iteration on the static matrix from independent starts."""
    _, cols = planted.shape
    v_star = svd_oracle(planted).v[:, :HEAD_RANK]
    v_perp = orthogonal_complement(v_star)
    runs = []
    for start in range(starts):
        restarts = RngStream(start, StreamId.SPI)
        cache = cold_start_cache(cols, HEAD_RANK, restarts)
        errors = [tracking_error_tangent(cache.v, v_star, v_perp)]
        o = planted
        for _ in range(passes):
            result, cache = spi_step(planted, cache, restarts)
            o = result.o
            errors.append(tracking_error_tangent(cache.v, v_star, v_perp))
        runs.append(SpiRun(final_o=o, errors=tuple(errors)))
    return runs


@then(parsers.cfparse("every start ends within {tol:g} of the rank-{k:d} sign"))
def converged(planted: Matrix, spi_runs: list[SpiRun], tol: float, k: int) -> None:
    """Assert every final partial orthogonalization matches the oracle."""
    target = msign_k_oracle(planted, k)
    distances = [frobenius_norm(run.final_o - target) for run in spi_runs]
    assert max(distances) <= tol, distances


@then(
    parsers.cfparse(
        "every tangent error ratio below an error of {cap:g} is at most {bound:g}"
    )
)
def contracts(spi_runs: list[SpiRun], cap: float, bound: float) -> None:
    """Assert each pass shrinks a small tangent error by the gap."""
    ratios = [
        after / before
        for run in spi_runs
        for before, after in itertools.pairwise(run.errors)
        if 1e-12 < before < cap
    ]
    assert ratios
    assert max(ratios) <= bound


@when(
    parsers.cfparse(
        "power iteration follows a {rows:d}x{cols:d} head rotating by {delta:g} "
        "per step for {steps:d} steps over {seeds:d} seeds"
    ),
    target_fixture="drift_errors",
)
def drift_errors(
    rows: int, cols: int, delta: float, steps: int, seeds: int
) -> dict[str, typ.Any]:
    """Track a head subspace that turns by *delta* between passes."""
    histories = []
    for seed in range(seeds):
        rng = RngStream(seed, StreamId.DIAGNOSTIC)
        cache = cold_start_cache(cols, HEAD_RANK, rng.split(1))
        restarts = rng.split(2)
        errors = []
        for frame in drifting_frames(rng.split(0), rows, cols, delta, steps):
            _, cache = spi_step(frame.m, cache, restarts)
            errors.append(tracking_error_tangent(cache.v, frame.v_star, frame.v_perp))
        histories.append(errors)
    return {"delta": delta, "histories": histories}


@then(
    "the tangent error from step 30 on stays within "
    "twice gamma delta over one minus gamma"
)
def drift_bounded(drift_errors: dict[str, typ.Any]) -> None:
    """Assert the steady-state error respects the drift bound."""
    gamma = PLANTED_GAMMA
    bound = 2.0 * gamma * drift_errors["delta"] / (1.0 - gamma)
    worst = max(max(h[SPI_STEADY_FROM:]) for h in drift_errors["histories"])
    assert worst <= bound, worst

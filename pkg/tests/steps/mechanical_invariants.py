"""Step definitions for run-level mechanical invariants."""

from __future__ import annotations

import math
import typing as typ

from pytest_bdd import given, parsers, then, when

from tests.helpers.experiments import suite_experiment, suite_objective
from zo_mopi.harness.runner import run_experiment, trajectory_path, write_experiment
from zo_mopi.harness.trajectory import read_csv
from zo_mopi.optimizers import ZoMopiConfig

if typ.TYPE_CHECKING:
    from pathlib import Path

    from zo_mopi.harness.config import ExperimentConfig
    from zo_mopi.harness.runner import TrialResult


@given(
    parsers.cfparse(
        "a ZO-MOPI run on the {rows:d}x{cols:d} {suite} suite "
        "with seeds {a:d} and {b:d}"
    ),
    target_fixture="experiment",
)
def experiment(suite: str, rows: int, cols: int, a: int, b: int) -> ExperimentConfig:
    """Return the suite configuration for two seeds."""
    return suite_experiment(suite_objective(suite, rows, cols), "zo-mopi", (a, b))


@when("the run completes", target_fixture="results")
def results(experiment: ExperimentConfig) -> list[TrialResult]:
    """Run every seed."""
    return run_experiment(experiment)


@then(
    parsers.cfparse(
        "every recorded update norm equals eta times root k within {tol:g}"
    )
)
def fixed_update_norm(
    experiment: ExperimentConfig, results: list[TrialResult], tol: float
) -> None:
    """Assert the normalized step law on every record after the start."""
    cfg = experiment.optimizer.config
    assert isinstance(cfg, ZoMopiConfig)
    expected = cfg.eta * math.sqrt(cfg.k)
    for result in results:
        assert result.ok, result.error
        for record in result.records[1:]:
            assert abs(record.update_norm - expected) <= tol


@then("every seed spent exactly its budget on estimates")
def budget_spent(experiment: ExperimentConfig, results: list[TrialResult]) -> None:
    """Assert the ledger matches the budget with nothing else charged."""
    for result in results:
        assert dict(result.queries) == {"estimate": experiment.budget}
        assert result.records[-1].cumulative_queries == experiment.budget


@when("the run is written twice", target_fixture="written")
def written(experiment: ExperimentConfig, tmp_path: Path) -> tuple[Path, Path]:
    """Run and write the experiment into two separate roots."""
    first = write_experiment(experiment, run_experiment(experiment), tmp_path / "a")
    second = write_experiment(experiment, run_experiment(experiment), tmp_path / "b")
    return first, second


@then("the trajectory files are byte-identical")
def byte_identical(experiment: ExperimentConfig, written: tuple[Path, Path]) -> None:
    """Assert reruns reproduce every CSV exactly."""
    first, second = written
    for seed in experiment.seeds:
        a = trajectory_path(first, experiment, seed).read_bytes()
        b = trajectory_path(second, experiment, seed).read_bytes()
        assert a == b


@then("every trajectory file reads back to the recorded values")
def reads_back(experiment: ExperimentConfig, written: tuple[Path, Path]) -> None:
    """Assert the CSV round trip is exact."""
    records = {r.seed: r.records for r in run_experiment(experiment)}
    for seed in experiment.seeds:
        path = trajectory_path(written[0], experiment, seed)
        assert tuple(read_csv(path)) == records[seed]

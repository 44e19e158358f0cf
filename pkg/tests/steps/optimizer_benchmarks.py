"""Step definitions for equal-budget optimizer benchmarks."""

from __future__ import annotations

import dataclasses as dc
import typing as typ

from pytest_bdd import given, parsers, then, when

from tests.helpers.experiments import (
    median_final_loss,
    run_set,
    suite_experiment,
    suite_objective,
)
from zo_mopi.harness.compare import (
    assert_comparable,
    common_target,
    compare_budget_to_target,
)

if typ.TYPE_CHECKING:
    from zo_mopi.harness.compare import ComparisonTable, RunSet


@dc.dataclass(frozen=True, slots=True)
class Suite:
    """Objective and seeds shared by every run of a benchmark."""

    objective: dict[str, typ.Any]
    seeds: tuple[int, ...]

    def run(self, kind: str, **optimizer: object) -> RunSet:
        """Run *kind* on this suite's objective and seeds."""
        return run_set(suite_experiment(self.objective, kind, self.seeds, **optimizer))


@given(
    parsers.cfparse("the {rows:d}x{cols:d} {name} suite over {count:d} seeds"),
    target_fixture="suite",
)
def suite(rows: int, cols: int, name: str, count: int) -> Suite:
    """Fix the objective and the seeds every setting is run with."""
    return Suite(suite_objective(name, rows, cols), tuple(range(count)))


@when(
    parsers.cfparse(
        "ZO-MOPI runs with {knob} {first:g} and with {knob2} {second:g}"
    ),
    target_fixture="ablation",
)
def ablation(
    suite: Suite, knob: str, first: float, knob2: str, second: float
) -> tuple[RunSet, RunSet]:
    """Run ZO-MOPI twice, changing one hyperparameter."""
    assert knob == knob2
    cast = int if knob == "nu" else float
    return (
        suite.run("zo-mopi", **{knob: cast(first)}),
        suite.run("zo-mopi", **{knob: cast(second)}),
    )


@then("the median final loss of the first setting is lower")
def first_is_lower(ablation: tuple[RunSet, RunSet]) -> None:
    """Assert the first setting ends strictly lower."""
    first, second = (median_final_loss(runs) for runs in ablation)
    assert first < second, (first, second)


@then("the median final loss of the first setting is no higher")
def first_is_no_higher(ablation: tuple[RunSet, RunSet]) -> None:
    """Assert the first setting ends no higher."""
    first, second = (median_final_loss(runs) for runs in ablation)
    assert first <= second, (first, second)


@when(
    parsers.cfparse("{a}, {b} and {c} run on the same budget"),
    target_fixture="comparison",
)
def comparison(suite: Suite, a: str, b: str, c: str) -> ComparisonTable:
    """Run every method and tabulate queries to the common target."""
    runs = [suite.run(kind) for kind in (a, b, c)]
    assert_comparable(runs)
    return compare_budget_to_target(runs, common_target(runs))


@then(
    parsers.cfparse(
        "{method} needs at most {bound:g} of the median queries of {baseline}"
    )
)
def needs_fewer_queries(
    comparison: ComparisonTable, method: str, bound: float, baseline: str
) -> None:
    """Assert the median queries-to-target ratio is within *bound*."""
    ratio = comparison.ratio(method, baseline)
    assert ratio is not None
    assert ratio <= bound, (ratio, comparison.rows)

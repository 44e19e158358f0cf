"""Queries-to-target tables across methods.

A comparison groups per-seed trajectories by method label. For each seed
the first cumulative-query count at which the eval loss reaches the target
is taken; a seed that never reaches it counts as infinitely many queries,
and a method whose median is infinite is reported as ``N/A``.
"""

from __future__ import annotations

import csv
import dataclasses as dc
import io
import json
import logging
import math
import typing as typ

import numpy as np

from zo_mopi.errors import ConfigInvalidError

from .runner import SUMMARY_FILE
from .trajectory import read_csv

if typ.TYPE_CHECKING:
    import collections.abc as cabc
    from pathlib import Path

    from .trajectory import TrajectoryRecord

    type Trajectory = cabc.Sequence[TrajectoryRecord]

logger = logging.getLogger(__name__)

NOT_AVAILABLE: typ.Final[str] = "N/A"
REFERENCE_METHOD: typ.Final[str] = "zo-mopi"


@dc.dataclass(frozen=True, slots=True)
class RunSet:
    """Per-seed trajectories of one method plus what makes runs comparable."""

    method: str
    trajectories: tuple[tuple[TrajectoryRecord, ...], ...]
    budget: int | None = None
    objective: cabc.Mapping[str, typ.Any] | None = None


@dc.dataclass(frozen=True, slots=True)
class ComparisonRow:
    """Queries-to-target of one method."""

    method: str
    per_seed: tuple[int | None, ...]

    @property
    def reached(self) -> int:
        """Return how many seeds reached the target."""
        return sum(q is not None for q in self.per_seed)

    @property
    def median(self) -> float | None:
        """Return the median over seeds, or ``None`` if it is unreached."""
        values = [math.inf if q is None else float(q) for q in self.per_seed]
        if not values:
            return None
        med = float(np.median(values))
        return None if math.isinf(med) else med


@dc.dataclass(frozen=True, slots=True)
class ComparisonTable:
    """Rows of a comparison at one shared target loss."""

    target: float
    rows: tuple[ComparisonRow, ...]

    def row(self, method: str) -> ComparisonRow:
        """Return the row for *method*."""
        for row in self.rows:
            if row.method == method:
                return row
        have = [r.method for r in self.rows]
        msg = f"no method {method!r} in comparison (have {have})"
        raise KeyError(msg)

    def ratio(self, method: str, baseline: str) -> float | None:
        """Return ``median(method) / median(baseline)``.

        ``None`` when *method* did not reach the target; ``0.0`` when only
        the baseline failed to reach it.
        """
        num = self.row(method).median
        den = self.row(baseline).median
        if num is None:
            return None
        if den is None:
            return 0.0
        if den == 0.0:
            return 1.0 if num == 0.0 else math.inf
        return num / den

    def reference_method(self, preferred: str = REFERENCE_METHOD) -> str:
        """Return *preferred* when it has a row, else the first method."""
        methods = [row.method for row in self.rows]
        if preferred in methods or not methods:
            return preferred
        return methods[0]


def queries_to_target(records: Trajectory, target: float) -> int | None:
    """Return the first cumulative-query count with ``eval_loss <= target``."""
    for record in records:
        if record.eval_loss <= target:
            return record.cumulative_queries
    return None


def common_target(runs: cabc.Iterable[RunSet]) -> float:
    """Return the loss every run reaches: the maximum of per-run minima.

    Raises
    ------
    ValueError
        If there are no records to compare.
    """
    minima = [
        min(r.eval_loss for r in trajectory)
        for run in runs
        for trajectory in run.trajectories
        if trajectory
    ]
    if not minima:
        msg = "no trajectories to derive a target from"
        raise ValueError(msg)
    return max(minima)


def compare_budget_to_target(
    runs: cabc.Iterable[RunSet], target: float
) -> ComparisonTable:
    """Tabulate queries-to-target for each method at *target*."""
    rows = tuple(
        ComparisonRow(
            method=run.method,
            per_seed=tuple(queries_to_target(t, target) for t in run.trajectories),
        )
        for run in runs
    )
    for row in rows:
        if row.median is None:
            logger.info("%s does not reach target %.6g", row.method, target)
    return ComparisonTable(target=target, rows=rows)


def assert_comparable(runs: cabc.Sequence[RunSet]) -> None:
    """Raise :class:`ConfigInvalidError` if runs differ in budget or objective."""
    budgets = {run.budget for run in runs if run.budget is not None}
    if len(budgets) > 1:
        msg = f"runs use different budgets {sorted(budgets)}"
        raise ConfigInvalidError("budget", msg)
    objectives = {
        json.dumps(run.objective, sort_keys=True)
        for run in runs
        if run.objective is not None
    }
    if len(objectives) > 1:
        raise ConfigInvalidError("objective", "runs use different objectives or seeds")


def _format_median(value: float | None) -> str:
    return NOT_AVAILABLE if value is None else f"{value:.0f}"


def _format_ratio(value: float | None) -> str:
    if value is None:
        return NOT_AVAILABLE
    return "inf" if math.isinf(value) else f"{value:.3f}"


def _table_rows(table: ComparisonTable, reference: str) -> list[list[str]]:
    return [
        [
            row.method,
            _format_median(row.median),
            f"{row.reached}/{len(row.per_seed)}",
            " ".join(NOT_AVAILABLE if q is None else str(q) for q in row.per_seed),
            _format_ratio(table.ratio(reference, row.method)),
        ]
        for row in table.rows
    ]


_HEADER: typ.Final[tuple[str, ...]] = (
    "method",
    "median_queries",
    "reached",
    "per_seed",
)


def _header(reference: str) -> list[str]:
    """Return the columns; the last is ``median(reference) / median(method)``."""
    return [*_HEADER, f"{reference}/method"]


def render_csv(table: ComparisonTable, reference: str | None = None) -> str:
    """Return the table as CSV text.

    The last column holds the median-queries ratio of *reference*
    (:meth:`ComparisonTable.reference_method` by default) over each row.
    """
    reference = reference or table.reference_method()
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(_header(reference))
    writer.writerows(_table_rows(table, reference))
    return buffer.getvalue()


def render_text(table: ComparisonTable, reference: str | None = None) -> str:
    """Return the table as aligned columns, then one ratio line per baseline."""
    reference = reference or table.reference_method()
    header = _header(reference)
    body = [header, *_table_rows(table, reference)]
    widths = [max(len(line[i]) for line in body) for i in range(len(header))]
    lines = [f"target eval loss: {table.target:.6g}"]
    lines.extend(
        "  ".join(
            cell.ljust(width) for cell, width in zip(line, widths, strict=True)
        ).rstrip()
        for line in body
    )
    for row in table.rows:
        if row.method == reference:
            continue
        ratio = _format_ratio(table.ratio(reference, row.method))
        lines.append(
            f"{reference} needs {ratio} x the median queries of {row.method}"
        )
    return "\n".join(lines) + "\n"


def _load_one(summary_path: Path) -> RunSet:
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    config = summary["config"]
    trajectories = []
    for trial in summary["trials"]:
        name = f"{summary['config_hash']}-seed{trial['seed']}.csv"
        csv_path = summary_path.parent / name
        if csv_path.exists():
            trajectories.append(tuple(read_csv(csv_path)))
        else:
            logger.warning("Missing trajectory %s", csv_path)
    return RunSet(
        method=str(config["name"]),
        trajectories=tuple(trajectories),
        budget=config["budget"],
        objective=config["objective"],
    )


def load_runs(directory: Path) -> list[RunSet]:
    """Load every experiment written under *directory*.

    Each ``summary.json`` found (at any depth) is one method, labelled by
    its config name; runs sharing a name are merged.
    """
    merged: dict[str, RunSet] = {}
    for summary_path in sorted(directory.rglob(SUMMARY_FILE)):
        run = _load_one(summary_path)
        previous = merged.get(run.method)
        if previous is not None:
            if previous.budget != run.budget or previous.objective != run.objective:
                raise ConfigInvalidError(
                    "name", f"{run.method!r} names two different experiments"
                )
            run = dc.replace(run, trajectories=previous.trajectories + run.trajectories)
        merged[run.method] = run
    if not merged:
        msg = f"no {SUMMARY_FILE} under {directory}"
        raise FileNotFoundError(msg)
    return list(merged.values())


def run_comparison(directory: Path, target: float | None = None) -> ComparisonTable:
    """Load *directory*, check fairness and tabulate queries-to-target.

    Without *target* the common target of :func:`common_target` is used.
    """
    runs = load_runs(directory)
    assert_comparable(runs)
    if target is None:
        target = common_target(runs)
    return compare_budget_to_target(runs, target)


__all__ = [
    "NOT_AVAILABLE",
    "REFERENCE_METHOD",
    "ComparisonRow",
    "ComparisonTable",
    "RunSet",
    "assert_comparable",
    "common_target",
    "compare_budget_to_target",
    "load_runs",
    "queries_to_target",
    "render_csv",
    "render_text",
    "run_comparison",
]

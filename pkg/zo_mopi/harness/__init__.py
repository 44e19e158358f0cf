"""Experiment orchestration: configs, budgeted runs, comparisons and the CLI."""

from __future__ import annotations

from .compare import (
    ComparisonTable,
    RunSet,
    common_target,
    compare_budget_to_target,
    load_runs,
    queries_to_target,
    render_csv,
    render_text,
)
from .config import PRESETS, ExperimentConfig, ObjectiveSpec, OptimizerSpec
from .cost import StepCost, step_cost
from .runner import (
    TrialResult,
    TrialStatus,
    resolve_output,
    run_experiment,
    run_trial,
    write_experiment,
)
from .spectrum import SpectrumReport, spectrum_report, tail_mass
from .trajectory import TrajectoryRecord, emit_csv, read_csv

__all__ = [
    "PRESETS",
    "ComparisonTable",
    "ExperimentConfig",
    "ObjectiveSpec",
    "OptimizerSpec",
    "RunSet",
    "SpectrumReport",
    "StepCost",
    "TrajectoryRecord",
    "TrialResult",
    "TrialStatus",
    "common_target",
    "compare_budget_to_target",
    "emit_csv",
    "load_runs",
    "queries_to_target",
    "read_csv",
    "render_csv",
    "render_text",
    "resolve_output",
    "run_experiment",
    "run_trial",
    "spectrum_report",
    "step_cost",
    "tail_mass",
    "write_experiment",
]

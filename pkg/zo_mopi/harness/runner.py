"""Query-budgeted experiment runs.

A trial owns every piece of mutable state it touches: parameters, one
optimizer driver per matrix parameter, a training ledger capped at the
budget and a separate monitor ledger for recorded losses. Trials can
therefore run on worker threads without coordination; the objective is
immutable and shared.
"""

from __future__ import annotations

import concurrent.futures as cf
import dataclasses as dc
import enum
import json
import logging
import math
import os
import time
import typing as typ
from pathlib import Path

from zo_mopi.errors import ZoMopiError
from zo_mopi.ledger import MONITOR_PHASE, QueryLedger
from zo_mopi.objectives import EVAL_BATCH, layer_gradient, layer_loss
from zo_mopi.optimizers import ZoMopiOptimizer, build_optimizer

from .config import DEFAULT_OUTPUT_ROOT, OUTPUT_ROOT_ENV
from .cost import step_cost
from .trajectory import TrajectoryRecord, emit_csv

if typ.TYPE_CHECKING:
    import collections.abc as cabc

    from zo_mopi.linalg import Matrix
    from zo_mopi.objectives import Objective
    from zo_mopi.optimizers import MatrixOptimizer

    from .config import ExperimentConfig

logger = logging.getLogger(__name__)

SUMMARY_FILE: typ.Final[str] = "summary.json"


class TrialStatus(enum.StrEnum):
    """Outcome of one seed."""

    OK = "ok"
    FAILED = "failed"


@dc.dataclass(frozen=True, slots=True)
class TrialResult:
    """Trajectory and outcome of one seed.

    A failed trial keeps the records made before the error.
    """

    seed: int
    status: TrialStatus
    records: tuple[TrajectoryRecord, ...]
    error: str | None = None
    queries: cabc.Mapping[str, int] = dc.field(default_factory=dict)

    @property
    def ok(self) -> bool:
        """Return whether the trial completed."""
        return self.status is TrialStatus.OK

    def summary(self) -> dict[str, typ.Any]:
        """Return the per-seed entry written to ``summary.json``."""
        last = self.records[-1] if self.records else None
        return {
            "seed": self.seed,
            "status": self.status.value,
            "steps": last.step if last else 0,
            "cumulative_queries": last.cumulative_queries if last else 0,
            "final_eval_loss": last.eval_loss if last else None,
            "error": self.error,
            "queries": dict(self.queries),
        }


@dc.dataclass(slots=True)
class _Trial:
    cfg: ExperimentConfig
    objective: Objective
    seed: int
    params: list[Matrix] = dc.field(init=False)
    optimizers: list[MatrixOptimizer] = dc.field(init=False)
    ledger: QueryLedger = dc.field(init=False)
    monitor: QueryLedger = dc.field(default_factory=QueryLedger, init=False)
    started: float = dc.field(default_factory=time.perf_counter, init=False)

    def __post_init__(self) -> None:
        self.params = list(self.objective.initial_params(self.seed))
        self.ledger = QueryLedger(budget=self.cfg.budget)
        self.optimizers = [
            build_optimizer(
                self.cfg.optimizer.config,
                shape,
                self.seed,
                layer=layer,
                gradient=self._gradient_for(layer),
            )
            for layer, shape in enumerate(self.objective.parameter_shapes())
        ]

    def _gradient_for(
        self, layer: int
    ) -> cabc.Callable[[Matrix, int], Matrix] | None:
        if self.cfg.optimizer.kind.zeroth_order:
            return None

        def gradient(x: Matrix, batch: int) -> Matrix:
            current = layer_gradient(self.objective, tuple(self.params), layer)
            return current(x, batch)

        return gradient

    def _monitored(self, batch: int) -> float:
        return self.monitor.evaluate(
            self.objective.loss, tuple(self.params), batch, MONITOR_PHASE
        )

    def _tracking_error(self) -> float | None:
        if not self.cfg.track_spi:
            return None
        errors = [
            opt.spi_tracking_error()
            for opt in self.optimizers
            if isinstance(opt, ZoMopiOptimizer)
        ]
        return max(errors) if errors else None

    def record(
        self, step: int, train_batch: int, update_norm: float
    ) -> TrajectoryRecord:
        elapsed = 0.0
        if self.cfg.record_timing:
            elapsed = (time.perf_counter() - self.started) * 1000.0
        return TrajectoryRecord(
            step=step,
            cumulative_queries=self.ledger.total,
            train_loss=self._monitored(train_batch),
            eval_loss=self._monitored(EVAL_BATCH),
            update_norm=update_norm,
            wall_time_ms=elapsed,
            spi_tracking_error=self._tracking_error(),
        )

    def step(self, batch: int) -> float:
        norms = []
        for layer, optimizer in enumerate(self.optimizers):
            loss = layer_loss(self.objective, tuple(self.params), layer)
            result = optimizer.step(self.params[layer], loss, batch, self.ledger)
            self.params[layer] = result.x
            norms.append(result.update_norm)
        return math.sqrt(sum(n * n for n in norms))


def run_trial(
    cfg: ExperimentConfig, seed: int, objective: Objective | None = None
) -> TrialResult:
    """Run one seed until its budget is spent.

    Optimizer errors end the trial and are reported as a failed
    :class:`TrialResult` holding the records made so far.
    """
    objective = objective if objective is not None else cfg.objective.build()
    records: list[TrajectoryRecord] = []
    trial: _Trial | None = None
    logger.info(
        "Trial seed=%d: %s for %d steps", seed, cfg.optimizer.kind, cfg.steps
    )
    try:
        trial = _Trial(cfg, objective, seed)
        records.append(trial.record(0, 0, 0.0))
        for step in range(1, cfg.steps + 1):
            update_norm = trial.step(step - 1)
            if step % cfg.eval_every == 0 or step == cfg.steps:
                records.append(trial.record(step, step - 1, update_norm))
    except (ZoMopiError, ArithmeticError) as exc:
        logger.exception("Trial seed=%d failed", seed)
        return TrialResult(
            seed=seed,
            status=TrialStatus.FAILED,
            records=tuple(records),
            error=f"{type(exc).__name__}: {exc}",
            queries=trial.ledger.breakdown() if trial else {},
        )
    logger.info(
        "Trial seed=%d finished at eval loss %.6g", seed, records[-1].eval_loss
    )
    return TrialResult(
        seed=seed,
        status=TrialStatus.OK,
        records=tuple(records),
        queries=trial.ledger.breakdown(),
    )


def run_experiment(cfg: ExperimentConfig) -> list[TrialResult]:
    """Run every seed of *cfg* and return the results in seed order.

    Seeds run on ``cfg.workers`` threads. Nothing is written to disk; see
    :func:`write_experiment`.
    """
    objective = cfg.objective.build()
    cost = step_cost(cfg.optimizer, objective.parameter_shapes())
    logger.info(
        "Experiment %s (%s): budget=%d, %d seeds, %d flops/step, %d state floats",
        cfg.name,
        cfg.config_hash(),
        cfg.budget,
        len(cfg.seeds),
        cost.orthogonalization_flops,
        cost.state_floats,
    )
    if cfg.workers == 1:
        return [run_trial(cfg, seed, objective) for seed in cfg.seeds]
    with cf.ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [pool.submit(run_trial, cfg, seed, objective) for seed in cfg.seeds]
        return [future.result() for future in futures]


def resolve_output(cfg: ExperimentConfig, root: Path | None = None) -> Path:
    """Return the experiment's output directory.

    ``cfg.output`` wins; otherwise ``<root>/<name>-<hash>`` with *root*
    defaulting to ``$ZO_MOPI_OUTPUT_ROOT`` and then ``./runs``.
    """
    if cfg.output is not None:
        return cfg.output
    base = root or Path(os.environ.get(OUTPUT_ROOT_ENV, DEFAULT_OUTPUT_ROOT))
    return base / f"{cfg.name}-{cfg.config_hash()}"


def trajectory_path(directory: Path, cfg: ExperimentConfig, seed: int) -> Path:
    """Return the CSV path for one ``(config hash, seed)`` pair."""
    return directory / f"{cfg.config_hash()}-seed{seed}.csv"


def write_experiment(
    cfg: ExperimentConfig,
    results: cabc.Sequence[TrialResult],
    root: Path | None = None,
) -> Path:
    """Write per-seed CSVs and ``summary.json``; return the directory.

    Seeds that failed before their first record get no CSV but still
    appear in the summary.
    """
    directory = resolve_output(cfg, root)
    directory.mkdir(parents=True, exist_ok=True)
    for result in results:
        if result.records:
            emit_csv(result.records, trajectory_path(directory, cfg, result.seed))
    objective_shapes = cfg.objective.build().parameter_shapes()
    summary = {
        "config": cfg.result_dict(),
        "config_hash": cfg.config_hash(),
        "cost": dc.asdict(step_cost(cfg.optimizer, objective_shapes)),
        "trials": [result.summary() for result in results],
    }
    (directory / SUMMARY_FILE).write_text(
        json.dumps(summary, indent=2) + "\n", encoding="utf-8"
    )
    logger.info("Wrote %d trajectories to %s", len(results), directory)
    return directory


__all__ = [
    "SUMMARY_FILE",
    "TrialResult",
    "TrialStatus",
    "resolve_output",
    "run_experiment",
    "run_trial",
    "trajectory_path",
    "write_experiment",
]

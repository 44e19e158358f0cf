"""Command-line entry point: ``zo-mopi {run,spectrum,compare,selftest,cost}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import typing as typ
from pathlib import Path

from zo_mopi.errors import ConfigInvalidError, ZoMopiError

from .compare import render_csv, render_text, run_comparison
from .config import LOG_LEVEL_ENV, ExperimentConfig
from .cost import step_cost
from .runner import resolve_output, run_experiment, write_experiment
from .selftest import render_results, run_selftest
from .spectrum import emit_spectrum_csv, spectrum_for_config

if typ.TYPE_CHECKING:
    import collections.abc as cabc

logger = logging.getLogger(__name__)

EXIT_OK: typ.Final[int] = 0
EXIT_FAILED: typ.Final[int] = 1
EXIT_USAGE: typ.Final[int] = 2
COMPARISON_CSV: typ.Final[str] = "comparison.csv"


def _seed_list(text: str) -> tuple[int, ...]:
    """Parse ``"0,1,2"`` or a range ``"0-9"`` into seeds."""
    try:
        if "-" in text and "," not in text:
            start, stop = (int(part) for part in text.split("-", 1))
            return tuple(range(start, stop + 1))
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        msg = f"invalid seed list {text!r}"
        raise argparse.ArgumentTypeError(msg) from exc


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", type=Path, help="Experiment JSON file.")
    parser.add_argument("--budget", type=int, help="Total training queries per seed.")
    parser.add_argument("--seeds", type=_seed_list, help="Seeds, e.g. 0,1,2 or 0-9.")
    parser.add_argument("--eval-every", type=int, help="Steps between records.")
    parser.add_argument("--output", type=Path, help="Output directory.")
    parser.add_argument("--workers", type=int, help="Seeds to run concurrently.")


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser for every subcommand."""
    parser = argparse.ArgumentParser(
        prog="zo-mopi",
        description="Query-budgeted benchmarks for zeroth-order matrix optimizers.",
    )
    parser.add_argument(
        "--log-level",
        default=os.environ.get(LOG_LEVEL_ENV, "WARNING"),
        help=f"Logging level (default: ${LOG_LEVEL_ENV} or WARNING).",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run an experiment and write trajectories.")
    _add_overrides(run)

    spectrum = commands.add_parser(
        "spectrum", help="Write FO and ZO gradient singular values."
    )
    _add_overrides(spectrum)

    compare = commands.add_parser("compare", help="Tabulate queries-to-target.")
    compare.add_argument("directory", type=Path, help="Directory of experiment runs.")
    compare.add_argument(
        "--target",
        type=float,
        help="Eval loss to reach (default: the loss every run reaches).",
    )
    compare.add_argument(
        "--reference",
        help="Method whose query ratio to every other method is reported "
        "(default: zo-mopi when present, else the first method).",
    )

    selftest = commands.add_parser("selftest", help="Run the invariant self-test.")
    selftest.add_argument("--seed", type=int, default=0)

    cost = commands.add_parser("cost", help="Print per-step cost of a config.")
    cost.add_argument("config", type=Path, help="Experiment JSON file.")
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    return cfg.with_overrides(
        budget=args.budget,
        seeds=args.seeds,
        eval_every=args.eval_every,
        output=args.output,
        workers=args.workers,
    )


def _run(args: argparse.Namespace) -> int:
    cfg = _load(args)
    results = run_experiment(cfg)
    directory = write_experiment(cfg, results)
    failed = [r.seed for r in results if not r.ok]
    for result in results:
        status = result.status.value
        tail = f" ({result.error})" if result.error else ""
        print(f"seed {result.seed}: {status}{tail}")  # noqa: T201
    print(f"wrote {directory}")  # noqa: T201
    return EXIT_FAILED if failed else EXIT_OK


def _spectrum(args: argparse.Namespace) -> int:
    cfg = _load(args)
    directory = resolve_output(cfg)
    for seed in cfg.seeds:
        report = spectrum_for_config(cfg, seed)
        path = emit_spectrum_csv(report, directory / f"spectrum-seed{seed}.csv")
        print(  # noqa: T201
            f"seed {seed}: tail mass fo={report.tail_mass_fo:.4f} "
            f"zo={report.tail_mass_zo:.4f} (k0={report.k0}) -> {path}"
        )
    return EXIT_OK


def _compare(args: argparse.Namespace) -> int:
    table = run_comparison(args.directory, args.target)
    reference = args.reference or table.reference_method()
    methods = [row.method for row in table.rows]
    if reference not in methods:
        msg = f"must be one of {methods}, got {reference!r}"
        raise ConfigInvalidError("reference", msg)
    csv_text = render_csv(table, reference)
    (args.directory / COMPARISON_CSV).write_text(csv_text, encoding="utf-8")
    sys.stdout.write(render_text(table, reference))
    return EXIT_OK


def _selftest(args: argparse.Namespace) -> int:
    results = run_selftest(args.seed)
    sys.stdout.write(render_results(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def _cost(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig.load(args.config)
    shapes = cfg.objective.build().parameter_shapes()
    cost = step_cost(cfg.optimizer, shapes)
    print(f"optimizer: {cfg.optimizer.kind}, parameters: {list(shapes)}")  # noqa: T201
    print(f"orthogonalization flops/step: {cost.orthogonalization_flops}")  # noqa: T201
    print(f"optimizer state floats: {cost.state_floats}")  # noqa: T201
    print(f"queries/step: {cfg.queries_per_step}, steps: {cfg.steps}")  # noqa: T201
    return EXIT_OK


_COMMANDS: typ.Final[dict[str, cabc.Callable[[argparse.Namespace], int]]] = {
    "run": _run,
    "spectrum": _spectrum,
    "compare": _compare,
    "selftest": _selftest,
    "cost": _cost,
}


def main(argv: cabc.Sequence[str] | None = None) -> int:
    """Parse *argv*, configure logging and dispatch to a subcommand."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=str(args.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except ConfigInvalidError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)  # noqa: T201
        return EXIT_USAGE
    except (ZoMopiError, OSError, ValueError) as exc:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)  # noqa: T201
        return EXIT_FAILED


__all__ = ["build_parser", "main"]

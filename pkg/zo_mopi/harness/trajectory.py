"""Trajectory records and their CSV form."""

from __future__ import annotations

import csv
import dataclasses as dc
import math
import typing as typ

if typ.TYPE_CHECKING:
    import collections.abc as cabc
    from pathlib import Path

_FLOAT_FORMAT: typ.Final[str] = ".17g"


@dc.dataclass(frozen=True, slots=True)
class TrajectoryRecord:
    """One recorded point of a training run.

    Attributes
    ----------
    step : int
        Optimizer steps completed.
    cumulative_queries : int
        Training-ledger total at this point.
    train_loss : float
        Loss on the batch of the last completed step (step 0: batch 0).
    eval_loss : float
        Loss on the held-out split.
    update_norm : float
        Frobenius norm of the most recent update (0 at step 0).
    wall_time_ms : float
        Milliseconds since the trial started; 0 when timing is disabled.
    spi_tracking_error : float | None
        SPI tangent error when tracking is enabled.
    """

    step: int
    cumulative_queries: int
    train_loss: float
    eval_loss: float
    update_norm: float
    wall_time_ms: float
    spi_tracking_error: float | None = None


FIELDS: typ.Final[tuple[str, ...]] = tuple(f.name for f in dc.fields(TrajectoryRecord))
_INT_FIELDS: typ.Final[frozenset[str]] = frozenset({"step", "cumulative_queries"})


def _format(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, _FLOAT_FORMAT)
    return str(value)


def emit_csv(records: cabc.Sequence[TrajectoryRecord], path: Path) -> Path:
    """Write *records* to *path* as CSV and return the path.

    Floats use 17 significant digits so a re-read reproduces them exactly.

    Raises
    ------
    ValueError
        If *records* is empty.
    OSError
        If the file cannot be written; the message names *path*.
    """
    if not records:
        msg = "cannot emit an empty trajectory"
        raise ValueError(msg)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(FIELDS)
            for record in records:
                writer.writerow(_format(getattr(record, name)) for name in FIELDS)
    except OSError as exc:
        msg = f"failed to write trajectory CSV {path}: {exc}"
        raise OSError(msg) from exc
    return path


def _parse(name: str, text: str) -> int | float | None:
    if name in _INT_FIELDS:
        return int(text)
    if text == "":
        return None
    return float(text)


def read_csv(path: Path) -> list[TrajectoryRecord]:
    """Parse a file written by :func:`emit_csv`."""
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader, ()))
        if header != FIELDS:
            msg = f"{path}: unexpected CSV header {header}"
            raise ValueError(msg)
        return [
            TrajectoryRecord(**{
                name: _parse(name, text)
                for name, text in zip(FIELDS, row, strict=True)
            })
            for row in reader
        ]


def final_loss(records: cabc.Sequence[TrajectoryRecord]) -> float:
    """Return the last recorded eval loss, or NaN for an empty trajectory."""
    return records[-1].eval_loss if records else math.nan


__all__ = ["FIELDS", "TrajectoryRecord", "emit_csv", "final_loss", "read_csv"]

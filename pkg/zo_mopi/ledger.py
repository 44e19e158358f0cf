"""Exact accounting of objective evaluations."""

from __future__ import annotations

import collections.abc as cabc
import dataclasses as dc
import math
import threading
import typing as typ

from ._validators import validate_non_negative_int
from .errors import BudgetExceededError, NonFiniteLossError

ESTIMATE_PHASE: typ.Final[str] = "estimate"
GRADIENT_PHASE: typ.Final[str] = "gradient"
MONITOR_PHASE: typ.Final[str] = "monitor"


@dc.dataclass(slots=True)
class QueryLedger:
    """Count objective evaluations per phase, optionally under a ceiling.

    Every loss evaluation made by the library goes through :meth:`evaluate`
    so the count cannot drift from what actually ran. Updates are guarded
    by a lock, which keeps the total equal to the sum of the breakdown even
    if evaluations are ever dispatched from several threads.

    Attributes
    ----------
    budget : int | None
        Optional ceiling; a charge that would exceed it raises
        :class:`~zo_mopi.errors.BudgetExceededError` and is not recorded.
    """

    budget: int | None = None
    _counts: dict[str, int] = dc.field(default_factory=dict, init=False, repr=False)
    _lock: threading.Lock = dc.field(
        default_factory=threading.Lock, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        """Validate the optional budget ceiling."""
        if self.budget is not None:
            validate_non_negative_int(self.budget, name="budget")

    @property
    def total(self) -> int:
        """Return the total number of evaluations charged so far."""
        with self._lock:
            return sum(self._counts.values())

    @property
    def remaining(self) -> int | None:
        """Return the evaluations left under the budget, if one is set."""
        if self.budget is None:
            return None
        return self.budget - self.total

    def breakdown(self) -> dict[str, int]:
        """Return a copy of the per-phase counts."""
        with self._lock:
            return dict(self._counts)

    def charge(self, phase: str, count: int = 1) -> None:
        """Record *count* evaluations against *phase*."""
        validate_non_negative_int(count, name="count")
        with self._lock:
            total = sum(self._counts.values())
            if self.budget is not None and total + count > self.budget:
                msg = (
                    f"charging {count} queries to {phase!r} would exceed the "
                    f"budget of {self.budget} (already used {total})"
                )
                raise BudgetExceededError(msg)
            self._counts[phase] = self._counts.get(phase, 0) + count

    def evaluate[P](
        self,
        loss: cabc.Callable[[P, int], float],
        params: P,
        batch: int,
        phase: str = ESTIMATE_PHASE,
    ) -> float:
        """Charge one query and return ``loss(params, batch)``.

        Raises
        ------
        NonFiniteLossError
            If the objective returns NaN or infinity. The query still
            counts, since the evaluation ran.
        """
        self.charge(phase)
        value = float(loss(params, batch))
        if not math.isfinite(value):
            msg = f"objective returned {value} on batch {batch} during {phase!r}"
            raise NonFiniteLossError(msg)
        return value

    def to_dict(self) -> dict[str, typ.Any]:
        """Return a JSON-serializable summary."""
        counts = self.breakdown()
        return {"total": sum(counts.values()), "budget": self.budget, "phases": counts}


__all__ = [
    "ESTIMATE_PHASE",
    "GRADIENT_PHASE",
    "MONITOR_PHASE",
    "QueryLedger",
]

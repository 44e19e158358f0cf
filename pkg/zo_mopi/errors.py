"""Custom exceptions for zo-mopi."""

from __future__ import annotations


class ZoMopiError(Exception):
    """Base exception for zo-mopi errors."""


class NumericalError(ZoMopiError):
    """Base class for failures inside the dense numerical kernels."""


class RankDeficientError(NumericalError):
    """A QR pivot column collapsed below the collapse tolerance.

    Callers that sample the input (subspace refresh, SPI cold start) respond
    by resampling.
    """


class ConvergenceFailureError(NumericalError):
    """An iterative method hit its iteration cap before converging."""


class DegenerateGapError(NumericalError):
    """The top-k singular subspace is not unique because of a tied gap."""


class ColdRestartLoopError(NumericalError):
    """Streaming power iteration stayed rank deficient after a cold restart."""


class NonFiniteLossError(ZoMopiError):
    """An objective evaluation returned NaN or infinity."""


class DimensionMismatchError(ZoMopiError, ValueError):
    """Matrix or state dimensions are mutually inconsistent."""


class ConfigInvalidError(ZoMopiError, ValueError):
    """An experiment or optimizer configuration failed validation.

    Parameters
    ----------
    field : str
        Dotted name of the offending configuration field.
    message : str
        Human readable explanation.
    """

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class BudgetExceededError(ZoMopiError):
    """A charge would push a query ledger past its budget ceiling."""

"""Shared validation helpers."""

from __future__ import annotations

import math


def _reject_bool(value: object, name: str, kind: str) -> None:
    if isinstance(value, bool):
        msg = f"{name} must be {kind}"
        raise TypeError(msg)


def validate_positive_int(value: int, *, name: str) -> None:
    """Ensure *value* is an integer >= 1."""
    _reject_bool(value, name, "an integer")
    if not isinstance(value, int):
        msg = f"{name} must be an integer"
        raise TypeError(msg)
    if value < 1:
        msg = f"{name} must be >= 1"
        raise ValueError(msg)


def validate_non_negative_int(value: int, *, name: str) -> None:
    """Ensure *value* is an integer >= 0."""
    _reject_bool(value, name, "an integer")
    if not isinstance(value, int):
        msg = f"{name} must be an integer"
        raise TypeError(msg)
    if value < 0:
        msg = f"{name} must be >= 0"
        raise ValueError(msg)


def validate_positive_finite(value: float, *, name: str) -> None:
    """Ensure *value* is a real number > 0 and finite."""
    _reject_bool(value, name, "a real number")
    if not (value > 0 and math.isfinite(value)):
        msg = f"{name} must be > 0 and finite"
        raise ValueError(msg)


def validate_non_negative_finite(value: float, *, name: str) -> None:
    """Ensure *value* is a real number >= 0 and finite."""
    _reject_bool(value, name, "a real number")
    if not (value >= 0 and math.isfinite(value)):
        msg = f"{name} must be >= 0 and finite"
        raise ValueError(msg)


def validate_momentum(beta: float, *, name: str = "beta") -> None:
    """Ensure a momentum decay lies in the half-open interval [0, 1)."""
    _reject_bool(beta, name, "a real number")
    if not (0.0 <= beta < 1.0 and math.isfinite(beta)):
        msg = f"{name} must be in [0, 1)"
        raise ValueError(msg)

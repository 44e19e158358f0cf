"""First-order Muon reference for spectral diagnostics."""

from __future__ import annotations

import typing as typ

from zo_mopi.spectral import NS_DEFAULT_ITERS, NS_MUON, newton_schulz

if typ.TYPE_CHECKING:
    from zo_mopi.linalg import Matrix
    from zo_mopi.spectral import NewtonSchulzCoefficients


def fo_muon_step(  # noqa: PLR0913, RUF100 - mirrors the update rule's symbols
    x: Matrix,
    grad: Matrix,
    eta: float,
    beta: float,
    mom_full: Matrix,
    *,
    ns_iters: int = NS_DEFAULT_ITERS,
    coefficients: NewtonSchulzCoefficients = NS_MUON,
) -> tuple[Matrix, Matrix]:
    """Return ``(x', mom')`` for one Muon step on an analytic gradient.

    ``mom' = beta * mom + (1 - beta) * grad`` and
    ``x' = x - eta * newton_schulz(mom')``. A zero momentum gives a zero
    update.
    """
    mom_next = beta * mom_full + (1.0 - beta) * grad
    direction = newton_schulz(mom_next, ns_iters, coefficients=coefficients)
    return x - eta * direction, mom_next


__all__ = ["fo_muon_step"]

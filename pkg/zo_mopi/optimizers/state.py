"""Optimizer state, configuration and step results."""

from __future__ import annotations

import dataclasses as dc
import enum
import typing as typ

from zo_mopi._validators import (
    validate_momentum,
    validate_non_negative_finite,
    validate_positive_finite,
    validate_positive_int,
)
from zo_mopi.errors import ConfigInvalidError
from zo_mopi.estimator import RgeConfig
from zo_mopi.spectral import NS_DEFAULT_ITERS, NewtonSchulzVariant

if typ.TYPE_CHECKING:
    import collections.abc as cabc

    from zo_mopi.linalg import Matrix


class OptimizerKind(enum.StrEnum):
    """Optimizers the harness can drive."""

    ZO_MOPI = "zo-mopi"
    MEZO = "mezo"
    ZO_MUON = "zo-muon"
    FO_MUON = "fo-muon"

    @property
    def zeroth_order(self) -> bool:
        """Return whether the method uses loss evaluations only."""
        return self is not OptimizerKind.FO_MUON


class ProjectionScale(enum.StrEnum):
    """Scale applied when momentum is carried into a refreshed subspace.

    ``AS_WRITTEN_1_OVER_M`` multiplies by ``1 / m_rows``; ``IDENTITY``
    leaves the projected momentum unscaled.
    """

    AS_WRITTEN_1_OVER_M = "as_written_1_over_m"
    IDENTITY = "identity"


@dc.dataclass(frozen=True, slots=True)
class MomentumState:
    """Subspace momentum ``m`` (``r x n``) and its decay ``beta``."""

    m: Matrix
    beta: float

    def __post_init__(self) -> None:
        """Validate the decay."""
        validate_momentum(self.beta)


@dc.dataclass(frozen=True, slots=True)
class OptimizerStep:
    """Result of one optimizer step.

    Attributes
    ----------
    x : Matrix
        Updated parameters.
    update_norm : float
        Frobenius norm of the applied update.
    queries_used : int
        Ledger charges made by the step.
    diagnostics : Mapping[str, float]
        Named scalars such as SPI age or cold restarts.
    """

    x: Matrix
    update_norm: float
    queries_used: int
    diagnostics: cabc.Mapping[str, float] = dc.field(default_factory=dict)


def _config_error(field: str, exc: Exception) -> ConfigInvalidError:
    return ConfigInvalidError(field, str(exc))


def _checked(field: str, check: cabc.Callable[[], None]) -> None:
    try:
        check()
    except (TypeError, ValueError) as exc:
        raise _config_error(field, exc) from exc


def _check_rge(mu: float, n_queries: int) -> None:
    _checked("mu", lambda: validate_positive_finite(mu, name="mu"))
    _checked("n_queries", lambda: validate_positive_int(n_queries, name="n_queries"))


@dc.dataclass(frozen=True, slots=True)
class ZoMopiConfig:
    """Hyperparameters of ZO-MOPI.

    Defaults follow the published regime: ``r = 64``, ``k = 32``,
    ``nu = 500``, ``mu = 1e-3``, ``N = 4``, ``eta = 1e-2``, ``beta = 0.9``.
    """

    eta: float = 1e-2
    beta: float = 0.9
    mu: float = 1e-3
    r: int = 64
    k: int = 32
    nu: int = 500
    n_queries: int = 4
    projection_scale: ProjectionScale = ProjectionScale.AS_WRITTEN_1_OVER_M

    def __post_init__(self) -> None:
        """Validate ranges and the ``k <= r`` coupling."""
        _checked("eta", lambda: validate_non_negative_finite(self.eta, name="eta"))
        _checked("beta", lambda: validate_momentum(self.beta))
        _checked("r", lambda: validate_positive_int(self.r, name="r"))
        _checked("k", lambda: validate_positive_int(self.k, name="k"))
        _checked("nu", lambda: validate_positive_int(self.nu, name="nu"))
        _check_rge(self.mu, self.n_queries)
        if self.k > self.r:
            raise ConfigInvalidError("k", f"must be <= r ({self.r}), got {self.k}")
        _checked("projection_scale", lambda: ProjectionScale(self.projection_scale))
        scale = ProjectionScale(self.projection_scale)
        object.__setattr__(self, "projection_scale", scale)

    @property
    def rge(self) -> RgeConfig:
        """Return the estimator settings."""
        return RgeConfig(self.mu, self.n_queries)


@dc.dataclass(frozen=True, slots=True)
class MezoConfig:
    """Hyperparameters of MeZO (full-space ZO-SGD)."""

    eta: float = 1e-6
    mu: float = 1e-3
    n_queries: int = 4

    def __post_init__(self) -> None:
        """Validate ranges."""
        _checked("eta", lambda: validate_non_negative_finite(self.eta, name="eta"))
        _check_rge(self.mu, self.n_queries)

    @property
    def rge(self) -> RgeConfig:
        """Return the estimator settings."""
        return RgeConfig(self.mu, self.n_queries)


@dc.dataclass(frozen=True, slots=True)
class ZoMuonConfig:
    """Hyperparameters of ZO-Muon (subspace RGE plus Newton-Schulz)."""

    eta: float = 1e-2
    mu: float = 1e-3
    r: int = 64
    nu: int = 100
    n_queries: int = 4
    ns_iters: int = NS_DEFAULT_ITERS
    ns_variant: NewtonSchulzVariant = NewtonSchulzVariant.MUON

    def __post_init__(self) -> None:
        """Validate ranges."""
        _checked("eta", lambda: validate_non_negative_finite(self.eta, name="eta"))
        _checked("r", lambda: validate_positive_int(self.r, name="r"))
        _checked("nu", lambda: validate_positive_int(self.nu, name="nu"))
        _checked(
            "ns_iters", lambda: validate_positive_int(self.ns_iters, name="ns_iters")
        )
        _check_rge(self.mu, self.n_queries)
        _checked("ns_variant", lambda: NewtonSchulzVariant(self.ns_variant))
        object.__setattr__(self, "ns_variant", NewtonSchulzVariant(self.ns_variant))

    @property
    def rge(self) -> RgeConfig:
        """Return the estimator settings."""
        return RgeConfig(self.mu, self.n_queries)


@dc.dataclass(frozen=True, slots=True)
class FoMuonConfig:
    """Hyperparameters of first-order Muon."""

    eta: float = 1e-2
    beta: float = 0.9
    ns_iters: int = NS_DEFAULT_ITERS
    ns_variant: NewtonSchulzVariant = NewtonSchulzVariant.MUON

    def __post_init__(self) -> None:
        """Validate ranges."""
        _checked("eta", lambda: validate_non_negative_finite(self.eta, name="eta"))
        _checked("beta", lambda: validate_momentum(self.beta))
        _checked(
            "ns_iters", lambda: validate_positive_int(self.ns_iters, name="ns_iters")
        )
        _checked("ns_variant", lambda: NewtonSchulzVariant(self.ns_variant))
        object.__setattr__(self, "ns_variant", NewtonSchulzVariant(self.ns_variant))


type OptimizerConfig = ZoMopiConfig | MezoConfig | ZoMuonConfig | FoMuonConfig

CONFIG_TYPES: typ.Final[dict[OptimizerKind, type[OptimizerConfig]]] = {
    OptimizerKind.ZO_MOPI: ZoMopiConfig,
    OptimizerKind.MEZO: MezoConfig,
    OptimizerKind.ZO_MUON: ZoMuonConfig,
    OptimizerKind.FO_MUON: FoMuonConfig,
}


__all__ = [
    "CONFIG_TYPES",
    "FoMuonConfig",
    "MezoConfig",
    "MomentumState",
    "OptimizerConfig",
    "OptimizerKind",
    "OptimizerStep",
    "ProjectionScale",
    "ZoMopiConfig",
    "ZoMuonConfig",
]

"""Stateful optimizer drivers behind one protocol.

Each driver owns the full state tuple of its method (subspace, momentum,
SPI cache, random streams) for a single matrix parameter and advances it
through the functional step in its own module. Random streams are derived
from ``(seed, StreamId, layer)`` so drivers for different layers never
share draws.
"""

from __future__ import annotations

import dataclasses as dc
import logging
import typing as typ

import numpy as np

from zo_mopi.errors import ConfigInvalidError
from zo_mopi.estimator import create_subspace
from zo_mopi.ledger import GRADIENT_PHASE
from zo_mopi.linalg import (
    RngStream,
    StreamId,
    frobenius_norm,
    orthogonal_complement,
    svd_oracle,
)
from zo_mopi.spectral import cold_start_cache, tracking_error_tangent

from .fo_muon import fo_muon_step
from .mezo import mezo_step
from .mopi import zo_mopi_step
from .state import (
    FoMuonConfig,
    MezoConfig,
    MomentumState,
    OptimizerKind,
    OptimizerStep,
    ZoMopiConfig,
    ZoMuonConfig,
)
from .zo_muon import zo_muon_step

if typ.TYPE_CHECKING:
    import collections.abc as cabc

    from zo_mopi.estimator import LossFn, SubspaceState
    from zo_mopi.ledger import QueryLedger
    from zo_mopi.linalg import Matrix
    from zo_mopi.spectral import SpiCache

    from .state import OptimizerConfig

    type GradientFn = cabc.Callable[[Matrix, int], Matrix]

logger = logging.getLogger(__name__)


class MatrixOptimizer(typ.Protocol):
    """One optimizer instance driving one matrix parameter."""

    @property
    def kind(self) -> OptimizerKind:
        """Return the method implemented by this driver."""
        ...

    @property
    def queries_per_step(self) -> int:
        """Return the ledger cost of one :meth:`step`."""
        ...

    def step(
        self, x: Matrix, loss: LossFn, batch: int, ledger: QueryLedger
    ) -> OptimizerStep:
        """Advance the driver's state and return the step result."""
        ...


def _streams(seed: int, layer: int, *ids: StreamId) -> list[RngStream]:
    return [RngStream(seed, stream_id).split(layer) for stream_id in ids]


def _check_rank(field: str, value: int, limit: int, what: str) -> None:
    if value > limit:
        raise ConfigInvalidError(field, f"must be <= {what} ({limit}), got {value}")


@dc.dataclass(slots=True)
class ZoMopiOptimizer:
    """Driver for :func:`~zo_mopi.optimizers.mopi.zo_mopi_step`."""

    config: ZoMopiConfig
    sub: SubspaceState
    mom: MomentumState
    cache: SpiCache
    rng: RngStream
    spi_rng: RngStream

    @classmethod
    def create(
        cls, config: ZoMopiConfig, shape: tuple[int, int], seed: int, *, layer: int = 0
    ) -> ZoMopiOptimizer:
        """Initialize zero momentum, a fresh subspace and a cold SPI cache."""
        m, n = shape
        _check_rank("r", config.r, m, "parameter rows")
        _check_rank("k", config.k, min(config.r, n), "min(r, parameter columns)")
        sub_rng, spi_rng, rng = _streams(
            seed, layer, StreamId.SUBSPACE, StreamId.SPI, StreamId.PERTURBATION
        )
        return cls(
            config=config,
            sub=create_subspace(m, config.r, config.nu, sub_rng),
            mom=MomentumState(np.zeros((config.r, n)), config.beta),
            cache=cold_start_cache(n, config.k, spi_rng),
            rng=rng,
            spi_rng=spi_rng,
        )

    @property
    def kind(self) -> OptimizerKind:
        """Return :attr:`OptimizerKind.ZO_MOPI`."""
        return OptimizerKind.ZO_MOPI

    @property
    def queries_per_step(self) -> int:
        """Return ``2N``."""
        return self.config.rge.queries_per_estimate

    def step(
        self, x: Matrix, loss: LossFn, batch: int, ledger: QueryLedger
    ) -> OptimizerStep:
        """Run one ZO-MOPI iteration and keep the advanced state."""
        result, self.sub, self.mom, self.cache = zo_mopi_step(
            x,
            self.sub,
            self.mom,
            self.cache,
            self.config,
            loss,
            batch,
            ledger,
            rng=self.rng,
            spi_rng=self.spi_rng,
        )
        return result

    def spi_tracking_error(self) -> float:
        """Return the tangent error of the cached subspace for the current momentum.

        The reference is the exact top-``k`` right singular subspace of the
        momentum, so this is a diagnostic and calls the SVD oracle.
        """
        if frobenius_norm(self.mom.m) == 0.0:
            return float("inf")
        factors = svd_oracle(self.mom.m)
        v_star = factors.v[:, : self.config.k]
        v_perp = orthogonal_complement(v_star)
        return tracking_error_tangent(self.cache.v, v_star, v_perp)


@dc.dataclass(slots=True)
class MezoOptimizer:
    """Driver for :func:`~zo_mopi.optimizers.mezo.mezo_step`."""

    config: MezoConfig
    rng: RngStream

    @classmethod
    def create(
        cls, config: MezoConfig, shape: tuple[int, int], seed: int, *, layer: int = 0
    ) -> MezoOptimizer:
        """Derive the perturbation stream; MeZO keeps no other state."""
        del shape
        (rng,) = _streams(seed, layer, StreamId.PERTURBATION)
        return cls(config=config, rng=rng)

    @property
    def kind(self) -> OptimizerKind:
        """Return :attr:`OptimizerKind.MEZO`."""
        return OptimizerKind.MEZO

    @property
    def queries_per_step(self) -> int:
        """Return ``2N``."""
        return self.config.rge.queries_per_estimate

    def step(
        self, x: Matrix, loss: LossFn, batch: int, ledger: QueryLedger
    ) -> OptimizerStep:
        """Run one MeZO iteration."""
        return mezo_step(x, self.config, loss, batch, self.rng, ledger)


@dc.dataclass(slots=True)
class ZoMuonOptimizer:
    """Driver for :func:`~zo_mopi.optimizers.zo_muon.zo_muon_step`."""

    config: ZoMuonConfig
    sub: SubspaceState
    rng: RngStream

    @classmethod
    def create(
        cls, config: ZoMuonConfig, shape: tuple[int, int], seed: int, *, layer: int = 0
    ) -> ZoMuonOptimizer:
        """Draw the initial subspace and derive the perturbation stream."""
        m, _ = shape
        _check_rank("r", config.r, m, "parameter rows")
        sub_rng, rng = _streams(seed, layer, StreamId.SUBSPACE, StreamId.PERTURBATION)
        sub = create_subspace(m, config.r, config.nu, sub_rng)
        return cls(config=config, sub=sub, rng=rng)

    @property
    def kind(self) -> OptimizerKind:
        """Return :attr:`OptimizerKind.ZO_MUON`."""
        return OptimizerKind.ZO_MUON

    @property
    def queries_per_step(self) -> int:
        """Return ``2N``."""
        return self.config.rge.queries_per_estimate

    def step(
        self, x: Matrix, loss: LossFn, batch: int, ledger: QueryLedger
    ) -> OptimizerStep:
        """Run one ZO-Muon iteration and keep the advanced subspace."""
        result, self.sub = zo_muon_step(
            x, self.sub, self.config, loss, batch, self.rng, ledger
        )
        return result


@dc.dataclass(slots=True)
class FoMuonOptimizer:
    """Driver for :func:`~zo_mopi.optimizers.fo_muon.fo_muon_step`.

    Each gradient evaluation is charged to the ledger as one query under
    the ``gradient`` phase.
    """

    config: FoMuonConfig
    gradient: GradientFn
    mom: Matrix

    @classmethod
    def create(
        cls, config: FoMuonConfig, shape: tuple[int, int], gradient: GradientFn
    ) -> FoMuonOptimizer:
        """Start from zero momentum."""
        return cls(config=config, gradient=gradient, mom=np.zeros(shape))

    @property
    def kind(self) -> OptimizerKind:
        """Return :attr:`OptimizerKind.FO_MUON`."""
        return OptimizerKind.FO_MUON

    @property
    def queries_per_step(self) -> int:
        """Return ``1``."""
        return 1

    def step(
        self, x: Matrix, loss: LossFn, batch: int, ledger: QueryLedger
    ) -> OptimizerStep:
        """Evaluate the analytic gradient and take one Muon step."""
        del loss
        ledger.charge(GRADIENT_PHASE)
        grad = self.gradient(x, batch)
        x_next, self.mom = fo_muon_step(
            x,
            grad,
            self.config.eta,
            self.config.beta,
            self.mom,
            ns_iters=self.config.ns_iters,
            coefficients=self.config.ns_variant.coefficients,
        )
        norm = frobenius_norm(x_next - x)
        return OptimizerStep(x=x_next, update_norm=norm, queries_used=1)


def build_optimizer(
    config: OptimizerConfig,
    shape: tuple[int, int],
    seed: int,
    *,
    layer: int = 0,
    gradient: GradientFn | None = None,
) -> MatrixOptimizer:
    """Build the driver matching *config* for one ``shape`` parameter.

    Raises
    ------
    ConfigInvalidError
        If the ranks do not fit the parameter shape, or FO-Muon is
        requested without a gradient.
    """
    match config:
        case ZoMopiConfig():
            return ZoMopiOptimizer.create(config, shape, seed, layer=layer)
        case MezoConfig():
            return MezoOptimizer.create(config, shape, seed, layer=layer)
        case ZoMuonConfig():
            return ZoMuonOptimizer.create(config, shape, seed, layer=layer)
        case FoMuonConfig():
            if gradient is None:
                msg = "fo-muon needs an analytic gradient"
                raise ConfigInvalidError("optimizer", msg)
            return FoMuonOptimizer.create(config, shape, gradient)
        case _:
            msg = f"unsupported optimizer config {type(config).__name__}"
            raise TypeError(msg)


__all__ = [
    "FoMuonOptimizer",
    "MatrixOptimizer",
    "MezoOptimizer",
    "ZoMopiOptimizer",
    "ZoMuonOptimizer",
    "build_optimizer",
]

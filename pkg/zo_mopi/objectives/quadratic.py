"""Matrix quadratic ``1/2 tr(D.T H D)`` with optional per-batch linear noise."""

from __future__ import annotations

import dataclasses as dc
import typing as typ

import numpy as np

from zo_mopi._validators import (
    validate_non_negative_finite,
    validate_positive_finite,
    validate_positive_int,
)
from zo_mopi.errors import DimensionMismatchError
from zo_mopi.linalg import (
    RngStream,
    StreamId,
    gaussian_matrix,
    qr_decompose,
    svd_oracle,
)

from .base import ObjectiveKind, check_params
from .dataset import EVAL_BATCH

if typ.TYPE_CHECKING:
    from zo_mopi.linalg import Matrix

    from .base import Params

_SYMMETRY_TOL: typ.Final[float] = 1e-10


@dc.dataclass(frozen=True, slots=True)
class MatrixQuadratic:
    """``f(X) = 1/2 tr((X - X*)^T H (X - X*)) + noise * <E_b, X - X*>``.

    ``E_b`` is a fixed standard Gaussian matrix per training batch ``b``
    (taken modulo :attr:`n_batches`); :data:`EVAL_BATCH` is noise free.
    ``h_left`` must be symmetric positive definite and :attr:`smoothness`
    is its largest eigenvalue.
    """

    x_star: Matrix
    h_left: Matrix
    noise: float = 0.0
    noise_bank: Matrix | None = None
    smoothness: float = dc.field(init=False)

    def __post_init__(self) -> None:
        """Check that ``h_left`` is SPD and record its largest eigenvalue."""
        validate_non_negative_finite(self.noise, name="noise")
        m, n = self.x_star.shape
        if self.h_left.shape != (m, m):
            msg = f"h_left must be {m}x{m}, got {self.h_left.shape}"
            raise DimensionMismatchError(msg)
        if not np.allclose(self.h_left, self.h_left.T, atol=_SYMMETRY_TOL, rtol=0.0):
            msg = "h_left must be symmetric"
            raise ValueError(msg)
        factors = svd_oracle(self.h_left)
        # For symmetric H, u_i = -v_i exactly when the eigenvalue is negative.
        signs = np.einsum("ij,ij->j", factors.u, factors.v)
        if factors.sigma[-1] <= 0.0 or np.any(signs <= 0.0):
            msg = "h_left must be positive definite"
            raise ValueError(msg)
        bank = self.noise_bank
        if self.noise > 0.0 and (bank is None or bank.shape[1:] != (m, n)):
            msg = "a positive noise scale needs a noise bank of per-batch matrices"
            raise DimensionMismatchError(msg)
        object.__setattr__(self, "smoothness", float(factors.sigma[0]))

    @classmethod
    def create(  # noqa: PLR0913, RUF100 - construction knobs are keyword-only
        cls,
        m: int,
        n: int,
        *,
        condition: float = 1.0,
        noise: float = 0.0,
        seed: int = 0,
        x_star_scale: float = 1.0,
        n_batches: int = 64,
    ) -> MatrixQuadratic:
        """Plant an optimum and an SPD ``h_left`` spanning ``[1, condition]``."""
        validate_positive_int(m, name="m")
        validate_positive_int(n, name="n")
        validate_positive_finite(condition, name="condition")
        validate_positive_int(n_batches, name="n_batches")
        if condition < 1.0:
            msg = "condition must be >= 1"
            raise ValueError(msg)
        rng = RngStream(seed, StreamId.INIT).split(0)
        x_star = x_star_scale * gaussian_matrix(rng, m, n)
        if condition == 1.0:
            h_left = np.eye(m)
        else:
            q, _ = qr_decompose(gaussian_matrix(rng, m, m))
            h_left = (q * np.linspace(1.0, condition, m)) @ q.T
            h_left = 0.5 * (h_left + h_left.T)
        bank = None
        if noise > 0.0:
            noise_rng = RngStream(seed, StreamId.NOISE)
            draws = [gaussian_matrix(noise_rng, m, n) for _ in range(n_batches)]
            bank = np.stack(draws)
        return cls(x_star=x_star, h_left=h_left, noise=noise, noise_bank=bank)

    @property
    def kind(self) -> ObjectiveKind:
        """Return :attr:`ObjectiveKind.QUADRATIC`."""
        return ObjectiveKind.QUADRATIC

    @property
    def n_batches(self) -> int:
        """Return the size of the noise bank, or 1 when noise free."""
        return 1 if self.noise_bank is None else int(self.noise_bank.shape[0])

    def parameter_shapes(self) -> tuple[tuple[int, int], ...]:
        """Return the single parameter shape."""
        return (self.x_star.shape,)

    def initial_params(self, seed: int) -> Params:
        """Return the zero matrix; the seed only varies the optimizer."""
        del seed
        return (np.zeros(self.x_star.shape),)

    def _noise(self, batch: int) -> Matrix | None:
        if self.noise_bank is None or self.noise == 0.0 or batch == EVAL_BATCH:
            return None
        return self.noise * self.noise_bank[batch % self.n_batches]

    def __call__(self, x: Matrix, batch: int, /) -> float:
        """Return the loss of the single matrix parameter *x*."""
        if x.shape != self.x_star.shape:
            msg = f"expected a {self.x_star.shape} parameter, got {x.shape}"
            raise DimensionMismatchError(msg)
        d = x - self.x_star
        value = 0.5 * float(np.sum(d * (self.h_left @ d)))
        noise = self._noise(batch)
        if noise is not None:
            value += float(np.sum(noise * d))
        return value

    def loss(self, params: Params, batch: int) -> float:
        """Return the mini-batch loss."""
        check_params(self, params)
        return self(params[0], batch)

    def gradient(self, params: Params, batch: int) -> Params:
        """Return ``H (X - X*)`` plus the batch noise matrix."""
        check_params(self, params)
        grad = self.h_left @ (params[0] - self.x_star)
        noise = self._noise(batch)
        return (grad if noise is None else grad + noise,)


__all__ = ["MatrixQuadratic"]

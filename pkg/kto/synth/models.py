"""Ground-truth test systems: polynomial potentials and generator settings."""

import math
from typing import Self

import numpy as np
import numpy.typing as npt
from numpy.polynomial import Polynomial
from pydantic import BaseModel, ConfigDict, Field, field_validator

TRIPLE_WELL = (0.0, 0.2, 6.75, 0.0, -8.25, 0.0, 2.5)


class Potential(BaseModel):
    """A confining polynomial potential ``V(x) = sum_k coefficients[k] x^k``.

    The default is the tilted triple well
    ``2.5 x^6 - 8.25 x^4 + 6.75 x^2 + 0.2 x`` with minima near -1.29, 0 and
    1.29; the tilt makes the left well the deepest.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    coefficients: tuple[float, ...] = TRIPLE_WELL

    @field_validator("coefficients")
    @classmethod
    def check_confining(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not all(math.isfinite(c) for c in value):
            raise ValueError("coefficients must be finite")
        degree = len(value) - 1
        if degree < 2 or degree % 2 or value[-1] <= 0:
            raise ValueError(
                "potential must have even degree >= 2 and a positive leading "
                "coefficient"
            )
        return value

    @classmethod
    def triple_well(cls) -> Self:
        return cls(coefficients=TRIPLE_WELL)

    @property
    def polynomial(self) -> Polynomial:
        return Polynomial(self.coefficients)

    def evaluate(self, x: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return np.asarray(self.polynomial(np.asarray(x, dtype=np.float64)))

    def grad(self, x: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return np.asarray(self.polynomial.deriv()(np.asarray(x, dtype=np.float64)))

    def critical_points(self) -> npt.NDArray[np.float64]:
        """Real roots of ``V'``, ascending."""
        roots = self.polynomial.deriv().roots()
        real = roots[np.abs(roots.imag) <= 1e-9 * np.maximum(1.0, np.abs(roots))]
        return np.sort(real.real)

    def minima(self) -> npt.NDArray[np.float64]:
        points = self.critical_points()
        return points[self.polynomial.deriv(2)(points) > 0]

    def maxima(self) -> npt.NDArray[np.float64]:
        """Local maxima of ``V``; these separate the basins."""
        points = self.critical_points()
        return points[self.polynomial.deriv(2)(points) < 0]

    def label(self, x: npt.ArrayLike) -> npt.NDArray[np.int64]:
        """Basin index of each point: 0 for the leftmost minimum upward."""
        points = np.asarray(x, dtype=np.float64)
        return np.searchsorted(self.maxima(), points).astype(np.int64)

    def milestone_labels(
        self, x: npt.ArrayLike, core_fraction: float = 0.5
    ) -> npt.NDArray[np.int64]:
        """Core-set labels that only switch on entering another well's core.

        The core of a basin extends ``core_fraction`` of the way from its
        minimum towards each neighbouring barrier. Points outside every core keep
        the label of the last core visited (the basin label before the first).
        """
        points = np.asarray(x, dtype=np.float64).ravel()
        minima, maxima = self.minima(), self.maxima()
        edges = np.concatenate([[-np.inf], maxima, [np.inf]])
        core = np.full(points.shape, -1, dtype=np.int64)
        for k, centre in enumerate(minima):
            lo = centre - core_fraction * (centre - edges[k])
            hi = centre + core_fraction * (edges[k + 1] - centre)
            core[(points >= lo) & (points <= hi)] = k
        inside = core >= 0
        last = np.maximum.accumulate(np.where(inside, np.arange(points.size), -1))
        labels = self.label(points)
        filled = last >= 0
        labels[filled] = core[last[filled]]
        return labels


class SdeConfig(BaseModel):
    """Euler-Maruyama settings for ``dX = -V'(X) dt + sqrt(2 D) dW``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    potential: Potential = Field(default_factory=Potential)
    diffusion: float = Field(default=0.28125, gt=0.0, allow_inf_nan=False)
    dt: float = Field(default=1e-3, gt=0.0, allow_inf_nan=False)
    n_steps: int = Field(default=2_000_000, ge=1)
    x0: float = Field(default=-1.29, allow_inf_nan=False)
    seed: int = Field(default=42, ge=0, lt=2**64)
    store_stride: int = Field(default=100, ge=1)

    @property
    def stored_count(self) -> int:
        return -(-self.n_steps // self.store_stride)

    @property
    def stored_dt(self) -> float:
        return self.dt * self.store_stride


class PendulumConfig(BaseModel):
    """Synthetic pendulum: a Gaussian blob swinging horizontally.

    Geometry (frame size, period, amplitude) is checked by the renderer.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_frames: int = Field(default=240, ge=1)
    width: int = 64
    height: int = 64
    period_frames: int = 24
    amplitude_px: float = Field(default=20.0, allow_inf_nan=False)
    noise_sigma: float = Field(default=2.0, ge=0.0, allow_inf_nan=False)
    seed: int = Field(default=42, ge=0, lt=2**64)
    blob_sigma: float = Field(default=4.0, gt=0.0, allow_inf_nan=False)
    intensity: float = Field(default=200.0, gt=0.0, le=255.0)

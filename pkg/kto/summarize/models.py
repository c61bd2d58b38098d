"""Optimizer configuration and results for eigenfunction summarization."""

from dataclasses import dataclass, field
from enum import StrEnum
from typing import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from kto.tensordata.models import FloatArray


class Direction(StrEnum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"

    @property
    def sign(self) -> float:
        return 1.0 if self is Direction.MAXIMIZE else -1.0


class StartPolicy(StrEnum):
    """How ``summarize_all`` picks initial guesses.

    ``best_observed`` starts each direction at the training snapshot with the
    smallest (largest) real eigenfunction value; ``mean`` starts both at the mean
    training snapshot.
    """

    BEST_OBSERVED = "best_observed"
    MEAN = "mean"


class OptimizeConfig(BaseModel):
    """Backtracking schedule for projected gradient ascent and descent.

    Unset ``eta0``, ``eta_min`` and ``tol`` are derived per run: ``eta0`` is
    0.1 times the bounds range (or 0.1 without bounds), ``eta_min`` is
    ``1e-8 * eta0`` and ``tol`` is ``1e-10 * |phi(x0)|``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    eta0: float | None = Field(default=None, gt=0.0, allow_inf_nan=False)
    eta_min: float | None = Field(default=None, gt=0.0, allow_inf_nan=False)
    shrink: float = Field(default=0.5, gt=0.0, lt=1.0)
    grow: float = Field(default=1.1, ge=1.0, allow_inf_nan=False)
    max_iters: int = Field(default=10_000, ge=1)
    tol: float | None = Field(default=None, ge=0.0, allow_inf_nan=False)
    bounds: tuple[float, float] | None = None

    @model_validator(mode="after")
    def check_ordering(self) -> Self:
        if self.bounds is not None:
            lo, hi = self.bounds
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise ValueError(f"bounds must satisfy lo <= hi, got {self.bounds}")
        if self.eta0 is not None and self.eta_min is not None:
            if self.eta_min > self.eta0:
                raise ValueError("eta_min must not exceed eta0")
        return self

    def initial_eta(self) -> float:
        if self.eta0 is not None:
            return self.eta0
        if self.bounds is not None and self.bounds[1] > self.bounds[0]:
            return 0.1 * (self.bounds[1] - self.bounds[0])
        return 0.1

    def floor_eta(self, eta0: float) -> float:
        return self.eta_min if self.eta_min is not None else 1e-8 * eta0

    def tolerance(self, initial_value: complex) -> float:
        return self.tol if self.tol is not None else 1e-10 * abs(initial_value)


@dataclass(frozen=True, slots=True)
class TracePoint:
    """One accepted iterate: real objective value, step size and ``|Im phi|``."""

    iteration: int
    value: float
    eta: float
    imag: float


@dataclass(frozen=True, slots=True, eq=False)
class OptimizationResult:
    x_star: FloatArray
    value: float
    iterations: int
    converged: bool
    direction: Direction
    trace: list[TracePoint] = field(default_factory=list)


@dataclass(frozen=True, slots=True, eq=False)
class SummaryPair:
    """Minimizing and maximizing snapshots for one eigenfunction."""

    index: int
    minimum: OptimizationResult
    maximum: OptimizationResult

"""Baseline result types and the explicit polynomial feature map."""

import itertools
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from kto.core.exceptions import FeatureDimensionTooLargeError
from kto.kernels.models import KernelSpec
from kto.operators.models import ComplexArray
from kto.tensordata.models import FloatArray

MAX_FEATURES = 5000


@dataclass(frozen=True, slots=True, eq=False)
class DmdResult:
    """Exact DMD spectrum.

    Attributes:
        eigenvalues: ``r`` eigenvalues, decreasing real part then imaginary part
        modes: ``(d, r)`` complex matrix, one DMD mode per column
        rank_used: Truncation rank ``r``
        amplitudes: Least-squares coefficients of the first snapshot in the modes
        singular_values: All singular values of the snapshot matrix ``X``
    """

    eigenvalues: ComplexArray
    modes: ComplexArray
    rank_used: int
    amplitudes: ComplexArray
    singular_values: FloatArray


class PolynomialFeatureMap(BaseModel):
    """Explicit features of the kernel ``(<x, x'> + offset)^degree``.

    Monomials of ``z = (x, sqrt(offset))`` of total degree ``degree`` carry the
    square root of their multinomial coefficient, so
    ``transform(a) @ transform(b).T`` reproduces the kernel exactly. With a
    zero offset the constant coordinate is dropped.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    degree: int = Field(default=2, ge=1)
    offset: float = Field(default=1.0, ge=0.0, allow_inf_nan=False)

    @classmethod
    def for_kernel(cls, kernel: KernelSpec) -> "PolynomialFeatureMap":
        return cls(degree=kernel.degree, offset=kernel.offset)

    def kernel(self) -> KernelSpec:
        return KernelSpec.polynomial(self.degree, self.offset)

    def _variables(self, dim: int) -> int:
        return dim + 1 if self.offset > 0 else dim

    def dimension(self, dim: int) -> int:
        """Number of features for snapshots of length ``dim``."""
        return math.comb(self._variables(dim) + self.degree - 1, self.degree)

    def monomials(self, dim: int) -> list[tuple[int, ...]]:
        return list(
            itertools.combinations_with_replacement(
                range(self._variables(dim)), self.degree
            )
        )

    def transform(self, points: npt.ArrayLike) -> FloatArray:
        """Feature matrix with one row per point.

        Raises:
            FeatureDimensionTooLargeError: If the feature count exceeds
                ``MAX_FEATURES``
        """
        x = np.atleast_2d(np.asarray(points, dtype=np.float64))
        size = self.dimension(x.shape[1])
        if size > MAX_FEATURES:
            raise FeatureDimensionTooLargeError(
                f"{size} polynomial features exceed the limit of {MAX_FEATURES}"
            )
        if self.offset > 0:
            z = np.hstack([x, np.full((x.shape[0], 1), math.sqrt(self.offset))])
        else:
            z = x
        columns = []
        for combo in self.monomials(x.shape[1]):
            counts = np.bincount(combo)
            weight = math.factorial(self.degree) / math.prod(
                math.factorial(int(c)) for c in counts
            )
            columns.append(math.sqrt(weight) * np.prod(z[:, combo], axis=1))
        return np.column_stack(columns)

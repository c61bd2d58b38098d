"""Eigendecompositions of kernel transfer operators."""

from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import numpy.typing as npt

from kto.core.exceptions import IndexOutOfRangeError, InputError
from kto.kernels.models import KernelSpec
from kto.tensordata.models import SnapshotSet

ComplexArray = npt.NDArray[np.complex128]


class OperatorKind(StrEnum):
    KOOPMAN = "koopman"
    PERRON_FROBENIUS = "pf"


def _frozen_complex(array: npt.ArrayLike) -> ComplexArray:
    out = np.array(array, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, slots=True, eq=False)
class Eigenfunction:
    """``phi(x) = sum_i alpha[i] k(x, training_x[i])``."""

    alpha: ComplexArray
    kernel: KernelSpec
    training_x: SnapshotSet
    eigenvalue: complex

    def __post_init__(self) -> None:
        alpha = np.asarray(self.alpha, dtype=np.complex128).ravel()
        if alpha.size != self.training_x.count:
            raise InputError(
                f"alpha has {alpha.size} entries for {self.training_x.count} "
                "training snapshots"
            )
        object.__setattr__(self, "alpha", _frozen_complex(alpha))
        object.__setattr__(self, "eigenvalue", complex(self.eigenvalue))


@dataclass(frozen=True, slots=True, eq=False)
class EigenDecomposition:
    """Leading eigenpairs of an empirical kernel Koopman or Perron-Frobenius operator.

    Attributes:
        operator_kind: Which operator was estimated
        eigenvalues: ``m`` eigenvalues, decreasing real part then decreasing
            imaginary part
        coefficients: ``(n, m)`` matrix; column ``j - 1`` holds the coefficients
            of eigenfunction ``j``
        epsilon: Tikhonov regularization added to ``G_XX``
        kernel: Kernel the Gram matrices were built with
        training_x: The ``n`` snapshots the eigenfunctions are expanded in
        lag_steps: Lag of the training pairs in snapshot indices
        dt: Time between snapshots of the source trajectory, if known

    Eigen indices are 1-based: ``eigenvalue(1)`` is the leading eigenvalue.
    """

    operator_kind: OperatorKind
    eigenvalues: ComplexArray
    coefficients: ComplexArray
    epsilon: float
    kernel: KernelSpec
    training_x: SnapshotSet
    lag_steps: int
    dt: float | None = None

    def __post_init__(self) -> None:
        eigenvalues = np.asarray(self.eigenvalues, dtype=np.complex128).ravel()
        coefficients = np.asarray(self.coefficients, dtype=np.complex128)
        if coefficients.shape != (self.training_x.count, eigenvalues.size):
            raise InputError(
                f"coefficients of shape {coefficients.shape} do not match "
                f"{self.training_x.count} snapshots and {eigenvalues.size} eigenvalues"
            )
        object.__setattr__(self, "operator_kind", OperatorKind(self.operator_kind))
        object.__setattr__(self, "eigenvalues", _frozen_complex(eigenvalues))
        object.__setattr__(self, "coefficients", _frozen_complex(coefficients))

    @property
    def num_eigs(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def n(self) -> int:
        return self.training_x.count

    @property
    def lag_time(self) -> float:
        return self.lag_steps * (self.dt if self.dt is not None else 1.0)

    def check_index(self, index: int) -> int:
        """Validate a 1-based eigen index and return its 0-based column."""
        if not 1 <= index <= self.num_eigs:
            raise IndexOutOfRangeError(
                f"eigen index {index} outside 1..{self.num_eigs}"
            )
        return index - 1

    def eigenvalue(self, index: int) -> complex:
        return complex(self.eigenvalues[self.check_index(index)])

    def eigenfunction(self, index: int) -> Eigenfunction:
        column = self.check_index(index)
        return Eigenfunction(
            alpha=self.coefficients[:, column],
            kernel=self.kernel,
            training_x=self.training_x,
            eigenvalue=self.eigenvalues[column],
        )

"""Evaluating eigenfunctions and their gradients at arbitrary snapshots."""

from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from kto.core.config import get_settings
from kto.core.exceptions import DimensionMismatchError, ShapeMismatchError
from kto.kernels.functions import grad_combination, gram_matrix, kernel_row
from kto.operators.models import ComplexArray, EigenDecomposition, Eigenfunction
from kto.tensordata.models import SnapshotSet


def _flat_point(ef: Eigenfunction, x: npt.ArrayLike) -> npt.NDArray[np.float64]:
    point = np.asarray(x, dtype=np.float64).ravel()
    if point.size != ef.training_x.dim:
        raise DimensionMismatchError(
            f"point of length {point.size}, eigenfunction expects {ef.training_x.dim}"
        )
    return point


def eval_eigenfunction(ef: Eigenfunction, x: npt.ArrayLike) -> complex:
    """``phi(x) = sum_i alpha_i k(x, x_i)``."""
    point = _flat_point(ef, x)
    return complex(kernel_row(ef.kernel, point, ef.training_x.data) @ ef.alpha)


def grad_eigenfunction(ef: Eigenfunction, x: npt.ArrayLike) -> ComplexArray:
    """``grad phi(x) = sum_i alpha_i grad_x k(x, x_i)``."""
    point = _flat_point(ef, x)
    return grad_combination(ef.kernel, point, ef.training_x.data, ef.alpha)


def eigenfunction_values(
    decomp: EigenDecomposition,
    traj: SnapshotSet,
    indices: Sequence[int],
    *,
    block_rows: int | None = None,
) -> ComplexArray:
    """Evaluate several eigenfunctions along a trajectory.

    Args:
        decomp: Fitted decomposition
        traj: Snapshots with the training shape
        indices: 1-based eigen indices
        block_rows: Trajectory rows per kernel block

    Returns:
        ``(traj.count, len(indices))`` complex array

    Raises:
        ShapeMismatchError: If ``traj`` has a different snapshot shape
        IndexOutOfRangeError: If an index is outside the decomposition
    """
    if traj.shape != decomp.training_x.shape:
        raise ShapeMismatchError(
            f"trajectory shape {traj.shape} differs from training shape "
            f"{decomp.training_x.shape}"
        )
    columns = [decomp.check_index(i) for i in indices]
    coefficients = decomp.coefficients[:, columns]
    block_rows = block_rows or get_settings().gram_block_rows

    out = np.empty((traj.count, len(columns)), dtype=np.complex128)
    training = decomp.training_x.data
    for start in range(0, traj.count, block_rows):
        stop = min(start + block_rows, traj.count)
        rows = traj.data[start:stop]
        if traj is decomp.training_x and start == 0 and stop == traj.count:
            rows = training
        block = gram_matrix(decomp.kernel, rows, training, workers=1)
        out[start:stop] = block @ coefficients
    return out


def eigenfunction_series(
    decomp: EigenDecomposition, traj: SnapshotSet, index: int
) -> ComplexArray:
    """``[phi_index(traj_0), ..., phi_index(traj_{T-1})]``."""
    return eigenfunction_values(decomp, traj, [index])[:, 0]

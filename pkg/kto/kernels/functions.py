"""Kernel evaluation, gradients and Gram matrix assembly.

Gaussian Gram blocks use ``||x - x'||^2 = ||x||^2 + ||x'||^2 - 2<x, x'>`` with
precomputed squared norms, clamped at zero. Single-pair evaluations subtract
directly, so ``evaluate(k, x, x) == 1`` exactly.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import pdist

from kto.core.config import get_settings
from kto.core.exceptions import DimensionMismatchError, InputError, ShapeMismatchError
from kto.core.logging import get_logger
from kto.kernels.models import GramPack, KernelKind, KernelSpec
from kto.tensordata.models import FloatArray, PairedDataset, SnapshotSet

logger = get_logger(__name__)


def _as_vector(x: npt.ArrayLike) -> FloatArray:
    return np.asarray(x, dtype=np.float64).ravel()


def _check_lengths(x: FloatArray, other: FloatArray) -> None:
    if x.shape[-1] != other.shape[-1]:
        raise DimensionMismatchError(
            f"vectors of length {x.shape[-1]} and {other.shape[-1]} do not match"
        )


def evaluate(kernel: KernelSpec, x: npt.ArrayLike, x2: npt.ArrayLike) -> float:
    """Evaluate ``k(x, x2)`` for two flat vectors.

    Raises:
        DimensionMismatchError: If the vectors have different lengths
    """
    a, b = _as_vector(x), _as_vector(x2)
    _check_lengths(a, b)
    if kernel.kind is KernelKind.GAUSSIAN:
        diff = a - b
        return float(np.exp(-float(diff @ diff) / (2.0 * kernel.sigma**2)))
    return float((float(a @ b) + kernel.offset) ** kernel.degree)


def grad_x(kernel: KernelSpec, x: npt.ArrayLike, xi: npt.ArrayLike) -> FloatArray:
    """Gradient of ``k(., xi)`` with respect to its first argument at ``x``.

    Gaussian: ``-(x - xi) k(x, xi) / sigma^2``.
    Polynomial: ``degree (<x, xi> + offset)^(degree - 1) xi``.

    Raises:
        DimensionMismatchError: If the vectors have different lengths
    """
    a, b = _as_vector(x), _as_vector(xi)
    _check_lengths(a, b)
    if kernel.kind is KernelKind.GAUSSIAN:
        diff = a - b
        value = np.exp(-float(diff @ diff) / (2.0 * kernel.sigma**2))
        return -(diff * value) / kernel.sigma**2
    scale = kernel.degree * (float(a @ b) + kernel.offset) ** (kernel.degree - 1)
    return scale * b


def kernel_row(kernel: KernelSpec, x: npt.ArrayLike, points: FloatArray) -> FloatArray:
    """``[k(x, p_0), ..., k(x, p_{n-1})]`` for the rows of ``points``.

    Distances are formed by direct subtraction rather than the norm expansion.
    """
    a = _as_vector(x)
    _check_lengths(a, points)
    if kernel.kind is KernelKind.GAUSSIAN:
        diff = points - a
        sq = np.einsum("ij,ij->i", diff, diff)
        return np.exp(-sq / (2.0 * kernel.sigma**2))
    return (points @ a + kernel.offset) ** kernel.degree


def grad_combination(
    kernel: KernelSpec,
    x: npt.ArrayLike,
    points: FloatArray,
    weights: npt.NDArray[np.complex128] | FloatArray,
) -> npt.NDArray[np.complex128]:
    """``sum_i weights[i] * grad_x k(x, points[i])`` without materializing n gradients.

    Args:
        kernel: Kernel specification
        x: Evaluation point
        points: ``(n, d)`` kernel centres
        weights: Length-``n`` real or complex coefficients

    Returns:
        Complex gradient vector of length ``d``
    """
    a = _as_vector(x)
    _check_lengths(a, points)
    w = np.asarray(weights, dtype=np.complex128)
    if kernel.kind is KernelKind.GAUSSIAN:
        wk = w * kernel_row(kernel, a, points)
        return -(a * wk.sum() - points.T @ wk) / kernel.sigma**2
    inner = points @ a + kernel.offset
    wk = w * kernel.degree * inner ** (kernel.degree - 1)
    return points.T @ wk


def _gram_block(
    kernel: KernelSpec, a: FloatArray, b: FloatArray, b_sq: FloatArray
) -> FloatArray:
    inner = a @ b.T
    if kernel.kind is KernelKind.POLYNOMIAL:
        return (inner + kernel.offset) ** kernel.degree
    a_sq = np.einsum("ij,ij->i", a, a)
    sq = np.maximum(a_sq[:, np.newaxis] + b_sq[np.newaxis, :] - 2.0 * inner, 0.0)
    return np.exp(-sq / (2.0 * kernel.sigma**2))


def gram_matrix(
    kernel: KernelSpec,
    a: FloatArray,
    b: FloatArray,
    *,
    block_rows: int | None = None,
    workers: int | None = None,
) -> FloatArray:
    """Gram matrix ``G[i, j] = k(a_i, b_j)`` for raw ``(n, d)`` and ``(m, d)`` arrays.

    Rows are assembled in fixed-size blocks; the block split depends only on
    ``block_rows``, so results are identical for any worker count. When ``a`` and
    ``b`` are the same array the result is symmetrized and a Gaussian diagonal is
    set to exactly one.
    """
    settings = get_settings()
    block_rows = block_rows or settings.gram_block_rows
    workers = workers or settings.workers
    _check_lengths(a, b)

    b_sq = np.einsum("ij,ij->i", b, b)
    starts = range(0, a.shape[0], block_rows)
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.float64)

    def fill(start: int) -> None:
        stop = min(start + block_rows, a.shape[0])
        out[start:stop] = _gram_block(kernel, a[start:stop], b, b_sq)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, starts))
    else:
        for start in starts:
            fill(start)

    if a is b:
        out = 0.5 * (out + out.T)
        if kernel.kind is KernelKind.GAUSSIAN:
            np.fill_diagonal(out, 1.0)
    return out


def gram(
    kernel: KernelSpec,
    a: SnapshotSet,
    b: SnapshotSet,
    *,
    block_rows: int | None = None,
    workers: int | None = None,
) -> FloatArray:
    """Gram matrix between two snapshot sets.

    ``gram(k, X, X)`` is ``G_XX``, ``gram(k, X, Y)`` is ``G_XY``.

    Raises:
        ShapeMismatchError: If the snapshot shapes differ
    """
    if a.shape != b.shape:
        raise ShapeMismatchError(f"snapshot shapes {a.shape} and {b.shape} differ")
    rhs = a.data if b is a else b.data
    return gram_matrix(kernel, a.data, rhs, block_rows=block_rows, workers=workers)


def gram_pack(
    kernel: KernelSpec,
    data: PairedDataset,
    *,
    block_rows: int | None = None,
    workers: int | None = None,
) -> GramPack:
    """Assemble ``G_XX`` and ``G_XY`` and take ``G_YX`` as the transpose of ``G_XY``."""
    logger.debug(
        "kernels.gram_started", n=data.count, dim=data.x.dim, **kernel.describe()
    )
    g_xx = gram(kernel, data.x, data.x, block_rows=block_rows, workers=workers)
    g_xy = gram(kernel, data.x, data.y, block_rows=block_rows, workers=workers)
    g_yx = np.ascontiguousarray(g_xy.T)
    for matrix in (g_xx, g_xy, g_yx):
        matrix.setflags(write=False)
    logger.debug("kernels.gram_completed", n=data.count)
    return GramPack(g_xx=g_xx, g_xy=g_xy, g_yx=g_yx)


def median_bandwidth(snapshots: SnapshotSet, max_points: int = 1000) -> float:
    """Median pairwise Euclidean distance of an evenly spaced subsample.

    A common heuristic for the Gaussian bandwidth; it is not tied to the
    operator estimators.

    Raises:
        InputError: If fewer than two snapshots are given or all are identical
    """
    if snapshots.count < 2:
        raise InputError("the median heuristic needs at least two snapshots")
    m = min(max_points, snapshots.count)
    picks = np.unique(np.linspace(0, snapshots.count - 1, m).round().astype(np.intp))
    distances = pdist(snapshots.data[picks], metric="euclidean")
    sigma = float(np.median(distances))
    if sigma <= 0.0:
        raise InputError("all sampled snapshots coincide; the median distance is zero")
    logger.info(
        "kernels.median_bandwidth_completed", sigma=sigma, points=int(picks.size)
    )
    return sigma

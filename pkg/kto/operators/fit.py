"""Kernel Koopman and kernel Perron-Frobenius estimation from Gram matrices.

Koopman:
    ``(G_XX + eps I)^-1 G_YX v = lambda v``, coefficients ``alpha = v``.
Perron-Frobenius:
    ``(G_XX + eps I)^-1 G_XY v = lambda v``, coefficients
    ``alpha = (G_XX + eps I)^-1 v``.

The regularized Gram matrix is factored once (Cholesky when ``eps > 0``,
pivoted LU otherwise or when Cholesky fails) and the dense nonsymmetric
problem is handed to LAPACK.
"""

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy import linalg

from kto.core.exceptions import (
    ConvergenceFailureError,
    InputError,
    SingularProblemError,
)
from kto.core.logging import get_logger
from kto.kernels.functions import gram_pack
from kto.kernels.models import GramPack, KernelSpec
from kto.operators.models import ComplexArray, EigenDecomposition, OperatorKind
from kto.tensordata.models import FloatArray, PairedDataset

logger = get_logger(__name__)

MAX_CONDITION = 1e14
RESIDUAL_TOL = 1e-6


def sort_spectrum(eigenvalues: npt.ArrayLike) -> npt.NDArray[np.intp]:
    """Order by decreasing real part, ties by decreasing imaginary part."""
    values = np.asarray(eigenvalues, dtype=np.complex128)
    return np.lexsort((-values.imag, -values.real))


@dataclass(frozen=True, slots=True)
class _Factor:
    """Factorization of ``G_XX + eps I`` reused for every solve."""

    kind: str
    data: tuple[FloatArray, object]

    def solve(self, rhs: FloatArray) -> FloatArray:
        if self.kind == "cholesky":
            solved = linalg.cho_solve(self.data, rhs)  # type: ignore[arg-type]
            return np.asarray(solved)
        return np.asarray(linalg.lu_solve(self.data, rhs))  # type: ignore[arg-type]

    def solve_complex(self, rhs: ComplexArray) -> ComplexArray:
        return self.solve(rhs.real) + 1j * self.solve(rhs.imag)


def _check_conditioning(regularized: FloatArray) -> float:
    spectrum = linalg.eigvalsh(regularized)
    smallest, largest = float(spectrum[0]), float(spectrum[-1])
    if smallest <= 0.0 or largest / smallest > MAX_CONDITION:
        raise SingularProblemError(
            f"G_XX + eps I is numerically singular (eigenvalues in "
            f"[{smallest:.3e}, {largest:.3e}]); increase epsilon"
        )
    return largest / smallest


def _factor(regularized: FloatArray, epsilon: float) -> _Factor:
    if epsilon > 0.0:
        try:
            return _Factor("cholesky", linalg.cho_factor(regularized, lower=False))
        except linalg.LinAlgError:
            logger.warning("operators.cholesky_rejected", epsilon=epsilon)
    return _Factor("lu", linalg.lu_factor(regularized))


def _normalize(coefficients: ComplexArray, g_xx: FloatArray) -> ComplexArray:
    """Scale columns so the largest-modulus training value of phi is exactly 1."""
    values = g_xx @ coefficients
    out = coefficients.copy()
    for j in range(coefficients.shape[1]):
        peak = values[np.argmax(np.abs(values[:, j])), j]
        if abs(peak) > 0.0:
            out[:, j] = coefficients[:, j] / peak
        else:
            norm = float(np.linalg.norm(coefficients[:, j]))
            if norm > 0.0:
                out[:, j] = coefficients[:, j] / norm
    return out


def solve_eigenproblem(
    pack: GramPack,
    epsilon: float,
    kind: OperatorKind | str,
    num_eigs: int,
) -> tuple[ComplexArray, ComplexArray]:
    """Leading eigenvalues and normalized coefficient vectors from Gram matrices.

    Args:
        pack: ``G_XX``, ``G_XY`` and ``G_YX``
        epsilon: Regularization ``eps >= 0``
        kind: Koopman or Perron-Frobenius
        num_eigs: Number of eigenpairs to keep

    Returns:
        ``(eigenvalues, coefficients)`` sorted by decreasing real part

    Raises:
        SingularProblemError: If ``G_XX + eps I`` is numerically singular
        ConvergenceFailureError: If the eigen-solver fails or its residuals are
            too large
    """
    kind = OperatorKind(kind)
    n = pack.n
    regularized = pack.g_xx + epsilon * np.eye(n)
    condition = _check_conditioning(regularized)
    factor = _factor(regularized, epsilon)

    rhs = pack.g_yx if kind is OperatorKind.KOOPMAN else pack.g_xy
    operator = factor.solve(np.asarray(rhs))

    try:
        eigenvalues, vectors = linalg.eig(operator)
    except linalg.LinAlgError as e:
        raise ConvergenceFailureError(f"dense eigen-solver failed: {e}") from e

    order = sort_spectrum(eigenvalues)[:num_eigs]
    eigenvalues = np.asarray(eigenvalues[order], dtype=np.complex128)
    vectors = np.asarray(vectors[:, order], dtype=np.complex128)

    # spectral norm bounded by sqrt(||A||_1 ||A||_inf)
    norm_1 = float(np.linalg.norm(operator, 1))
    norm_inf = float(np.linalg.norm(operator, np.inf))
    scale = max(1.0, math.sqrt(norm_1 * norm_inf))
    residuals = np.linalg.norm(operator @ vectors - vectors * eigenvalues, axis=0)
    bounds = RESIDUAL_TOL * scale * np.linalg.norm(vectors, axis=0)
    if not (np.all(np.isfinite(eigenvalues)) and np.all(residuals <= bounds)):
        worst = int(np.argmax(residuals / np.maximum(bounds, np.finfo(float).tiny)))
        raise ConvergenceFailureError(
            f"eigenpair {worst + 1} has residual {residuals[worst]:.3e}, "
            f"bound {bounds[worst]:.3e}"
        )

    if kind is OperatorKind.PERRON_FROBENIUS:
        vectors = factor.solve_complex(vectors)
    coefficients = _normalize(vectors, np.asarray(pack.g_xx))

    logger.debug(
        "operators.eigenproblem_solved",
        n=n,
        factorization=factor.kind,
        condition=condition,
        max_residual=float(residuals.max()),
    )
    return eigenvalues, coefficients


def fit(
    data: PairedDataset,
    kernel: KernelSpec,
    epsilon: float = 0.0,
    kind: OperatorKind | str = OperatorKind.KOOPMAN,
    num_eigs: int | None = None,
    *,
    pack: GramPack | None = None,
) -> EigenDecomposition:
    """Estimate the leading eigenpairs of a kernel transfer operator.

    Args:
        data: Snapshot pairs ``(x_i, y_i)``
        kernel: Kernel for the Gram matrices
        epsilon: Regularization added to ``G_XX``
        kind: ``koopman`` or ``pf``
        num_eigs: Eigenpairs to keep, default ``min(10, n)``
        pack: Precomputed Gram matrices for ``data`` and ``kernel``

    Returns:
        The sorted, normalized eigendecomposition

    Raises:
        InputError: If ``epsilon`` or ``num_eigs`` is out of range
        SingularProblemError: If ``G_XX + eps I`` is numerically singular
        ConvergenceFailureError: If the eigen-solver fails
    """
    kind = OperatorKind(kind)
    n = data.count
    if not (math.isfinite(epsilon) and epsilon >= 0.0):
        raise InputError(f"epsilon must be finite and nonnegative, got {epsilon}")
    if num_eigs is None:
        num_eigs = min(10, n)
    if not 1 <= num_eigs <= n:
        raise InputError(f"num_eigs must lie in 1..{n}, got {num_eigs}")

    logger.info(
        "operators.fit_started",
        operator=kind.value,
        n=n,
        epsilon=epsilon,
        num_eigs=num_eigs,
        **kernel.describe(),
    )
    if pack is None:
        pack = gram_pack(kernel, data)
    elif pack.n != n:
        raise InputError(f"Gram matrices are {pack.n}x{pack.n}, dataset has {n} pairs")

    eigenvalues, coefficients = solve_eigenproblem(pack, epsilon, kind, num_eigs)
    decomposition = EigenDecomposition(
        operator_kind=kind,
        eigenvalues=eigenvalues,
        coefficients=coefficients,
        epsilon=epsilon,
        kernel=kernel,
        training_x=data.x,
        lag_steps=data.lag_steps,
        dt=data.dt,
    )
    logger.info(
        "operators.fit_completed",
        operator=kind.value,
        n=n,
        leading_eigenvalue=eigenvalues[0],
    )
    return decomposition

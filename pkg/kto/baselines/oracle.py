"""Covariance-operator eigenvalues from explicit polynomial features.

With feature matrices ``Phi_X`` and ``Phi_Y`` (one row per snapshot), the
empirical covariance operators are ``C_XX = Phi_X^T Phi_X / n`` and
``C_XY = Phi_X^T Phi_Y / n``. The nonzero eigenvalues of
``(C_XX + eps I)^-1 C_XY`` (Koopman) and ``(C_XX + eps I)^-1 C_YX``
(Perron-Frobenius) coincide with those of the Gram-matrix problems solved with
regularization ``n * eps``.
"""

import math

import numpy as np
from scipy import linalg

from kto.baselines.models import PolynomialFeatureMap
from kto.core.exceptions import ConvergenceFailureError, InputError
from kto.core.logging import get_logger
from kto.operators.fit import sort_spectrum
from kto.operators.models import ComplexArray, OperatorKind
from kto.tensordata.models import PairedDataset

logger = get_logger(__name__)


def covariance_oracle(
    data: PairedDataset,
    feature_map: PolynomialFeatureMap,
    eps_tilde: float = 0.0,
    kind: OperatorKind | str = OperatorKind.KOOPMAN,
) -> ComplexArray:
    """All eigenvalues of the regularized empirical covariance operator.

    ``eps_tilde == 0`` uses the Moore-Penrose pseudo-inverse of ``C_XX``.

    Raises:
        FeatureDimensionTooLargeError: If the feature space exceeds the dense limit
        InputError: If ``eps_tilde`` is negative
    """
    kind = OperatorKind(kind)
    if not (math.isfinite(eps_tilde) and eps_tilde >= 0.0):
        raise InputError(f"eps_tilde must be finite and nonnegative, got {eps_tilde}")
    phi_x = feature_map.transform(data.x.data)
    phi_y = feature_map.transform(data.y.data)
    n = data.count

    c_xx = phi_x.T @ phi_x / n
    cross = phi_x.T @ phi_y if kind is OperatorKind.KOOPMAN else phi_y.T @ phi_x
    cross = cross / n
    if eps_tilde > 0.0:
        regularized = c_xx + eps_tilde * np.eye(c_xx.shape[0])
        operator = linalg.solve(regularized, cross, assume_a="pos")
    else:
        operator = linalg.pinvh(c_xx) @ cross

    try:
        eigenvalues = linalg.eigvals(operator)
    except linalg.LinAlgError as e:
        raise ConvergenceFailureError(f"dense eigen-solver failed: {e}") from e
    eigenvalues = np.asarray(eigenvalues[sort_spectrum(eigenvalues)], np.complex128)
    logger.debug(
        "baselines.oracle_completed",
        kind=kind.value,
        features=int(c_xx.shape[0]),
        n=n,
        eps_tilde=eps_tilde,
    )
    return eigenvalues

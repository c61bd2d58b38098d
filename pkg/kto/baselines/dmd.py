"""Exact dynamic mode decomposition.

With the thin SVD ``X = U S V*``:

    ``A_tilde = U_r* Y V_r S_r^-1``, ``A_tilde W = W diag(mu)``,
    ``modes = Y V_r S_r^-1 W``.
"""

import json
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import linalg

from kto.baselines.models import DmdResult
from kto.core.exceptions import ConvergenceFailureError, InputError, RankDeficientError
from kto.core.logging import get_logger
from kto.operators.fit import sort_spectrum
from kto.operators.serialization import eigenvalue_pairs, encode_floats
from kto.tensordata.models import PairedDataset

logger = get_logger(__name__)

DEFAULT_SVD_TOL = 1e-10


def exact_dmd(
    data: PairedDataset,
    rank: int | None = None,
    svd_tol: float = DEFAULT_SVD_TOL,
) -> DmdResult:
    """Exact DMD of the snapshot pairs in ``data``.

    Args:
        data: Pairs ``(x_i, y_i)``; snapshots are columns of ``X`` and ``Y``
        rank: Fixed truncation rank, at most ``min(d, n)``
        svd_tol: Relative cut-off ``sigma_i >= svd_tol * sigma_max`` used when
            ``rank`` is not given

    Raises:
        InputError: If ``rank`` is out of range
        RankDeficientError: If no singular value survives the truncation
    """
    x = np.asarray(data.x.data).T
    y = np.asarray(data.y.data).T
    dim, n = x.shape
    if rank is not None and not 1 <= rank <= min(dim, n):
        raise InputError(f"rank must lie in 1..{min(dim, n)}, got {rank}")

    try:
        u, s, vh = linalg.svd(x, full_matrices=False)
    except linalg.LinAlgError as e:
        raise ConvergenceFailureError(f"SVD did not converge: {e}") from e
    if s.size == 0 or s[0] == 0.0:
        raise RankDeficientError("snapshot matrix X is zero")
    if rank is None:
        rank = int(np.count_nonzero(s >= svd_tol * s[0]))
    if s[rank - 1] == 0.0:
        raise RankDeficientError(f"X has rank below the requested {rank}")

    u_r = u[:, :rank]
    v_r = vh[:rank].conj().T
    y_v_inv_s = (y @ v_r) / s[:rank]
    a_tilde = u_r.conj().T @ y_v_inv_s
    eigenvalues, w = linalg.eig(a_tilde)
    order = sort_spectrum(eigenvalues)
    eigenvalues = np.asarray(eigenvalues[order], dtype=np.complex128)
    modes = np.asarray(y_v_inv_s @ w[:, order], dtype=np.complex128)
    amplitudes = np.linalg.lstsq(modes, x[:, 0].astype(np.complex128), rcond=None)[0]

    logger.info(
        "baselines.dmd_completed",
        dim=dim,
        n=n,
        rank=rank,
        leading_eigenvalue=eigenvalues[0],
    )
    return DmdResult(
        eigenvalues=eigenvalues,
        modes=modes,
        rank_used=rank,
        amplitudes=np.asarray(amplitudes, dtype=np.complex128),
        singular_values=s,
    )


class DmdDocument(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    format: Literal["kto-dmd/1"] = "kto-dmd/1"
    rank_used: int
    dim: int
    eigenvalues: list[tuple[float, float]]
    amplitudes: list[tuple[float, float]]
    singular_values: list[float]
    modes_real: str
    modes_imag: str


def to_json(result: DmdResult) -> str:
    """JSON export laid out like the eigendecomposition document."""
    document = DmdDocument(
        rank_used=result.rank_used,
        dim=int(result.modes.shape[0]),
        eigenvalues=eigenvalue_pairs(result.eigenvalues),
        amplitudes=eigenvalue_pairs(result.amplitudes),
        singular_values=[float(v) for v in result.singular_values],
        modes_real=encode_floats(result.modes.real),
        modes_imag=encode_floats(result.modes.imag),
    )
    return json.dumps(document.model_dump(mode="json"), indent=2) + "\n"

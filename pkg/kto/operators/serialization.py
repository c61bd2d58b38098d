"""JSON persistence for eigendecompositions.

The document stores eigenvalues as ``[re, im]`` pairs and the coefficient
matrix as base64 of little-endian float64 (real and imaginary parts
separately, row-major). Training snapshots are written next to the JSON as a
KTO1 file referenced by relative path and SHA-256 content hash.
"""

import base64
import hashlib
import json
from pathlib import Path
from typing import Literal

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, ValidationError

from kto.core.exceptions import IoFailureError, ParseError
from kto.core.logging import get_logger
from kto.kernels.models import KernelSpec
from kto.operators.models import ComplexArray, EigenDecomposition, OperatorKind
from kto.tensordata.io import atomic_write_bytes, atomic_write_text, kto1_bytes, load

logger = get_logger(__name__)

DOCUMENT_FORMAT = "kto-eigendecomposition/1"
TRAINING_FILENAME = "training.kto1"


def encode_floats(array: npt.ArrayLike) -> str:
    data = np.ascontiguousarray(array, dtype="<f8")
    return base64.b64encode(data.tobytes()).decode("ascii")


def decode_floats(text: str, shape: tuple[int, ...]) -> npt.NDArray[np.float64]:
    try:
        raw = base64.b64decode(text.encode("ascii"), validate=True)
    except ValueError as e:
        raise ParseError(f"invalid base64 payload: {e}") from e
    expected = 8 * int(np.prod(shape))
    if len(raw) != expected:
        raise ParseError(
            f"payload holds {len(raw)} bytes, shape {shape} needs {expected}"
        )
    return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)


def eigenvalue_pairs(eigenvalues: npt.ArrayLike) -> list[tuple[float, float]]:
    values = np.asarray(eigenvalues, dtype=np.complex128)
    return [(float(v.real), float(v.imag)) for v in values]


class TrainingReference(BaseModel):
    model_config = ConfigDict(frozen=True)

    path: str
    sha256: str
    count: int
    shape: list[int]


class DecompositionDocument(BaseModel):
    """On-disk form of an :class:`EigenDecomposition`."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    format: Literal["kto-eigendecomposition/1"] = DOCUMENT_FORMAT
    operator: OperatorKind
    kernel: KernelSpec
    epsilon: float
    lag_steps: int
    dt: float | None
    num_eigs: int
    n: int
    eigenvalues: list[tuple[float, float]]
    coefficients_real: str
    coefficients_imag: str
    training: TrainingReference


def to_document(decomp: EigenDecomposition, training_path: str, sha256: str) -> str:
    document = DecompositionDocument(
        operator=decomp.operator_kind,
        kernel=decomp.kernel,
        epsilon=decomp.epsilon,
        lag_steps=decomp.lag_steps,
        dt=decomp.dt,
        num_eigs=decomp.num_eigs,
        n=decomp.n,
        eigenvalues=eigenvalue_pairs(decomp.eigenvalues),
        coefficients_real=encode_floats(decomp.coefficients.real),
        coefficients_imag=encode_floats(decomp.coefficients.imag),
        training=TrainingReference(
            path=training_path,
            sha256=sha256,
            count=decomp.training_x.count,
            shape=list(decomp.training_x.shape),
        ),
    )
    return json.dumps(document.model_dump(mode="json"), indent=2) + "\n"


def save_decomposition(
    decomp: EigenDecomposition,
    path: str | Path,
    training_name: str = TRAINING_FILENAME,
) -> None:
    """Write the decomposition JSON and its training snapshots side by side.

    Raises:
        IoFailureError: If either file cannot be written
    """
    path = Path(path)
    payload = kto1_bytes(decomp.training_x)
    digest = hashlib.sha256(payload).hexdigest()
    atomic_write_bytes(path.parent / training_name, payload)
    atomic_write_text(path, to_document(decomp, training_name, digest))
    logger.info(
        "operators.decomposition_saved",
        path=str(path),
        num_eigs=decomp.num_eigs,
        n=decomp.n,
    )


def load_decomposition(path: str | Path) -> EigenDecomposition:
    """Read a decomposition written by :func:`save_decomposition`.

    Raises:
        IoFailureError: If the JSON or the training file cannot be read
        ParseError: If the document is malformed or the training file's hash
            does not match
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailureError(f"cannot read {path}: {e}") from e
    try:
        document = DecompositionDocument.model_validate_json(text)
    except ValidationError as e:
        raise ParseError(f"{path} is not a valid decomposition document: {e}") from e

    training_path = path.parent / document.training.path
    try:
        payload = training_path.read_bytes()
    except OSError as e:
        raise IoFailureError(
            f"cannot read training snapshots {training_path}: {e}"
        ) from e
    if hashlib.sha256(payload).hexdigest() != document.training.sha256:
        raise ParseError(f"{training_path} does not match the recorded SHA-256")
    training_x = load(training_path, "kto1", dt=document.dt)

    shape = (document.n, document.num_eigs)
    coefficients: ComplexArray = decode_floats(
        document.coefficients_real, shape
    ) + 1j * decode_floats(document.coefficients_imag, shape)
    eigenvalues = np.array([complex(re, im) for re, im in document.eigenvalues])

    logger.info("operators.decomposition_loaded", path=str(path), n=document.n)
    return EigenDecomposition(
        operator_kind=document.operator,
        eigenvalues=eigenvalues,
        coefficients=coefficients,
        epsilon=document.epsilon,
        kernel=document.kernel,
        training_x=training_x,
        lag_steps=document.lag_steps,
        dt=document.dt,
    )

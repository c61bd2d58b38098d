"""Snapshot file formats: CSV, the KTO1 binary tensor format and PGM/PPM frames.

KTO1 layout (all little-endian)::

    b"KTO1" | u32 rank r | r x u64 dims | u64 count | count*prod(dims) float64

Image sequences are directories with one PGM (grayscale, P5) or PPM (RGB, P6)
file per frame, read in lexicographic filename order.
"""

import math
import os
import struct
import tempfile
from enum import StrEnum
from pathlib import Path

import numpy as np
import pandas as pd
from PIL import Image, UnidentifiedImageError

from kto.core.exceptions import (
    IoFailureError,
    NonFiniteError,
    ParseError,
    ShapeMismatchError,
    UnsupportedShapeError,
)
from kto.core.logging import get_logger
from kto.tensordata.models import SnapshotSet

logger = get_logger(__name__)

KTO1_MAGIC = b"KTO1"
_IMAGE_SUFFIXES = {".pgm", ".ppm", ".pnm"}


class SnapshotFormat(StrEnum):
    CSV = "csv"
    KTO1 = "kto1"
    PGM = "pgm"
    PPM = "ppm"


def infer_format(path: Path) -> SnapshotFormat:
    """Guess the format from a file suffix or the contents of a frame directory."""
    if path.is_dir():
        suffixes = {p.suffix.lower() for p in path.iterdir() if p.is_file()}
        return SnapshotFormat.PPM if ".ppm" in suffixes else SnapshotFormat.PGM
    suffix = path.suffix.lower().lstrip(".")
    if suffix in {"kto", "kto1", "bin"}:
        return SnapshotFormat.KTO1
    if suffix in {"pgm", "ppm"}:
        return SnapshotFormat(suffix)
    return SnapshotFormat.CSV


def atomic_write_bytes(path: Path, payload: bytes) -> None:
    """Write ``payload`` to ``path`` through a temporary file and an atomic rename.

    Raises:
        IoFailureError: If the directory is not writable
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(payload)
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
    except OSError as e:
        raise IoFailureError(f"cannot write {path}: {e}") from e


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


# -- loading -----------------------------------------------------------------


def load(
    path: str | Path,
    fmt: SnapshotFormat | str | None = None,
    *,
    header: bool = False,
    dt: float | None = None,
) -> SnapshotSet:
    """Read a snapshot set.

    Args:
        path: File (CSV, KTO1) or directory of frames (PGM, PPM)
        fmt: Declared format; inferred from the path when omitted
        header: Skip the first CSV row
        dt: Physical time between snapshots to attach to the set

    Returns:
        The snapshot set

    Raises:
        ParseError: If the file is malformed
        ShapeMismatchError: If records or frames have inconsistent lengths
        NonFiniteError: If NaN or Inf values are present
        IoFailureError: If the path cannot be read
    """
    path = Path(path)
    if not path.exists():
        raise IoFailureError(f"{path} does not exist")
    fmt = infer_format(path) if fmt is None else SnapshotFormat(fmt)
    logger.debug("tensordata.load_started", path=str(path), format=fmt.value)

    match fmt:
        case SnapshotFormat.CSV:
            snapshots = _load_csv(path, header=header, dt=dt)
        case SnapshotFormat.KTO1:
            snapshots = _load_kto1(path, dt=dt)
        case SnapshotFormat.PGM | SnapshotFormat.PPM:
            snapshots = _load_frames(path, dt=dt)

    logger.info(
        "tensordata.load_completed",
        path=str(path),
        format=fmt.value,
        count=snapshots.count,
        shape=list(snapshots.shape),
    )
    return snapshots


def _read_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as e:
        raise IoFailureError(f"cannot read {path}: {e}") from e


def _load_csv(path: Path, *, header: bool, dt: float | None) -> SnapshotSet:
    # Cells stay text until every record is known to be complete, so a short
    # record is not confused with a literal "nan" cell.
    try:
        frame = pd.read_csv(
            path,
            header=0 if header else None,
            dtype=str,
            na_filter=False,
            skip_blank_lines=True,
            encoding="utf-8",
        )
    except pd.errors.EmptyDataError as e:
        raise ParseError(f"{path} contains no snapshot rows") from e
    except pd.errors.ParserError as e:
        # The tokenizer reports over-long records as "Expected n fields ..."
        if "Expected" in str(e):
            raise ShapeMismatchError(f"{path}: {e}") from e
        raise ParseError(f"{path}: {e}") from e
    except UnicodeDecodeError as e:
        raise ParseError(f"{path} is not UTF-8 text") from e
    except OSError as e:
        raise IoFailureError(f"cannot read {path}: {e}") from e

    if frame.empty:
        raise ParseError(f"{path} contains no snapshot rows")

    width = frame.shape[1]
    incomplete = (frame.isna() | (frame == "")).any(axis=1).to_numpy()
    if incomplete.any():
        line_no = int(np.argmax(incomplete)) + (2 if header else 1)
        raise ShapeMismatchError(
            f"{path}:{line_no} has missing values, expected {width}"
        )
    try:
        array = frame.astype(np.float64).to_numpy()
    except ValueError as e:
        raise ParseError(f"{path}: {e}") from e

    if not np.all(np.isfinite(array)):
        raise NonFiniteError(f"{path} contains NaN or Inf values")
    return SnapshotSet(shape=(width,), data=array, dt=dt)


def _load_kto1(path: Path, *, dt: float | None) -> SnapshotSet:
    payload = _read_bytes(path)
    if payload[:4] != KTO1_MAGIC:
        raise ParseError(f"{path} does not start with the KTO1 magic")
    try:
        (rank,) = struct.unpack_from("<I", payload, 4)
        offset = 8
        dims = struct.unpack_from(f"<{rank}Q", payload, offset)
        offset += 8 * rank
        (count,) = struct.unpack_from("<Q", payload, offset)
        offset += 8
    except struct.error as e:
        raise ParseError(f"{path} has a truncated KTO1 header") from e

    if rank == 0 or any(d == 0 for d in dims):
        raise ParseError(f"{path} declares an empty snapshot shape {dims}")
    dim = math.prod(dims)
    expected = offset + 8 * count * dim
    if len(payload) != expected:
        raise ParseError(
            f"{path} holds {len(payload)} bytes, header implies {expected}"
        )
    values = np.frombuffer(payload, dtype="<f8", offset=offset, count=count * dim)
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"{path} contains NaN or Inf values")
    return SnapshotSet(
        shape=tuple(int(d) for d in dims),
        data=values.astype(np.float64).reshape(int(count), dim),
        dt=dt,
    )


def _load_frames(path: Path, *, dt: float | None) -> SnapshotSet:
    if not path.is_dir():
        raise ParseError(f"image sequences are directories of frames, got {path}")
    files = sorted(
        p for p in path.iterdir() if p.is_file() and p.suffix.lower() in _IMAGE_SUFFIXES
    )
    if not files:
        raise ParseError(f"{path} contains no PGM/PPM frames")

    frames: list[np.ndarray] = []
    for file in files:
        try:
            with Image.open(file) as image:
                frame = np.asarray(image, dtype=np.float64)
        except (UnidentifiedImageError, OSError, SyntaxError) as e:
            raise ParseError(f"{file} is not a readable PGM/PPM frame: {e}") from e
        if frames and frame.shape != frames[0].shape:
            raise ShapeMismatchError(
                f"{file} has shape {frame.shape}, expected {frames[0].shape}"
            )
        frames.append(frame)
    return SnapshotSet.from_frames(np.stack(frames), dt=dt)


# -- saving ------------------------------------------------------------------


def save(
    snapshots: SnapshotSet,
    path: str | Path,
    fmt: SnapshotFormat | str | None = None,
    *,
    header: bool = False,
) -> None:
    """Write a snapshot set so that :func:`load` can read it back.

    KTO1 round-trips bit-exactly; CSV writes 17 significant digits, which
    round-trips every float64.

    Raises:
        UnsupportedShapeError: If an image format cannot hold the shape or values
        IoFailureError: If writing fails
    """
    path = Path(path)
    fmt = infer_format(path) if fmt is None else SnapshotFormat(fmt)

    match fmt:
        case SnapshotFormat.CSV:
            atomic_write_text(path, _csv_text(snapshots, header=header))
        case SnapshotFormat.KTO1:
            atomic_write_bytes(path, kto1_bytes(snapshots))
        case SnapshotFormat.PGM | SnapshotFormat.PPM:
            _save_frames(snapshots, path, fmt)

    logger.info(
        "tensordata.save_completed",
        path=str(path),
        format=fmt.value,
        count=snapshots.count,
    )


def kto1_bytes(snapshots: SnapshotSet) -> bytes:
    head = KTO1_MAGIC + struct.pack("<I", len(snapshots.shape))
    head += struct.pack(f"<{len(snapshots.shape)}Q", *snapshots.shape)
    head += struct.pack("<Q", snapshots.count)
    return head + snapshots.data.astype("<f8").tobytes(order="C")


def _csv_text(snapshots: SnapshotSet, *, header: bool) -> str:
    frame = pd.DataFrame(
        snapshots.data, columns=[f"x{i}" for i in range(snapshots.dim)]
    )
    return frame.to_csv(
        index=False, header=header, float_format="%.17g", lineterminator="\n"
    )


def _save_frames(snapshots: SnapshotSet, path: Path, fmt: SnapshotFormat) -> None:
    shape = snapshots.shape
    if fmt is SnapshotFormat.PGM and len(shape) != 2:
        raise UnsupportedShapeError(f"PGM frames must be 2-D, got shape {shape}")
    if fmt is SnapshotFormat.PPM and (len(shape) != 3 or shape[2] != 3):
        raise UnsupportedShapeError(f"PPM frames must be HxWx3, got shape {shape}")
    if snapshots.data.min() < 0.0 or snapshots.data.max() > 255.0:
        raise UnsupportedShapeError("image export needs values within [0, 255]")

    frames = np.rint(snapshots.frames()).astype(np.uint8)
    width = max(5, len(str(snapshots.count - 1)))
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoFailureError(f"cannot create {path}: {e}") from e
    for index, frame in enumerate(frames):
        target = path / f"frame_{index:0{width}d}.{fmt.value}"
        try:
            Image.fromarray(frame).save(target, format="PPM")
        except OSError as e:
            raise IoFailureError(f"cannot write {target}: {e}") from e

"""Output directories and the fixed CSV schemas of the CLI.

Schemas::

    eigenvalues.csv    index, re, im, modulus, phase, timescale
    series.csv         time_index, phi_<j>_re, phi_<j>_im, ...
    trace.csv          iteration, value, eta, imag
    changepoints.csv   time_index, eigen_index, jump, timescale

``index`` and ``eigen_index`` are 1-based; an infinite time scale is written as
``inf``.
"""

import os
import shutil
import tempfile
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path

import numpy as np
import numpy.typing as npt
import pandas as pd

from kto.changepoint.detect import timescale
from kto.core.exceptions import IoFailureError
from kto.core.logging import get_logger
from kto.operators.models import ComplexArray
from kto.summarize.models import OptimizationResult

logger = get_logger(__name__)

EIGENVALUE_COLUMNS = ["index", "re", "im", "modulus", "phase", "timescale"]
TRACE_COLUMNS = ["iteration", "value", "eta", "imag"]


@contextmanager
def staged_output(out: Path) -> Iterator[Path]:
    """Yield a scratch directory that is moved into ``out`` only on success.

    A new ``out`` is created by a single rename; into an existing directory the
    staged files are renamed one by one. On error the scratch directory is
    removed and ``out`` is left untouched.

    Raises:
        IoFailureError: If the scratch directory cannot be created or published
    """
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(dir=out.parent, prefix=f".{out.name}."))
    except OSError as e:
        raise IoFailureError(f"cannot stage outputs for {out}: {e}") from e

    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        logger.warning("cli.outputs_discarded", out=str(out))
        raise

    try:
        if not out.exists():
            os.replace(staging, out)
        else:
            for source in sorted(p for p in staging.rglob("*") if p.is_file()):
                target = out / source.relative_to(staging)
                target.parent.mkdir(parents=True, exist_ok=True)
                os.replace(source, target)
    except OSError as e:
        raise IoFailureError(f"cannot publish outputs to {out}: {e}") from e
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    logger.info("cli.outputs_published", out=str(out))


def write_frame(frame: pd.DataFrame, path: Path) -> Path:
    """Write a CSV table with round-trip float precision."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as e:
        raise IoFailureError(f"cannot write {path}: {e}") from e
    return path


def write_text(text: str, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoFailureError(f"cannot write {path}: {e}") from e
    return path


def eigenvalue_frame(eigenvalues: npt.ArrayLike, lag_time: float) -> pd.DataFrame:
    """One row per eigenvalue in the given (sorted) order."""
    values = np.asarray(eigenvalues, dtype=np.complex128)
    return pd.DataFrame(
        {
            "index": np.arange(1, values.size + 1),
            "re": values.real,
            "im": values.imag,
            "modulus": np.abs(values),
            "phase": np.angle(values),
            "timescale": [timescale(v, lag_time) for v in values],
        },
        columns=EIGENVALUE_COLUMNS,
    )


def series_frame(
    values: ComplexArray, indices: Sequence[int], time_index: npt.ArrayLike
) -> pd.DataFrame:
    """Eigenfunction values along a trajectory, split into real and imaginary part."""
    frame = pd.DataFrame({"time_index": np.asarray(time_index, dtype=np.int64)})
    for column, j in enumerate(indices):
        frame[f"phi_{j}_re"] = values[:, column].real
        frame[f"phi_{j}_im"] = values[:, column].imag
    return frame


def trace_frame(result: OptimizationResult) -> pd.DataFrame:
    rows = [asdict(point) for point in result.trace]
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)

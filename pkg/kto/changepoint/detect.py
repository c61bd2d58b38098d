"""Change points as jumps in eigenfunction time series.

A time index ``t`` is flagged for eigen index ``j`` when
``|Re phi_j(x_t) - Re phi_j(x_{t-1})| >= rel_threshold * range_j`` with
``range_j`` the max minus min of the (optionally median-smoothed) series.
Candidates closer than ``min_separation`` to a larger jump on the same eigen
index are suppressed. Events are ranked by the implied time scale
``-lag_time / ln|lambda_j|`` so that the slowest processes come first.
"""

import math
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
from scipy.ndimage import median_filter

from kto.changepoint.models import ChangePoint, ChangePointReport
from kto.core.exceptions import EmptySeriesError, InputError, ShapeMismatchError
from kto.core.logging import get_logger
from kto.operators.eigenfunctions import eigenfunction_values
from kto.operators.models import EigenDecomposition
from kto.tensordata.models import FloatArray, SnapshotSet

logger = get_logger(__name__)

DEFAULT_REL_THRESHOLD = 0.4
DEFAULT_MIN_SEPARATION = 5


def timescale(eigenvalue: complex, lag_time: float) -> float:
    """Implied time scale ``-lag_time / ln|eigenvalue|``.

    Returns ``inf`` for ``|eigenvalue| >= 1`` and ``0`` for a zero eigenvalue.

    Raises:
        InputError: If ``lag_time`` is not positive
    """
    if not (math.isfinite(lag_time) and lag_time > 0):
        raise InputError(f"lag_time must be positive, got {lag_time}")
    modulus = abs(complex(eigenvalue))
    if modulus >= 1.0:
        return math.inf
    if modulus == 0.0:
        return 0.0
    return -lag_time / math.log(modulus)


def _check_parameters(
    rel_threshold: float, min_separation: int, smoothing_window: int | None
) -> None:
    if not 0.0 < rel_threshold <= 1.0:
        raise InputError(f"rel_threshold must lie in (0, 1], got {rel_threshold}")
    if min_separation < 0:
        raise InputError(f"min_separation must be >= 0, got {min_separation}")
    if smoothing_window is not None and smoothing_window < 1:
        raise InputError(f"smoothing_window must be >= 1, got {smoothing_window}")


def _suppress(
    positions: npt.NDArray[np.intp], jumps: FloatArray, window: int
) -> list[int]:
    """Keep the largest jumps; drop any within ``window`` of a kept one."""
    order = sorted(
        range(len(positions)), key=lambda k: (-abs(jumps[k]), positions[k])
    )
    kept: list[int] = []
    for k in order:
        if all(abs(int(positions[k]) - int(positions[m])) > window for m in kept):
            kept.append(k)
    return sorted(kept, key=lambda k: positions[k])


def detect_series(
    series: npt.ArrayLike,
    indices: Sequence[int] | None = None,
    timescales: Sequence[float] | None = None,
    rel_threshold: float = DEFAULT_REL_THRESHOLD,
    min_separation: int = DEFAULT_MIN_SEPARATION,
    *,
    smoothing_window: int | None = None,
) -> ChangePointReport:
    """Detect jumps in precomputed series.

    Args:
        series: ``(T,)`` or ``(T, k)`` array; only the real part is used
        indices: Eigen index of each column, default ``1..k``
        timescales: Time scale of each column for ranking, default ``inf``
        rel_threshold: Jump threshold relative to each column's range
        min_separation: Non-maximum suppression window in series steps
        smoothing_window: Width of a centred rolling median applied first

    Raises:
        EmptySeriesError: If the series has fewer than two entries
        ShapeMismatchError: If ``indices`` or ``timescales`` do not match the columns
        InputError: If a parameter is out of range
    """
    _check_parameters(rel_threshold, min_separation, smoothing_window)
    values = np.real(np.asarray(series))
    if values.ndim == 1:
        values = values[:, np.newaxis]
    if values.ndim != 2:
        raise ShapeMismatchError(f"series must be 1-D or 2-D, got {values.ndim}-D")
    length, columns = values.shape
    if length < 2:
        raise EmptySeriesError(f"series of length {length} has no steps")

    indices = tuple(indices) if indices is not None else tuple(range(1, columns + 1))
    scales = list(timescales) if timescales is not None else [math.inf] * columns
    if len(indices) != columns or len(scales) != columns:
        raise ShapeMismatchError(
            f"{columns} series columns for {len(indices)} indices "
            f"and {len(scales)} time scales"
        )

    analysed = np.array(values, dtype=np.float64)
    if smoothing_window is not None and smoothing_window > 1:
        analysed = median_filter(analysed, size=(smoothing_window, 1), mode="nearest")

    events: list[ChangePoint] = []
    thresholds: dict[int, float] = {}
    for column, (eigen_index, scale) in enumerate(zip(indices, scales, strict=True)):
        x = analysed[:, column]
        span = float(x.max() - x.min())
        threshold = rel_threshold * span
        thresholds[eigen_index] = threshold
        if span == 0.0:
            continue
        jumps = np.diff(x)
        positions = np.flatnonzero(np.abs(jumps) >= threshold)
        kept = _suppress(positions, jumps[positions], min_separation)
        events.extend(
            ChangePoint(
                time_index=int(positions[k]) + 1,
                eigen_index=eigen_index,
                jump=float(jumps[positions[k]]),
                timescale=float(scale),
            )
            for k in kept
        )

    events.sort(key=lambda e: (-e.timescale, e.time_index, e.eigen_index))
    analysed.setflags(write=False)
    return ChangePointReport(
        events=events,
        indices=indices,
        thresholds=thresholds,
        series=analysed,
    )


def detect(
    decomp: EigenDecomposition,
    traj: SnapshotSet,
    indices: Sequence[int] | None = None,
    rel_threshold: float = DEFAULT_REL_THRESHOLD,
    min_separation: int = DEFAULT_MIN_SEPARATION,
    *,
    smoothing_window: int | None = None,
    lag_time: float | None = None,
) -> ChangePointReport:
    """Detect change points of ``traj`` in the listed eigenfunctions.

    Args:
        decomp: Fitted decomposition
        traj: Trajectory with the training snapshot shape
        indices: 1-based eigen indices, default all but the first
        rel_threshold: Jump threshold relative to each series range
        min_separation: Non-maximum suppression window in trajectory steps
        smoothing_window: Width of an optional rolling median
        lag_time: Lag used for the time scales, default ``decomp.lag_time``

    Raises:
        ShapeMismatchError: If ``traj`` has a different snapshot shape
        EmptySeriesError: If ``traj`` has fewer than two snapshots
        IndexOutOfRangeError: If an index is outside the decomposition
    """
    if indices is None:
        indices = list(range(2, decomp.num_eigs + 1))
    _check_parameters(rel_threshold, min_separation, smoothing_window)
    if traj.count < 2:
        raise EmptySeriesError(f"trajectory of {traj.count} snapshots has no steps")
    tau = lag_time if lag_time is not None else decomp.lag_time
    scales = [timescale(decomp.eigenvalue(j), tau) for j in indices]

    logger.info(
        "changepoint.detection_started",
        indices=list(indices),
        length=traj.count,
        rel_threshold=rel_threshold,
        min_separation=min_separation,
    )
    series = eigenfunction_values(decomp, traj, indices)
    report = detect_series(
        series,
        indices,
        scales,
        rel_threshold,
        min_separation,
        smoothing_window=smoothing_window,
    )
    logger.info("changepoint.detection_completed", events=len(report))
    return report


def label_transitions(labels: npt.ArrayLike) -> list[int]:
    """Positions ``t`` with ``labels[t] != labels[t - 1]``."""
    values = np.asarray(labels)
    return [int(t) + 1 for t in np.flatnonzero(values[1:] != values[:-1])]


def match_events(
    detected: Sequence[int], truth: Sequence[int], tolerance: int
) -> tuple[float, float]:
    """Precision and recall of detected positions against true ones.

    Matching is one-to-one and greedy in time order; a detection matches a true
    position at most ``tolerance`` steps away. Empty inputs score 1.0.
    """
    unmatched = sorted(truth)
    hits = 0
    for position in sorted(detected):
        for k, candidate in enumerate(unmatched):
            if abs(candidate - position) <= tolerance:
                del unmatched[k]
                hits += 1
                break
    precision = hits / len(detected) if detected else 1.0
    recall = hits / len(truth) if truth else 1.0
    return precision, recall

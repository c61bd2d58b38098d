"""Snapshot sequences and lagged snapshot pairs.

Snapshots are stored flattened row-major as a ``(count, prod(shape))`` float64
array together with the original tensor shape. All kernel computations work on
the flat rows; the Frobenius norm of a tensor equals the Euclidean norm of its
flattening, so scalars, images and fields share one code path.
"""

import math
from dataclasses import dataclass
from enum import StrEnum
from typing import Self

import numpy as np
import numpy.typing as npt

from kto.core.exceptions import (
    InputError,
    LagTooLargeError,
    NonFiniteError,
    ShapeMismatchError,
)

FloatArray = npt.NDArray[np.float64]


def _frozen(array: npt.ArrayLike) -> FloatArray:
    out = np.array(array, dtype=np.float64, order="C", copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, slots=True, eq=False)
class SnapshotSet:
    """An ordered collection of equally shaped real tensors.

    Attributes:
        shape: Original tensor axes of one snapshot, e.g. ``(height, width, 3)``
        data: Read-only ``(count, prod(shape))`` array, one flattened snapshot per row
        dt: Physical time between consecutive snapshots, if known
    """

    shape: tuple[int, ...]
    data: FloatArray
    dt: float | None = None

    def __post_init__(self) -> None:
        shape = tuple(int(axis) for axis in self.shape)
        if not shape or any(axis < 1 for axis in shape):
            raise ShapeMismatchError(f"snapshot shape must be positive, got {shape}")
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != math.prod(shape):
            raise ShapeMismatchError(
                f"data of shape {data.shape} does not hold snapshots of shape {shape}"
            )
        if not np.all(np.isfinite(data)):
            raise NonFiniteError("snapshot data contains NaN or Inf")
        if self.dt is not None and not (math.isfinite(self.dt) and self.dt > 0):
            raise InputError(f"dt must be positive and finite, got {self.dt}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "data", _frozen(data))

    @classmethod
    def from_frames(cls, frames: npt.ArrayLike, dt: float | None = None) -> Self:
        """Build a set from an array whose first axis indexes snapshots.

        A 1-D array is read as a series of scalar snapshots.
        """
        array = np.asarray(frames, dtype=np.float64)
        if array.ndim == 0:
            raise ShapeMismatchError("need at least one snapshot axis")
        if array.ndim == 1:
            array = array[:, np.newaxis]
        shape = tuple(int(axis) for axis in array.shape[1:])
        return cls(shape=shape, data=array.reshape(array.shape[0], -1), dt=dt)

    @property
    def count(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    def __len__(self) -> int:
        return self.count

    def frames(self) -> FloatArray:
        """Return the snapshots as a ``(count, *shape)`` view."""
        return self.data.reshape((self.count, *self.shape))

    def snapshot(self, index: int) -> FloatArray:
        """Return snapshot ``index`` as a flat vector."""
        return self.data[index]

    def select(self, indices: npt.ArrayLike) -> "SnapshotSet":
        """Return the snapshots at ``indices`` (in the given order)."""
        picked = self.data[np.asarray(indices, dtype=np.intp)]
        return SnapshotSet(shape=self.shape, data=picked, dt=None)

    def every(self, stride: int) -> "SnapshotSet":
        """Return every ``stride``-th snapshot, keeping physical spacing."""
        if stride < 1:
            raise InputError(f"stride must be at least 1, got {stride}")
        dt = None if self.dt is None else self.dt * stride
        return SnapshotSet(shape=self.shape, data=self.data[::stride], dt=dt)

    def mean_snapshot(self) -> FloatArray:
        return np.asarray(self.data.mean(axis=0), dtype=np.float64)


@dataclass(frozen=True, slots=True, eq=False)
class PairedDataset:
    """Aligned snapshot pairs where ``y[i]`` is the lag successor of ``x[i]``."""

    x: SnapshotSet
    y: SnapshotSet
    lag_steps: int

    def __post_init__(self) -> None:
        if self.x.shape != self.y.shape or self.x.count != self.y.count:
            raise ShapeMismatchError(
                f"x {self.x.shape}x{self.x.count} and y "
                f"{self.y.shape}x{self.y.count} are not aligned"
            )
        if self.lag_steps < 1:
            raise InputError(f"lag_steps must be at least 1, got {self.lag_steps}")

    @property
    def count(self) -> int:
        return self.x.count

    @property
    def shape(self) -> tuple[int, ...]:
        return self.x.shape

    @property
    def dt(self) -> float | None:
        """Physical time between consecutive snapshots of the source trajectory."""
        return self.x.dt

    @property
    def lag_time(self) -> float:
        """Lag in physical time units, or in snapshot steps when ``dt`` is unknown."""
        return self.lag_steps * (self.dt if self.dt is not None else 1.0)


def from_trajectory(
    traj: SnapshotSet, lag_steps: int, stride: int = 1
) -> PairedDataset:
    """Pair each snapshot with the one ``lag_steps`` later.

    Every ``stride``-th time index starts a pair; ``stride=1`` is a sliding window
    yielding ``traj.count - lag_steps`` pairs. Pair members are copied bit-exactly.

    Args:
        traj: Trajectory of at least ``lag_steps + 1`` snapshots
        lag_steps: Lag in snapshot indices
        stride: Spacing between the start indices of consecutive pairs

    Returns:
        The paired dataset, carrying the trajectory's ``dt``

    Raises:
        LagTooLargeError: If ``lag_steps >= traj.count``
    """
    if lag_steps < 1:
        raise InputError(f"lag_steps must be at least 1, got {lag_steps}")
    if stride < 1:
        raise InputError(f"stride must be at least 1, got {stride}")
    if lag_steps >= traj.count:
        raise LagTooLargeError(
            f"lag {lag_steps} leaves no pairs in a trajectory of {traj.count} snapshots"
        )
    starts = np.arange(0, traj.count - lag_steps, stride)
    x = SnapshotSet(shape=traj.shape, data=traj.data[starts], dt=traj.dt)
    y = SnapshotSet(shape=traj.shape, data=traj.data[starts + lag_steps], dt=traj.dt)
    return PairedDataset(x=x, y=y, lag_steps=lag_steps)


class Preprocessing(StrEnum):
    NONE = "none"
    CENTER = "center"
    STANDARDIZE = "standardize"


def preprocess(snapshots: SnapshotSet, mode: Preprocessing | str) -> SnapshotSet:
    """Optionally center or standardize raw snapshot values.

    ``center`` subtracts the mean snapshot; ``standardize`` additionally divides by
    the global standard deviation of the centered values (skipped when it is zero).
    """
    mode = Preprocessing(mode)
    if mode is Preprocessing.NONE:
        return snapshots
    centered = snapshots.data - snapshots.data.mean(axis=0)
    if mode is Preprocessing.STANDARDIZE:
        scale = float(centered.std())
        if scale > 0:
            centered = centered / scale
    return SnapshotSet(shape=snapshots.shape, data=centered, dt=snapshots.dt)

"""Synthetic pendulum frames standing in for a recorded video."""

import math

import numpy as np
import numpy.typing as npt

from kto.core.exceptions import InvalidGeometryError
from kto.core.logging import get_logger
from kto.synth.models import PendulumConfig
from kto.tensordata.models import FloatArray, SnapshotSet

logger = get_logger(__name__)

MIN_FRAME_SIZE = 16
MIN_PERIOD = 4


def _check_geometry(cfg: PendulumConfig) -> None:
    if cfg.width < MIN_FRAME_SIZE or cfg.height < MIN_FRAME_SIZE:
        raise InvalidGeometryError(
            f"frames must be at least {MIN_FRAME_SIZE}x{MIN_FRAME_SIZE}, "
            f"got {cfg.width}x{cfg.height}"
        )
    if cfg.period_frames < MIN_PERIOD:
        raise InvalidGeometryError(
            f"period must be at least {MIN_PERIOD} frames, got {cfg.period_frames}"
        )
    if abs(cfg.amplitude_px) > (cfg.width - 1) / 2:
        raise InvalidGeometryError(
            f"amplitude {cfg.amplitude_px} px leaves the {cfg.width} px frame"
        )


def blob_centers(cfg: PendulumConfig) -> FloatArray:
    """Horizontal blob centre of every frame in pixel coordinates.

    The phase uses ``t mod period`` so frames one period apart are identical.
    """
    t = np.arange(cfg.n_frames)
    phase = (t % cfg.period_frames) / cfg.period_frames
    return (cfg.width - 1) / 2 + cfg.amplitude_px * np.sin(2.0 * math.pi * phase)


def render_pendulum(cfg: PendulumConfig | None = None) -> SnapshotSet:
    """Render grayscale ``height x width`` frames of a swinging Gaussian blob.

    Pixel values are ``intensity * exp(-r^2 / (2 blob_sigma^2))`` plus Gaussian
    noise, clamped to ``[0, 255]``.

    Raises:
        InvalidGeometryError: If the frame is smaller than 16 px, the period
            shorter than 4 frames or the swing wider than the frame
    """
    cfg = cfg or PendulumConfig()
    _check_geometry(cfg)
    rng = np.random.default_rng(cfg.seed)

    columns = np.arange(cfg.width, dtype=np.float64)
    rows = np.arange(cfg.height, dtype=np.float64)
    centers = blob_centers(cfg)
    scale = 2.0 * cfg.blob_sigma**2
    offsets = columns[np.newaxis, :] - centers[:, np.newaxis]
    horizontal = np.exp(-(offsets**2) / scale)
    vertical = np.exp(-((rows - (cfg.height - 1) / 2) ** 2) / scale)
    frames = (
        cfg.intensity
        * vertical[np.newaxis, :, np.newaxis]
        * horizontal[:, np.newaxis, :]
    )
    if cfg.noise_sigma > 0:
        frames = frames + rng.normal(0.0, cfg.noise_sigma, size=frames.shape)
    np.clip(frames, 0.0, 255.0, out=frames)

    logger.info(
        "synth.pendulum_rendered",
        n_frames=cfg.n_frames,
        width=cfg.width,
        height=cfg.height,
        period=cfg.period_frames,
    )
    return SnapshotSet.from_frames(frames)


def blob_centroid(frame: npt.ArrayLike) -> tuple[float, float]:
    """``(row, column)`` centroid of the pixels above half the frame maximum."""
    image = np.asarray(frame, dtype=np.float64)
    weights = np.maximum(image - 0.5 * image.max(), 0.0)
    total = weights.sum()
    if total == 0.0:
        raise InvalidGeometryError("frame has no bright pixels")
    rows, columns = np.indices(image.shape)
    row = float((rows * weights).sum() / total)
    column = float((columns * weights).sum() / total)
    return row, column

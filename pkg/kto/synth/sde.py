"""Euler-Maruyama integration of one-dimensional overdamped Langevin dynamics."""

import math

import numpy as np
import numpy.typing as npt

from kto.core.exceptions import BlowupError
from kto.core.logging import get_logger
from kto.synth.models import SdeConfig
from kto.tensordata.models import SnapshotSet

logger = get_logger(__name__)

BLOWUP_LIMIT = 1e6
NOISE_CHUNK = 1 << 16


def simulate(cfg: SdeConfig) -> tuple[SnapshotSet, npt.NDArray[np.int64]]:
    """Integrate ``x <- x - V'(x) dt + sqrt(2 D dt) xi`` with standard normal ``xi``.

    The state before step ``i`` is stored whenever ``i % store_stride == 0``, so
    the first stored state is ``x0`` and ``ceil(n_steps / store_stride)`` states
    are kept, spaced ``dt * store_stride`` apart.

    Returns:
        Scalar snapshots and the basin label of each stored state

    Raises:
        BlowupError: If the state becomes non-finite or exceeds ``1e6`` in
            magnitude
    """
    potential = cfg.potential
    # V'(x) coefficients, highest degree first for Horner
    derivative = [k * c for k, c in enumerate(potential.coefficients)][1:][::-1]
    noise_scale = math.sqrt(2.0 * cfg.diffusion * cfg.dt)
    dt = cfg.dt
    stride = cfg.store_stride
    rng = np.random.default_rng(cfg.seed)

    logger.info(
        "synth.simulation_started",
        n_steps=cfg.n_steps,
        dt=cfg.dt,
        diffusion=cfg.diffusion,
        seed=cfg.seed,
    )
    stored = np.empty(cfg.stored_count, dtype=np.float64)
    x = float(cfg.x0)
    step = 0
    while step < cfg.n_steps:
        noise = rng.standard_normal(min(NOISE_CHUNK, cfg.n_steps - step)).tolist()
        for xi in noise:
            if step % stride == 0:
                stored[step // stride] = x
            grad = 0.0
            for c in derivative:
                grad = grad * x + c
            x = x - grad * dt + noise_scale * xi
            if not abs(x) <= BLOWUP_LIMIT:
                raise BlowupError(
                    f"state {x} at step {step + 1} exceeds {BLOWUP_LIMIT:g}; "
                    "reduce dt"
                )
            step += 1

    snapshots = SnapshotSet.from_frames(stored, dt=cfg.stored_dt)
    labels = potential.label(stored)
    logger.info(
        "synth.simulation_completed",
        stored=int(stored.size),
        occupation=np.bincount(labels).tolist(),
    )
    return snapshots, labels

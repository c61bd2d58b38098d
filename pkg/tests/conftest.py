"""Shared full-size datasets and fits for the cross-slice tests."""

import numpy as np
import numpy.typing as npt
import pytest

from kto.kernels.functions import median_bandwidth
from kto.kernels.models import KernelSpec
from kto.operators.fit import fit
from kto.operators.models import EigenDecomposition, OperatorKind
from kto.summarize.models import OptimizeConfig, StartPolicy, SummaryPair
from kto.summarize.optimize import summarize_all
from kto.synth.models import PendulumConfig, SdeConfig
from kto.synth.pendulum import render_pendulum
from kto.synth.sde import simulate
from kto.tensordata.models import SnapshotSet, from_trajectory

TRIPLE_WELL_LAG = 100
TRIPLE_WELL_PAIR_STRIDE = 10
PENDULUM_EPSILON = 1.0


@pytest.fixture(scope="session")
def triple_well() -> tuple[SnapshotSet, npt.NDArray[np.int64]]:
    """Default triple-well run: 2e6 steps stored every 100, seed 42."""
    return simulate(SdeConfig())


@pytest.fixture(scope="session")
def triple_well_fit(
    triple_well: tuple[SnapshotSet, npt.NDArray[np.int64]],
) -> EigenDecomposition:
    """Gaussian Koopman fit on 1990 pairs at lag time 10."""
    traj, _ = triple_well
    data = from_trajectory(traj, TRIPLE_WELL_LAG, stride=TRIPLE_WELL_PAIR_STRIDE)
    return fit(data, KernelSpec.gaussian(1.0), 0.1, OperatorKind.KOOPMAN, 10)


@pytest.fixture(scope="session")
def pendulum_config() -> PendulumConfig:
    return PendulumConfig()


@pytest.fixture(scope="session")
def pendulum(pendulum_config: PendulumConfig) -> SnapshotSet:
    """240 noisy 64x64 frames of the swinging blob."""
    return render_pendulum(pendulum_config)


@pytest.fixture(scope="session")
def pendulum_fit(pendulum: SnapshotSet) -> EigenDecomposition:
    """Koopman fit on consecutive frames with a median-heuristic bandwidth."""
    data = from_trajectory(pendulum, 1)
    kernel = KernelSpec.gaussian(median_bandwidth(data.x))
    return fit(data, kernel, PENDULUM_EPSILON, OperatorKind.KOOPMAN, 10)


@pytest.fixture(scope="session")
def pendulum_summary(pendulum_fit: EigenDecomposition) -> SummaryPair:
    """Min and max frames of phi_2, started at the best training frames."""
    (pair,) = summarize_all(
        pendulum_fit,
        [2],
        StartPolicy.BEST_OBSERVED,
        OptimizeConfig(bounds=(0.0, 255.0)),
    )
    return pair

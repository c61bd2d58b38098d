"""Tests for eigenfunction jump detection and time scales."""

import json
import math

import numpy as np
import pytest

from kto.changepoint.detect import (
    detect,
    detect_series,
    label_transitions,
    match_events,
    timescale,
)
from kto.core.exceptions import EmptySeriesError, InputError, ShapeMismatchError
from kto.kernels.models import KernelSpec
from kto.operators.fit import fit
from kto.tensordata.models import SnapshotSet, from_trajectory

STEP = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0]


@pytest.mark.unit
class TestTimescale:
    """Test the implied time scale -tau / ln|lambda|."""

    def test_inverse_e(self) -> None:
        """Test that |lambda| = 1/e with tau = 1 gives 1."""
        assert timescale(math.exp(-1.0), 1.0) == pytest.approx(1.0)

    def test_pendulum_value(self) -> None:
        """Test |lambda| = 0.69 at tau = 1."""
        assert timescale(0.69, 1.0) == pytest.approx(2.694, abs=1e-3)

    def test_uses_modulus(self) -> None:
        """Test that complex eigenvalues are mapped through their modulus."""
        value = 0.5 * np.exp(1j * 0.7)
        assert timescale(value, 2.0) == pytest.approx(timescale(0.5, 2.0))

    @pytest.mark.parametrize("eigenvalue", [1.0, 1.2, -1.0, 1j])
    def test_unit_modulus_is_infinite(self, eigenvalue: complex) -> None:
        """Test the infinity sentinel for |lambda| >= 1."""
        assert timescale(eigenvalue, 1.0) == math.inf

    def test_zero_eigenvalue(self) -> None:
        """Test that lambda = 0 maps to 0."""
        assert timescale(0.0, 1.0) == 0.0

    def test_increasing_in_modulus(self) -> None:
        """Test strict monotonicity on (0, 1)."""
        scales = [timescale(m, 1.0) for m in np.linspace(0.05, 0.95, 19)]
        assert np.all(np.diff(scales) > 0)

    def test_lag_time_must_be_positive(self) -> None:
        """Test that a non-positive lag time is rejected."""
        with pytest.raises(InputError):
            timescale(0.5, 0.0)


@pytest.mark.unit
class TestDetectSeries:
    """Test detection on precomputed series."""

    def test_constant_series(self) -> None:
        """Test that zero jumps give no events."""
        report = detect_series(np.full(10, 3.0))
        assert report.events == []
        assert report.thresholds == {1: 0.0}

    def test_single_step(self) -> None:
        """Test the step [0,0,0,1,1,1] at rel_threshold 0.5."""
        report = detect_series(STEP, rel_threshold=0.5)
        (event,) = report.events
        assert event.time_index == 3
        assert event.jump == 1.0
        assert event.eigen_index == 1

    def test_downward_jump_is_signed(self) -> None:
        """Test that the jump keeps its sign."""
        (event,) = detect_series(STEP[::-1], rel_threshold=0.5).events
        assert event.jump == -1.0

    @pytest.mark.parametrize("scale", [-3.0, 1e-6, 250.0])
    def test_scale_invariance(self, scale: float) -> None:
        """Test that multiplying a series by c != 0 keeps the positions."""
        rng = np.random.default_rng(4)
        levels = np.array([0.0, 2.0, -1.0, 3.0, 0.5, 2.5])
        series = np.repeat(levels, 20) + 0.01 * rng.normal(size=120)
        reference = detect_series(series).time_indices()
        assert reference == [20, 40, 60, 80, 100]
        assert detect_series(scale * series).time_indices() == reference

    def test_linear_ramp(self) -> None:
        """Test that a uniform ramp has no event above 1/(length - 1)."""
        ramp = np.linspace(0.0, 1.0, 11)
        assert detect_series(ramp, rel_threshold=0.11).events == []

    def test_lower_threshold_never_removes_events(self) -> None:
        """Test monotonicity in rel_threshold without suppression."""
        rng = np.random.default_rng(5)
        series = np.cumsum(rng.normal(size=200))
        previous: set[int] = set()
        for rel in (0.5, 0.3, 0.2, 0.1, 0.05):
            report = detect_series(series, rel_threshold=rel, min_separation=0)
            found = set(report.time_indices())
            assert previous <= found
            previous = found

    def test_suppression_keeps_largest(self) -> None:
        """Test that nearby smaller jumps are suppressed."""
        series = np.array([0.0, 0.0, 0.7, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
        report = detect_series(series, rel_threshold=0.25, min_separation=2)
        assert [e.time_index for e in report.events] == [2]
        separate = detect_series(series, rel_threshold=0.25, min_separation=0)
        assert [e.time_index for e in separate.events] == [2, 3]

    def test_events_above_threshold(self) -> None:
        """Test that every event clears the recorded threshold."""
        rng = np.random.default_rng(6)
        report = detect_series(np.cumsum(rng.normal(size=(300, 2)), axis=0), [2, 3])
        for event in report.events:
            assert abs(event.jump) >= report.thresholds[event.eigen_index]
            assert 1 <= event.time_index <= 299

    def test_ranked_by_timescale(self) -> None:
        """Test the (timescale desc, time asc) order across eigen indices."""
        series = np.column_stack([STEP, STEP[::-1], [0, 1, 1, 1, 1, 1]])
        report = detect_series(
            series, [2, 3, 4], [1.0, 5.0, 1.0], rel_threshold=0.5, min_separation=0
        )
        order = [(e.eigen_index, e.time_index) for e in report.events]
        assert order == [(3, 3), (4, 1), (2, 3)]

    def test_rolling_median_removes_spikes(self) -> None:
        """Test that the smoothing variant ignores an isolated outlier."""
        series = np.array(STEP).repeat(5)
        series[7] = 5.0
        raw = detect_series(series, rel_threshold=0.5, min_separation=0)
        smoothed = detect_series(
            series, rel_threshold=0.5, min_separation=0, smoothing_window=3
        )
        assert raw.time_indices() == [7, 8]
        assert smoothed.time_indices() == [15]

    def test_too_short(self) -> None:
        """Test that a single value has no steps."""
        with pytest.raises(EmptySeriesError):
            detect_series([1.0])

    def test_index_count_mismatch(self) -> None:
        """Test that indices must match the series columns."""
        with pytest.raises(ShapeMismatchError):
            detect_series(np.zeros((5, 2)), [2])

    @pytest.mark.parametrize("rel", [0.0, 1.5])
    def test_threshold_range(self, rel: float) -> None:
        """Test that rel_threshold must lie in (0, 1]."""
        with pytest.raises(InputError):
            detect_series(STEP, rel_threshold=rel)


@pytest.mark.unit
class TestDetect:
    """Test detection from a fitted decomposition."""

    @pytest.fixture
    def two_state(self):
        """A trajectory hopping between two separated clusters."""
        rng = np.random.default_rng(12)
        centers = np.repeat([0.0, 4.0, 0.0, 4.0], 30)
        traj = SnapshotSet.from_frames(centers + 0.1 * rng.normal(size=120), dt=0.5)
        data = from_trajectory(traj, 1)
        return traj, fit(data, KernelSpec.gaussian(1.0), 0.1, num_eigs=4)

    def test_finds_cluster_switches(self, two_state) -> None:
        """Test that the leading non-trivial eigenfunction marks the switches."""
        traj, decomp = two_state
        report = detect(decomp, traj, [2])
        assert report.time_indices() == [30, 60, 90]
        expected = timescale(decomp.eigenvalue(2), 0.5)
        assert all(event.timescale == expected for event in report.events)

    def test_default_indices_skip_first(self, two_state) -> None:
        """Test that the trivial eigenfunction is excluded by default."""
        traj, decomp = two_state
        assert detect(decomp, traj).indices == (2, 3, 4)

    def test_shape_mismatch(self, two_state) -> None:
        """Test that the trajectory must have the training shape."""
        _, decomp = two_state
        with pytest.raises(ShapeMismatchError):
            detect(decomp, SnapshotSet.from_frames(np.zeros((5, 2))), [2])


@pytest.mark.unit
class TestExport:
    """Test the JSON and CSV views of a report."""

    def test_frame_columns(self) -> None:
        """Test the fixed CSV column order."""
        frame = detect_series(STEP, rel_threshold=0.5).to_frame()
        assert list(frame.columns) == ["time_index", "eigen_index", "jump", "timescale"]
        assert frame.iloc[0]["time_index"] == 3

    def test_json_writes_null_for_infinite_timescale(self) -> None:
        """Test that the JSON document is strict."""
        document = json.loads(detect_series(STEP, rel_threshold=0.5).to_json())
        assert document["events"][0]["timescale"] is None
        assert document["series_length"] == 6

    def test_series_frame(self) -> None:
        """Test one column per eigen index after the time index."""
        frame = detect_series(np.zeros((4, 2)), [2, 5]).series_frame()
        assert list(frame.columns) == ["time_index", "phi_2", "phi_5"]


@pytest.mark.unit
class TestScoring:
    """Test transition extraction and matching helpers."""

    def test_label_transitions(self) -> None:
        """Test positions where consecutive labels differ."""
        assert label_transitions([0, 0, 1, 1, 2, 0]) == [2, 4, 5]

    def test_match_within_tolerance(self) -> None:
        """Test one-to-one matching with a tolerance window."""
        precision, recall = match_events([10, 12, 50], [11, 80], tolerance=2)
        assert precision == pytest.approx(1 / 3)
        assert recall == pytest.approx(0.5)

    def test_empty(self) -> None:
        """Test that empty inputs score perfectly."""
        assert match_events([], [], tolerance=1) == (1.0, 1.0)

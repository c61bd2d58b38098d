"""Tests for staged output directories and CSV tables."""

import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from kto.cli.outputs import (
    EIGENVALUE_COLUMNS,
    TRACE_COLUMNS,
    eigenvalue_frame,
    series_frame,
    staged_output,
    trace_frame,
    write_frame,
)
from kto.summarize.models import Direction, OptimizationResult, TracePoint


@pytest.mark.unit
class TestStagedOutput:
    """Test that outputs appear only when a command succeeds."""

    def test_creates_directory(self, tmp_path: Path) -> None:
        """Test that a fresh directory receives the staged files."""
        out = tmp_path / "run"
        with staged_output(out) as stage:
            (stage / "a.txt").write_text("a")
            (stage / "sub").mkdir()
            (stage / "sub" / "b.txt").write_text("b")
            assert not out.exists()
        assert (out / "a.txt").read_text() == "a"
        assert (out / "sub" / "b.txt").read_text() == "b"
        assert sorted(p.name for p in tmp_path.iterdir()) == ["run"]

    def test_merges_into_existing(self, tmp_path: Path) -> None:
        """Test that files are replaced in an existing directory."""
        out = tmp_path / "run"
        out.mkdir()
        (out / "a.txt").write_text("old")
        (out / "keep.txt").write_text("keep")
        with staged_output(out) as stage:
            (stage / "a.txt").write_text("new")
        assert (out / "a.txt").read_text() == "new"
        assert (out / "keep.txt").read_text() == "keep"

    def test_error_leaves_nothing(self, tmp_path: Path) -> None:
        """Test that a failing command publishes nothing and cleans up."""
        out = tmp_path / "run"
        with pytest.raises(RuntimeError), staged_output(out) as stage:
            (stage / "a.txt").write_text("a")
            raise RuntimeError("boom")
        assert not out.exists()
        assert list(tmp_path.iterdir()) == []


@pytest.mark.unit
class TestTables:
    """Test the CSV schemas."""

    def test_eigenvalue_frame(self) -> None:
        """Test the columns and the derived quantities."""
        frame = eigenvalue_frame([1.0, 0.5 + 0.5j, 0.5 - 0.5j, 0.0], lag_time=2.0)
        assert list(frame.columns) == EIGENVALUE_COLUMNS
        assert frame["index"].tolist() == [1, 2, 3, 4]
        assert math.isinf(frame["timescale"][0])
        assert frame["modulus"][1] == pytest.approx(math.sqrt(0.5))
        assert frame["phase"][1] == pytest.approx(math.pi / 4)
        assert frame["phase"][2] == pytest.approx(-math.pi / 4)
        assert frame["timescale"][1] == pytest.approx(-2.0 / math.log(math.sqrt(0.5)))
        assert frame["timescale"][3] == 0.0

    def test_series_frame(self) -> None:
        """Test one real and one imaginary column per eigen index."""
        values = np.array([[1.0 + 2.0j, 3.0], [4.0, 5.0 - 1.0j]])
        frame = series_frame(values, [1, 3], [0, 10])
        assert list(frame.columns) == [
            "time_index",
            "phi_1_re",
            "phi_1_im",
            "phi_3_re",
            "phi_3_im",
        ]
        assert frame["time_index"].tolist() == [0, 10]
        assert frame["phi_1_im"].tolist() == [2.0, 0.0]
        assert frame["phi_3_im"].tolist() == [0.0, -1.0]

    def test_trace_frame(self) -> None:
        """Test that every trace point becomes a row."""
        result = OptimizationResult(
            x_star=np.zeros(1),
            value=1.0,
            iterations=1,
            converged=True,
            direction=Direction.MAXIMIZE,
            trace=[TracePoint(0, 0.5, 0.1, 0.0), TracePoint(1, 1.0, 0.11, 0.0)],
        )
        frame = trace_frame(result)
        assert list(frame.columns) == TRACE_COLUMNS
        assert frame["value"].tolist() == [0.5, 1.0]

    def test_write_frame_round_trips_floats(self, tmp_path: Path) -> None:
        """Test that floats survive the CSV at full precision."""
        values = np.random.default_rng(0).normal(size=20)
        path = write_frame(pd.DataFrame({"v": values}), tmp_path / "t.csv")
        loaded = pd.read_csv(path, float_precision="round_trip")
        np.testing.assert_array_equal(loaded["v"].to_numpy(), values)

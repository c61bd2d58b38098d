"""Change-point events and reports."""

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd

from kto.tensordata.models import FloatArray

EVENT_COLUMNS = ["time_index", "eigen_index", "jump", "timescale"]


@dataclass(frozen=True, slots=True)
class ChangePoint:
    """A jump of ``Re phi_j`` from position ``time_index - 1`` to ``time_index``."""

    time_index: int
    eigen_index: int
    jump: float
    timescale: float


@dataclass(frozen=True, slots=True, eq=False)
class ChangePointReport:
    """Detected change points, ranked by the implied time scale.

    Attributes:
        events: Sorted by decreasing timescale, then time index, then eigen index
        indices: Eigen indices the series were built from
        thresholds: Absolute jump threshold used per eigen index
        series: ``(T, len(indices))`` real parts of the analysed series
    """

    events: list[ChangePoint]
    indices: tuple[int, ...]
    thresholds: dict[int, float]
    series: FloatArray

    def __len__(self) -> int:
        return len(self.events)

    def for_index(self, eigen_index: int) -> list[ChangePoint]:
        return [event for event in self.events if event.eigen_index == eigen_index]

    def time_indices(self) -> list[int]:
        """Distinct event positions over all eigen indices, ascending."""
        return sorted({event.time_index for event in self.events})

    def to_frame(self) -> pd.DataFrame:
        rows = [asdict(event) for event in self.events]
        return pd.DataFrame(rows, columns=EVENT_COLUMNS).astype(
            {"time_index": "int64", "eigen_index": "int64"}
        )

    def to_json(self) -> str:
        """JSON document; infinite time scales are written as ``null``."""

        def finite(value: float) -> float | None:
            return value if math.isfinite(value) else None

        document = {
            "indices": list(self.indices),
            "series_length": int(self.series.shape[0]),
            "thresholds": {str(k): v for k, v in self.thresholds.items()},
            "events": [
                {
                    "time_index": event.time_index,
                    "eigen_index": event.eigen_index,
                    "jump": event.jump,
                    "timescale": finite(event.timescale),
                }
                for event in self.events
            ],
        }
        return json.dumps(document, indent=2, allow_nan=False) + "\n"

    def series_frame(self) -> pd.DataFrame:
        """The analysed series with one ``phi_<j>`` column per eigen index."""
        frame = pd.DataFrame(
            np.asarray(self.series), columns=[f"phi_{j}" for j in self.indices]
        )
        frame.insert(0, "time_index", np.arange(len(frame)))
        return frame

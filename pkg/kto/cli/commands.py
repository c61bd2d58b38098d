"""The five CLI commands.

Each command takes a validated run configuration, writes its files into a
staged directory and returns the published paths. ``config.json`` echoes the
configuration in every output directory.
"""

from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from PIL import Image

from kto.baselines.dmd import exact_dmd
from kto.baselines.dmd import to_json as dmd_json
from kto.changepoint.detect import detect
from kto.cli.config import (
    ChangepointsConfig,
    DmdConfig,
    FitConfig,
    RunConfig,
    SigmaRule,
    SimulateConfig,
    SourceConfig,
    SummarizeConfig,
)
from kto.cli.outputs import (
    eigenvalue_frame,
    series_frame,
    staged_output,
    trace_frame,
    write_frame,
    write_text,
)
from kto.core.exceptions import IoFailureError
from kto.core.logging import get_logger
from kto.kernels.functions import gram_pack, median_bandwidth
from kto.kernels.models import KernelKind
from kto.operators.eigenfunctions import eigenfunction_values
from kto.operators.fit import fit
from kto.operators.models import EigenDecomposition
from kto.operators.serialization import load_decomposition, save_decomposition
from kto.summarize.models import OptimizationResult
from kto.summarize.optimize import summarize_all
from kto.synth.pendulum import blob_centers, render_pendulum
from kto.synth.sde import simulate
from kto.tensordata.io import load, save
from kto.tensordata.models import SnapshotSet, from_trajectory, preprocess

logger = get_logger(__name__)

CONFIG_FILENAME = "config.json"
DECOMPOSITION_FILENAME = "decomposition.json"


def _published(out: Path, stage: Path) -> list[Path]:
    return sorted(out / p.relative_to(stage) for p in stage.rglob("*") if p.is_file())


def _load_trajectory(cfg: SourceConfig) -> SnapshotSet:
    if cfg.input is None:
        raise IoFailureError("no input trajectory configured")
    traj = load(cfg.input, cfg.format, header=cfg.header, dt=cfg.dt)
    return preprocess(traj, cfg.preprocess)


def _fit(cfg: FitConfig, traj: SnapshotSet) -> EigenDecomposition:
    data = from_trajectory(traj, cfg.lag, cfg.pair_stride)
    sigma = None
    if cfg.kernel is KernelKind.GAUSSIAN and cfg.sigma_rule is SigmaRule.MEDIAN:
        sigma = median_bandwidth(data.x)
    kernel = cfg.kernel_spec(sigma)
    pack = gram_pack(kernel, data, workers=cfg.workers)
    return fit(data, kernel, cfg.epsilon, cfg.operator, cfg.num_eigs, pack=pack)


def _decomposition(
    cfg: SummarizeConfig | ChangepointsConfig, traj: SnapshotSet | None, stage: Path
) -> EigenDecomposition:
    """Load the configured decomposition, or fit one and save it with the outputs."""
    if cfg.decomposition is not None:
        logger.info("cli.decomposition_reused", path=str(cfg.decomposition))
        return load_decomposition(cfg.decomposition)
    decomp = _fit(cfg, traj if traj is not None else _load_trajectory(cfg))
    save_decomposition(decomp, stage / DECOMPOSITION_FILENAME)
    return decomp


def cmd_simulate(cfg: SimulateConfig) -> list[Path]:
    """Generate a triple-well trajectory or synthetic pendulum frames."""
    with staged_output(cfg.out) as stage:
        if cfg.system == "triple-well":
            sde = cfg.sde()
            traj, labels = simulate(sde)
            save(traj, stage / "trajectory.kto1")
            save(traj, stage / "trajectory.csv")
            milestones = sde.potential.milestone_labels(traj.data[:, 0])
            write_frame(
                pd.DataFrame(
                    {
                        "stored_index": np.arange(traj.count),
                        "label": labels,
                        "milestone": milestones,
                    }
                ),
                stage / "labels.csv",
            )
        else:
            pendulum = cfg.pendulum()
            frames = render_pendulum(pendulum)
            save(frames, stage / "frames", "pgm")
            save(frames, stage / "trajectory.kto1")
            write_frame(
                pd.DataFrame(
                    {
                        "frame": np.arange(frames.count),
                        "center_col": blob_centers(pendulum),
                    }
                ),
                stage / "centers.csv",
            )
        write_text(cfg.echo(), stage / CONFIG_FILENAME)
        written = _published(cfg.out, stage)
    return written


def cmd_fit(cfg: FitConfig) -> list[Path]:
    """Fit a decomposition; write it with its spectrum and eigenfunction series."""
    with staged_output(cfg.out) as stage:
        traj = _load_trajectory(cfg)
        decomp = _fit(cfg, traj)
        save_decomposition(decomp, stage / DECOMPOSITION_FILENAME)
        write_frame(
            eigenvalue_frame(decomp.eigenvalues, decomp.lag_time),
            stage / "eigenvalues.csv",
        )
        indices = list(range(1, decomp.num_eigs + 1))
        values = eigenfunction_values(decomp, traj.every(cfg.series_stride), indices)
        time_index = np.arange(0, traj.count, cfg.series_stride)
        write_frame(series_frame(values, indices, time_index), stage / "series.csv")
        write_text(cfg.echo(), stage / CONFIG_FILENAME)
        written = _published(cfg.out, stage)
    return written


def _write_summary(
    stage: Path, stem: str, result: OptimizationResult, shape: tuple[int, ...]
) -> None:
    snapshot = SnapshotSet(shape=shape, data=result.x_star[np.newaxis, :])
    save(snapshot, stage / f"{stem}.kto1")
    if len(shape) == 1:
        save(snapshot, stage / f"{stem}.csv")
    image_shaped = len(shape) == 2 or (len(shape) == 3 and shape[2] == 3)
    in_range = bool(np.all((result.x_star >= 0.0) & (result.x_star <= 255.0)))
    if image_shaped and in_range:
        suffix = "pgm" if len(shape) == 2 else "ppm"
        pixels = np.rint(snapshot.frames()[0]).astype(np.uint8)
        target = stage / f"{stem}.{suffix}"
        try:
            Image.fromarray(pixels).save(target, format="PPM")
        except OSError as e:
            raise IoFailureError(f"cannot write {target}: {e}") from e
    write_frame(trace_frame(result), stage / f"trace_{stem}.csv")


def cmd_summarize(cfg: SummarizeConfig) -> list[Path]:
    """Minimize and maximize eigenfunctions; write the snapshots and traces."""
    with staged_output(cfg.out) as stage:
        decomp = _decomposition(cfg, None, stage)
        bounds = cfg.bounds
        if bounds is None and cfg.bounds_from_data:
            training = decomp.training_x.data
            bounds = (float(training.min()), float(training.max()))
        pairs = summarize_all(
            decomp,
            cfg.indices,
            cfg.start,
            cfg.optimize_config(bounds),
            x0=cfg.x0,
            workers=cfg.workers,
        )

        rows: list[dict[str, Any]] = []
        for pair in pairs:
            for tag, result in (("min", pair.minimum), ("max", pair.maximum)):
                stem = f"phi_{pair.index}_{tag}"
                _write_summary(stage, stem, result, decomp.training_x.shape)
                rows.append(
                    {
                        "index": pair.index,
                        "direction": result.direction.value,
                        "value": result.value,
                        "iterations": result.iterations,
                        "converged": result.converged,
                    }
                )
        write_frame(pd.DataFrame(rows), stage / "summaries.csv")
        write_text(cfg.echo(), stage / CONFIG_FILENAME)
        written = _published(cfg.out, stage)
    return written


def cmd_changepoints(cfg: ChangepointsConfig) -> list[Path]:
    """Detect change points along the input trajectory.

    Time indices refer to the trajectory subsampled by ``series_stride``.
    """
    with staged_output(cfg.out) as stage:
        traj = _load_trajectory(cfg)
        decomp = _decomposition(cfg, traj, stage)
        report = detect(
            decomp,
            traj.every(cfg.series_stride),
            cfg.indices,
            cfg.rel_threshold,
            cfg.min_separation,
            smoothing_window=cfg.smoothing_window,
        )
        write_text(report.to_json(), stage / "changepoints.json")
        write_frame(report.to_frame(), stage / "changepoints.csv")
        write_frame(report.series_frame(), stage / "series.csv")
        write_text(cfg.echo(), stage / CONFIG_FILENAME)
        written = _published(cfg.out, stage)
    return written


def cmd_dmd(cfg: DmdConfig) -> list[Path]:
    """Exact DMD baseline; its eigenvalue table matches the one from ``fit``."""
    with staged_output(cfg.out) as stage:
        data = from_trajectory(_load_trajectory(cfg), cfg.lag, cfg.pair_stride)
        result = exact_dmd(data, cfg.rank, cfg.svd_tol)
        write_text(dmd_json(result), stage / "dmd.json")
        write_frame(
            eigenvalue_frame(result.eigenvalues, data.lag_time),
            stage / "eigenvalues.csv",
        )
        write_text(cfg.echo(), stage / CONFIG_FILENAME)
        written = _published(cfg.out, stage)
    return written


COMMANDS: dict[str, tuple[type[RunConfig], Callable[[Any], list[Path]]]] = {
    "simulate": (SimulateConfig, cmd_simulate),
    "fit": (FitConfig, cmd_fit),
    "summarize": (SummarizeConfig, cmd_summarize),
    "changepoints": (ChangepointsConfig, cmd_changepoints),
    "dmd": (DmdConfig, cmd_dmd),
}

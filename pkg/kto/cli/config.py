"""Run configurations for the CLI commands and their layered resolution.

Each command validates one frozen model. Values are merged from the lowest to the
highest precedence: model defaults, the ``--preset`` section for the command, the
``--config`` JSON file and finally explicit flags.
"""

import json
from collections.abc import Mapping
from enum import StrEnum
from importlib import resources
from pathlib import Path
from typing import Any, Literal, Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from kto.baselines.dmd import DEFAULT_SVD_TOL
from kto.changepoint.detect import DEFAULT_MIN_SEPARATION, DEFAULT_REL_THRESHOLD
from kto.core.config import get_settings
from kto.core.exceptions import IoFailureError, ParseError
from kto.core.logging import get_logger
from kto.kernels.models import KernelKind, KernelSpec
from kto.operators.models import OperatorKind
from kto.summarize.models import OptimizeConfig, StartPolicy
from kto.synth.models import TRIPLE_WELL, PendulumConfig, Potential, SdeConfig
from kto.tensordata.io import SnapshotFormat
from kto.tensordata.models import Preprocessing

logger = get_logger(__name__)

PRESETS = ("triple-well", "pendulum-synth", "paper-video")
PRESET_ALIASES = {"pendulum": "pendulum-synth"}


class SigmaRule(StrEnum):
    FIXED = "fixed"
    MEDIAN = "median"


class RunConfig(BaseModel):
    """Settings shared by every command."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    out: Path = Field(default_factory=lambda: get_settings().output_dir)

    def echo(self) -> str:
        """The resolved configuration as written to ``config.json``.

        ``out`` is left out so that a run replayed into another directory
        reproduces this file as well.
        """
        document = self.model_dump(mode="json", exclude={"out"})
        return json.dumps(document, indent=2) + "\n"


class SimulateConfig(RunConfig):
    system: Literal["triple-well", "pendulum"] = "triple-well"
    seed: int = Field(default=42, ge=0, lt=2**64)

    # triple well
    coefficients: tuple[float, ...] = TRIPLE_WELL
    diffusion: float = Field(default=0.28125, gt=0.0, allow_inf_nan=False)
    dt: float = Field(default=1e-3, gt=0.0, allow_inf_nan=False)
    steps: int = Field(default=2_000_000, ge=1)
    x0: float = Field(default=-1.29, allow_inf_nan=False)
    store_stride: int = Field(default=100, ge=1)

    # pendulum
    frames: int = Field(default=240, ge=1)
    width: int = 64
    height: int = 64
    period: int = 24
    amplitude: float = Field(default=20.0, allow_inf_nan=False)
    noise: float = Field(default=2.0, ge=0.0, allow_inf_nan=False)
    blob_sigma: float = Field(default=4.0, gt=0.0, allow_inf_nan=False)
    intensity: float = Field(default=200.0, gt=0.0, le=255.0)

    @field_validator("coefficients")
    @classmethod
    def check_potential(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        return Potential(coefficients=value).coefficients

    def sde(self) -> SdeConfig:
        return SdeConfig(
            potential=Potential(coefficients=self.coefficients),
            diffusion=self.diffusion,
            dt=self.dt,
            n_steps=self.steps,
            x0=self.x0,
            seed=self.seed,
            store_stride=self.store_stride,
        )

    def pendulum(self) -> PendulumConfig:
        return PendulumConfig(
            n_frames=self.frames,
            width=self.width,
            height=self.height,
            period_frames=self.period,
            amplitude_px=self.amplitude,
            noise_sigma=self.noise,
            seed=self.seed,
            blob_sigma=self.blob_sigma,
            intensity=self.intensity,
        )


class SourceConfig(RunConfig):
    """Where the trajectory comes from and how it is paired."""

    input: Path | None = None
    format: SnapshotFormat | None = None
    header: bool = False
    dt: float | None = Field(default=None, gt=0.0, allow_inf_nan=False)
    preprocess: Preprocessing = Preprocessing.NONE
    lag: int = Field(default=1, ge=1)
    pair_stride: int = Field(default=1, ge=1)

    @field_validator("input")
    @classmethod
    def check_exists(cls, value: Path | None) -> Path | None:
        if value is not None and not value.exists():
            raise ValueError(f"{value} does not exist")
        return value

    def has_source(self) -> bool:
        return self.input is not None

    @model_validator(mode="after")
    def require_source(self) -> Self:
        if not self.has_source():
            raise ValueError("an input trajectory is required")
        return self


class FitConfig(SourceConfig):
    kernel: KernelKind = KernelKind.GAUSSIAN
    sigma: float = Field(default=1.0, gt=0.0, allow_inf_nan=False)
    sigma_rule: SigmaRule = SigmaRule.FIXED
    degree: int = Field(default=2, ge=1)
    offset: float = Field(default=1.0, ge=0.0, allow_inf_nan=False)
    epsilon: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    operator: OperatorKind = OperatorKind.KOOPMAN
    num_eigs: int | None = Field(default=None, ge=1)
    series_stride: int = Field(default=1, ge=1)
    workers: int | None = Field(default=None, ge=1)

    def kernel_spec(self, sigma: float | None = None) -> KernelSpec:
        """Kernel for this run; ``sigma`` replaces the configured bandwidth."""
        return KernelSpec(
            kind=self.kernel,
            sigma=sigma if sigma is not None else self.sigma,
            degree=self.degree,
            offset=self.offset,
        )


class SummarizeConfig(FitConfig):
    decomposition: Path | None = None
    indices: tuple[int, ...] = Field(default=(2,), min_length=1)
    start: StartPolicy = StartPolicy.BEST_OBSERVED
    x0: tuple[float, ...] | None = None
    eta0: float | None = Field(default=None, gt=0.0, allow_inf_nan=False)
    eta_min: float | None = Field(default=None, gt=0.0, allow_inf_nan=False)
    shrink: float = Field(default=0.5, gt=0.0, lt=1.0)
    grow: float = Field(default=1.1, ge=1.0, allow_inf_nan=False)
    max_iters: int = Field(default=10_000, ge=1)
    tol: float | None = Field(default=None, ge=0.0, allow_inf_nan=False)
    bounds: tuple[float, float] | None = None
    bounds_from_data: bool = False

    @field_validator("decomposition")
    @classmethod
    def check_decomposition(cls, value: Path | None) -> Path | None:
        if value is not None and not value.is_file():
            raise ValueError(f"{value} does not exist")
        return value

    def has_source(self) -> bool:
        return self.input is not None or self.decomposition is not None

    @model_validator(mode="after")
    def check_optimizer(self) -> Self:
        self.optimize_config(self.bounds)
        return self

    def optimize_config(self, bounds: tuple[float, float] | None) -> OptimizeConfig:
        return OptimizeConfig(
            eta0=self.eta0,
            eta_min=self.eta_min,
            shrink=self.shrink,
            grow=self.grow,
            max_iters=self.max_iters,
            tol=self.tol,
            bounds=bounds,
        )


class ChangepointsConfig(FitConfig):
    decomposition: Path | None = None
    indices: tuple[int, ...] | None = None
    rel_threshold: float = Field(default=DEFAULT_REL_THRESHOLD, gt=0.0, le=1.0)
    min_separation: int = Field(default=DEFAULT_MIN_SEPARATION, ge=0)
    smoothing_window: int | None = Field(default=None, ge=1)

    @field_validator("decomposition")
    @classmethod
    def check_decomposition(cls, value: Path | None) -> Path | None:
        if value is not None and not value.is_file():
            raise ValueError(f"{value} does not exist")
        return value


class DmdConfig(SourceConfig):
    rank: int | None = Field(default=None, ge=1)
    svd_tol: float = Field(default=DEFAULT_SVD_TOL, gt=0.0, allow_inf_nan=False)


def _read_json(path: Path) -> dict[str, Any]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailureError(f"cannot read {path}: {e}") from e
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(document, dict):
        raise ParseError(f"{path} must hold a JSON object")
    return document


def load_preset(name: str) -> dict[str, Any]:
    """Read a bundled preset: one section of settings per command."""
    name = PRESET_ALIASES.get(name, name)
    if name not in PRESETS:
        raise ParseError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    resource = resources.files("kto") / "presets" / f"{name}.json"
    try:
        document = json.loads(resource.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"preset {name!r} cannot be read: {e}") from e
    if not isinstance(document, dict):
        raise ParseError(f"preset {name!r} must hold a JSON object")
    return document


def resolve_config[C: RunConfig](
    model: type[C],
    command: str,
    *,
    preset: str | None = None,
    config_path: Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> C:
    """Merge the configuration layers for ``command`` and validate them.

    Raises:
        pydantic.ValidationError: If the merged values violate an invariant
        ParseError: If a preset or config file is malformed
        IoFailureError: If the config file cannot be read
    """
    merged: dict[str, Any] = {}
    sources: list[str] = []
    if preset is not None:
        merged.update(load_preset(preset).get(command, {}))
        sources.append(f"preset:{PRESET_ALIASES.get(preset, preset)}")
    if config_path is not None:
        merged.update(_read_json(config_path))
        sources.append(f"config:{config_path}")
    if overrides:
        merged.update(overrides)
        sources.append("flags")

    logger.debug("cli.config_resolved", command=command, sources=sources)
    return model.model_validate(merged)

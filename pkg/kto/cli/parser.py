"""Argument parser for the ``kto`` command.

Every flag defaults to ``argparse.SUPPRESS`` so the namespace holds only what
was given on the command line; those values form the top configuration layer.
"""

import argparse
from collections.abc import Callable
from enum import StrEnum
from pathlib import Path

from kto.cli.config import PRESET_ALIASES, PRESETS, SigmaRule
from kto.core.config import get_settings
from kto.kernels.models import KernelKind
from kto.operators.models import OperatorKind
from kto.summarize.models import StartPolicy
from kto.tensordata.io import SnapshotFormat
from kto.tensordata.models import Preprocessing

NON_CONFIG_OPTIONS = ("command", "preset", "config", "log_level")


def _values(enum: type[StrEnum]) -> list[str]:
    return [member.value for member in enum]


def _flag(sub: argparse.ArgumentParser, name: str, help_text: str) -> None:
    sub.add_argument(
        name, action="store_true", default=argparse.SUPPRESS, help=help_text
    )


def _add_run_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--preset",
        choices=[*PRESETS, *PRESET_ALIASES],
        help="bundled parameter set to start from",
    )
    sub.add_argument("--config", type=Path, help="JSON file, e.g. an echoed config")
    sub.add_argument("--out", type=Path, help="output directory")
    sub.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")


def _add_simulate_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--system", choices=["triple-well", "pendulum"])
    sub.add_argument("--seed", type=int)
    sub.add_argument("--steps", type=int, help="Euler-Maruyama steps")
    sub.add_argument("--dt", type=float, help="integrator step")
    sub.add_argument("--diffusion", type=float)
    sub.add_argument("--x0", type=float, help="initial state")
    sub.add_argument("--store-stride", type=int, help="store every n-th state")
    sub.add_argument("--frames", type=int, help="pendulum frame count")
    sub.add_argument("--width", type=int)
    sub.add_argument("--height", type=int)
    sub.add_argument("--period", type=int, help="swing period in frames")
    sub.add_argument("--amplitude", type=float, help="swing amplitude in pixels")
    sub.add_argument("--noise", type=float, help="pixel noise standard deviation")
    sub.add_argument("--blob-sigma", type=float)
    sub.add_argument("--intensity", type=float)


def _add_source_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--input", type=Path, help="CSV, KTO1 file or frame directory")
    sub.add_argument("--format", choices=_values(SnapshotFormat))
    _flag(sub, "--header", "skip the first CSV row")
    sub.add_argument("--dt", type=float, help="time between snapshots")
    sub.add_argument("--preprocess", choices=_values(Preprocessing))
    sub.add_argument("--lag", type=int, help="lag in snapshot steps")
    sub.add_argument("--pair-stride", type=int, help="spacing of pair start indices")


def _add_fit_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--kernel", choices=_values(KernelKind))
    sub.add_argument("--sigma", type=float, help="Gaussian bandwidth")
    sub.add_argument(
        "--sigma-rule",
        choices=_values(SigmaRule),
        help="'median' replaces --sigma by the median pairwise distance",
    )
    sub.add_argument("--degree", type=int, help="polynomial kernel degree")
    sub.add_argument("--offset", type=float, help="polynomial kernel offset")
    sub.add_argument("--epsilon", type=float, help="Tikhonov regularization")
    sub.add_argument("--operator", choices=_values(OperatorKind))
    sub.add_argument("--num-eigs", type=int)
    sub.add_argument(
        "--series-stride", type=int, help="evaluate series on every n-th snapshot"
    )
    sub.add_argument("--workers", type=int, help="threads for Gram assembly")


def _add_reuse_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--decomposition", type=Path, help="reuse a saved fit")
    sub.add_argument("--indices", type=int, nargs="+", help="1-based eigen indices")


def _add_summarize_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--start", choices=_values(StartPolicy))
    sub.add_argument("--x0", type=float, nargs="+", help="common start snapshot")
    sub.add_argument("--eta0", type=float)
    sub.add_argument("--eta-min", type=float)
    sub.add_argument("--shrink", type=float)
    sub.add_argument("--grow", type=float)
    sub.add_argument("--max-iters", type=int)
    sub.add_argument("--tol", type=float)
    sub.add_argument("--bounds", type=float, nargs=2, metavar=("LO", "HI"))
    _flag(sub, "--bounds-from-data", "bound values by the training data range")


def _add_changepoint_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--rel-threshold", type=float)
    sub.add_argument("--min-separation", type=int)
    sub.add_argument("--smoothing-window", type=int, help="rolling median width")


def _add_dmd_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--rank", type=int, help="truncation rank")
    sub.add_argument("--svd-tol", type=float, help="relative singular value cut-off")


_SUBCOMMANDS: dict[str, tuple[str, list[Callable[[argparse.ArgumentParser], None]]]] = {
    "simulate": (
        "generate a triple-well trajectory or pendulum frames",
        [_add_simulate_options],
    ),
    "fit": (
        "estimate a kernel Koopman or Perron-Frobenius operator",
        [_add_source_options, _add_fit_options],
    ),
    "summarize": (
        "synthesize snapshots extremizing eigenfunctions",
        [
            _add_source_options,
            _add_fit_options,
            _add_reuse_options,
            _add_summarize_options,
        ],
    ),
    "changepoints": (
        "detect regime changes from eigenfunction jumps",
        [
            _add_source_options,
            _add_fit_options,
            _add_reuse_options,
            _add_changepoint_options,
        ],
    ),
    "dmd": (
        "exact DMD baseline spectrum",
        [_add_source_options, _add_dmd_options],
    ),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kto",
        description="Kernel transfer operators for snapshot data.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {get_settings().version}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (help_text, option_groups) in _SUBCOMMANDS.items():
        sub = subparsers.add_parser(
            name, help=help_text, argument_default=argparse.SUPPRESS
        )
        _add_run_options(sub)
        for add_options in option_groups:
            add_options(sub)
    return parser

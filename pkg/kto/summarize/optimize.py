"""Single-snapshot summarization by gradient ascent and descent on eigenfunctions.

Each step proposes ``clip(x + eta * sign * Re grad phi(x))``. A proposal is
accepted only if it strictly improves ``sign * Re phi``; accepted steps grow
``eta`` (capped at ``10 * eta0``), rejected steps shrink it. The run converges
when the improvement drops below ``tol``, when ``eta`` falls below
``eta_min`` or when the gradient vanishes.
"""

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import numpy.typing as npt

from kto.core.config import get_settings
from kto.core.exceptions import (
    DimensionMismatchError,
    InputError,
    NonFiniteObjectiveError,
)
from kto.core.logging import get_logger
from kto.operators.eigenfunctions import (
    eigenfunction_values,
    eval_eigenfunction,
    grad_eigenfunction,
)
from kto.operators.models import ComplexArray, EigenDecomposition, Eigenfunction
from kto.summarize.models import (
    Direction,
    OptimizationResult,
    OptimizeConfig,
    StartPolicy,
    SummaryPair,
    TracePoint,
)
from kto.tensordata.models import FloatArray

logger = get_logger(__name__)


def _evaluate(ef: Eigenfunction, x: FloatArray) -> tuple[complex, ComplexArray]:
    value = eval_eigenfunction(ef, x)
    grad = grad_eigenfunction(ef, x)
    if not (np.isfinite(value) and np.all(np.isfinite(grad))):
        raise NonFiniteObjectiveError("eigenfunction or gradient is not finite")
    return value, grad


def optimize(
    ef: Eigenfunction,
    x0: npt.ArrayLike,
    direction: Direction | str,
    cfg: OptimizeConfig | None = None,
) -> OptimizationResult:
    """Drive ``Re phi`` to a local minimum or maximum starting from ``x0``.

    Args:
        ef: Eigenfunction to optimize
        x0: Initial snapshot, flattened
        direction: ``minimize`` or ``maximize``
        cfg: Step schedule and optional box bounds

    Returns:
        The final snapshot, its value and the trace of accepted iterates

    Raises:
        DimensionMismatchError: If ``x0`` does not match the training snapshots
        InputError: If ``x0`` lies outside the bounds
        NonFiniteObjectiveError: If ``phi`` or its gradient is not finite
    """
    direction = Direction(direction)
    cfg = cfg or OptimizeConfig()
    x = np.array(x0, dtype=np.float64).ravel()
    if x.size != ef.training_x.dim:
        raise DimensionMismatchError(
            f"x0 has length {x.size}, eigenfunction expects {ef.training_x.dim}"
        )
    lo, hi = cfg.bounds if cfg.bounds is not None else (-math.inf, math.inf)
    if np.any(x < lo) or np.any(x > hi):
        raise InputError(f"x0 lies outside the bounds [{lo}, {hi}]")

    sign = direction.sign
    value, grad = _evaluate(ef, x)
    eta0 = cfg.initial_eta()
    eta = eta0
    eta_min = cfg.floor_eta(eta0)
    tol = cfg.tolerance(value)
    objective = sign * value.real

    trace = [TracePoint(0, value.real, eta, abs(value.imag))]
    converged = False
    iterations = 0
    while iterations < cfg.max_iters:
        step = sign * grad.real
        if not np.any(step):
            converged = True
            break
        iterations += 1
        candidate = np.clip(x + eta * step, lo, hi)
        candidate_value, candidate_grad = _evaluate(ef, candidate)
        candidate_objective = sign * candidate_value.real
        if candidate_objective > objective:
            improvement = candidate_objective - objective
            x, value, grad, objective = (
                candidate,
                candidate_value,
                candidate_grad,
                candidate_objective,
            )
            eta = min(cfg.grow * eta, 10.0 * eta0)
            trace.append(TracePoint(iterations, value.real, eta, abs(value.imag)))
            if improvement < tol:
                converged = True
                break
        else:
            eta *= cfg.shrink
            if eta < eta_min:
                converged = True
                break

    logger.debug(
        "summarize.optimize_completed",
        direction=direction.value,
        iterations=iterations,
        accepted=len(trace) - 1,
        value=value.real,
        converged=converged,
    )
    x.setflags(write=False)
    return OptimizationResult(
        x_star=x,
        value=value.real,
        iterations=iterations,
        converged=converged,
        direction=direction,
        trace=trace,
    )


def _starts(
    decomp: EigenDecomposition,
    indices: Sequence[int],
    policy: StartPolicy,
) -> list[tuple[FloatArray, FloatArray]]:
    training = decomp.training_x
    if policy is StartPolicy.MEAN:
        mean = training.mean_snapshot()
        return [(mean, mean) for _ in indices]
    series = eigenfunction_values(decomp, training, indices).real
    return [
        (
            training.snapshot(int(np.argmin(column))),
            training.snapshot(int(np.argmax(column))),
        )
        for column in series.T
    ]


def summarize_all(
    decomp: EigenDecomposition,
    indices: Sequence[int],
    start: StartPolicy | str = StartPolicy.BEST_OBSERVED,
    cfg: OptimizeConfig | None = None,
    *,
    x0: npt.ArrayLike | None = None,
    workers: int | None = None,
) -> list[SummaryPair]:
    """Minimize and maximize each listed eigenfunction.

    Start snapshots are clipped into ``cfg.bounds``. Tasks run on a thread pool
    and results are returned in the order of ``indices``.

    Args:
        decomp: Fitted decomposition
        indices: 1-based eigen indices
        start: Start policy for the initial guesses
        cfg: Optimizer configuration shared by all runs
        x0: Common start snapshot overriding ``start``
        workers: Thread count, default from settings

    Returns:
        One :class:`SummaryPair` per index
    """
    cfg = cfg or OptimizeConfig()
    policy = StartPolicy(start)
    for index in indices:
        decomp.check_index(index)
    if not indices:
        return []

    lo, hi = cfg.bounds if cfg.bounds is not None else (-math.inf, math.inf)
    if x0 is not None:
        shared = np.asarray(x0, dtype=np.float64).ravel()
        starts = [(shared, shared) for _ in indices]
    else:
        starts = _starts(decomp, indices, policy)
    tasks = [
        (index, direction, np.clip(start_x, lo, hi))
        for index, (low_start, high_start) in zip(indices, starts, strict=True)
        for direction, start_x in (
            (Direction.MINIMIZE, low_start),
            (Direction.MAXIMIZE, high_start),
        )
    ]
    logger.info(
        "summarize.summarize_started",
        indices=list(indices),
        start=policy.value,
        tasks=len(tasks),
    )

    def run(task: tuple[int, Direction, FloatArray]) -> OptimizationResult:
        index, direction, start_x = task
        return optimize(decomp.eigenfunction(index), start_x, direction, cfg)

    workers = workers or get_settings().workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(task) for task in tasks]

    pairs = [
        SummaryPair(index=index, minimum=results[2 * k], maximum=results[2 * k + 1])
        for k, index in enumerate(indices)
    ]
    logger.info("summarize.summarize_completed", pairs=len(pairs))
    return pairs

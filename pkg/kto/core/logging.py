"""Structured JSON logging for ``kto`` runs.

Events are named ``{domain}.{component}.{action}_{state}``:

    - operators.fit_started
    - operators.fit_completed
    - synth.simulation_completed
    - cli.command_failed

    States: _started, _completed, _failed, _validated, _rejected

Every event emitted inside :func:`run_context` carries the command name and a
``run_id`` shared by all events of that run. Numpy scalars are logged as plain
numbers, complex values as ``[re, im]`` pairs and non-finite floats as strings,
so each line stays valid JSON.

Usage:
    from kto.core.logging import get_logger, run_context

    logger = get_logger(__name__)

    with run_context("fit"):
        logger.info("operators.fit_started", n=500, epsilon=0.1)
"""

import logging
import math
import sys
import uuid
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

import numpy as np
import structlog
from structlog.contextvars import bind_contextvars, get_contextvars, reset_contextvars
from structlog.typing import EventDict, WrappedLogger

RUN_ID = "run_id"
COMMAND = "command"


def get_run_id() -> str:
    """The bound run ID, or an empty string outside a run."""
    return str(get_contextvars().get(RUN_ID, ""))


@contextmanager
def run_context(command: str, run_id: str | None = None) -> Iterator[str]:
    """Bind the command name and a run ID for the duration of one run.

    The previous bindings are restored on exit, so nested or consecutive runs
    never see each other's IDs.

    Yields:
        The run ID in effect
    """
    run_id = run_id or str(uuid.uuid4())
    tokens = bind_contextvars(**{COMMAND: command, RUN_ID: run_id})
    try:
        yield run_id
    finally:
        reset_contextvars(**tokens)


def _plain(value: Any) -> Any:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return [_plain(value.real), _plain(value.imag)]
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, list | tuple):
        return [_plain(item) for item in value]
    return value


def render_numbers(
    logger: WrappedLogger, method_name: str, event_dict: EventDict
) -> EventDict:
    """Processor that turns numeric event values into JSON-safe values."""
    for key, value in event_dict.items():
        event_dict[key] = _plain(value)
    return event_dict


def setup_logging(log_level: str = "INFO") -> None:
    """Send JSON lines at ``log_level`` and above to stdout.

    Calling it again replaces the handler installed by the previous call.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    """
    shared_processors: list[structlog.types.Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_log_level,
        structlog.stdlib.add_logger_name,
        structlog.processors.TimeStamper(fmt="iso", utc=True),
        structlog.processors.format_exc_info,
        render_numbers,
    ]
    structlog.configure(
        processors=[
            *shared_processors,
            structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )

    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(
        structlog.stdlib.ProcessorFormatter(
            foreign_pre_chain=shared_processors,
            processors=[
                structlog.stdlib.ProcessorFormatter.remove_processors_meta,
                structlog.processors.JSONRenderer(),
            ],
        )
    )

    root = logging.getLogger()
    for existing in list(root.handlers):
        if isinstance(existing.formatter, structlog.stdlib.ProcessorFormatter):
            root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(getattr(logging, log_level.upper(), logging.INFO))

    # PIL logs every plugin import at DEBUG
    logging.getLogger("PIL").setLevel(logging.WARNING)


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    return structlog.get_logger(name)  # type: ignore[no-any-return]

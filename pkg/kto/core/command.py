"""Command logging with run correlation for CLI entry points."""

import time
from collections.abc import Callable

from kto.core.logging import get_logger, run_context

logger = get_logger(__name__)


def run_logged[T](name: str, action: Callable[[], T], run_id: str | None = None) -> T:
    """Run one CLI command inside its own run context.

    Every event logged by ``action`` carries ``command`` and ``run_id``.

    Args:
        name: Command name, e.g. ``fit``
        action: Zero-argument callable performing the command
        run_id: Correlation ID to use (a UUID is generated if omitted)

    Returns:
        Whatever ``action`` returns

    Raises:
        Exception: Re-raises anything ``action`` raises after logging it
    """
    with run_context(name, run_id):
        start = time.perf_counter()
        logger.info("cli.command_started")
        try:
            result = action()
        except Exception as e:
            logger.error(
                "cli.command_failed",
                error=str(e),
                duration_seconds=round(time.perf_counter() - start, 3),
                exc_info=True,
            )
            raise
        logger.info(
            "cli.command_completed",
            duration_seconds=round(time.perf_counter() - start, 3),
        )
    return result

"""Entry point of the ``kto`` command."""

import sys
from collections.abc import Sequence
from pathlib import Path

from kto.cli.commands import COMMANDS
from kto.cli.config import resolve_config
from kto.cli.parser import NON_CONFIG_OPTIONS, build_parser
from kto.core.command import run_logged
from kto.core.config import get_settings
from kto.core.exceptions import handle_error
from kto.core.logging import get_logger, setup_logging

logger = get_logger(__name__)


def main(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run one command and return its exit code.

    Argument errors exit through ``argparse`` with status 2. Any failure after
    parsing is logged and mapped to an exit code by :func:`handle_error`.
    """
    args = vars(build_parser().parse_args(argv))
    command = args["command"]
    setup_logging(args.get("log_level", get_settings().log_level))
    overrides = {k: v for k, v in args.items() if k not in NON_CONFIG_OPTIONS}
    model, action = COMMANDS[command]

    def execute() -> list[Path]:
        cfg = resolve_config(
            model,
            command,
            preset=args.get("preset"),
            config_path=args.get("config"),
            overrides=overrides,
        )
        return action(cfg)

    try:
        written = run_logged(command, execute)
    except Exception as e:
        return handle_error(e, command)

    logger.info("cli.files_written", command=command, files=[str(p) for p in written])
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()

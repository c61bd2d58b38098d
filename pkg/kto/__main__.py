"""Run the CLI with ``python -m kto``."""

from kto.main import run

run()

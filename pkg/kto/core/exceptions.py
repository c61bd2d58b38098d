"""Custom exception classes and the CLI error handler."""

from pydantic import ValidationError

from kto.core.logging import get_logger

logger = get_logger(__name__)

EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5


class KtoError(Exception):
    """Base exception for all kernel transfer operator errors."""

    pass


class InputError(KtoError):
    """Exception raised when data or arguments violate a precondition."""

    pass


class ParseError(InputError):
    """Exception raised when a file does not parse under its declared format."""

    pass


class ShapeMismatchError(InputError):
    """Exception raised when snapshot shapes or record lengths disagree."""

    pass


class NonFiniteError(InputError):
    """Exception raised when snapshot data contains NaN or Inf."""

    pass


class DimensionMismatchError(InputError):
    """Exception raised when flat vectors have incompatible lengths."""

    pass


class UnsupportedShapeError(InputError):
    """Exception raised when a format cannot represent a snapshot shape or range."""

    pass


class LagTooLargeError(InputError):
    """Exception raised when the lag leaves no snapshot pairs."""

    pass


class InvalidGeometryError(InputError):
    """Exception raised for impossible renderer geometry."""

    pass


class FeatureDimensionTooLargeError(InputError):
    """Exception raised when an explicit feature space is too large for dense solves."""

    pass


class EmptySeriesError(InputError):
    """Exception raised when a series is too short to contain a jump."""

    pass


class IndexOutOfRangeError(InputError):
    """Exception raised for eigen indices outside the decomposition."""

    pass


class NumericalError(KtoError):
    """Base exception for algorithmic failures."""

    pass


class SingularProblemError(NumericalError):
    """Exception raised when the regularized Gram matrix is numerically singular."""

    pass


class ConvergenceFailureError(NumericalError):
    """Exception raised when an eigen-solver fails or its residuals are too large."""

    pass


class RankDeficientError(NumericalError):
    """Exception raised when every singular value falls below the tolerance."""

    pass


class NonFiniteObjectiveError(NumericalError):
    """Exception raised when an eigenfunction or its gradient evaluates non-finite."""

    pass


class BlowupError(NumericalError):
    """Exception raised when an integrated trajectory leaves the finite range."""

    pass


class IoFailureError(KtoError):
    """Exception raised when reading or writing files fails."""

    pass


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to a process exit code.

    Args:
        exc: The exception that terminated a command.

    Returns:
        Exit code: 2 usage, 3 input, 4 numerical, 5 I/O, 1 otherwise.
    """
    if isinstance(exc, ValidationError):
        return EXIT_USAGE
    if isinstance(exc, InputError):
        return EXIT_INPUT
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(exc, IoFailureError):
        return EXIT_IO
    return EXIT_FAILURE


def handle_error(exc: BaseException, command: str | None = None) -> int:
    """Global error handler for CLI commands.

    Args:
        exc: The exception that was raised.
        command: Name of the command that failed, if known.

    Returns:
        The exit code the process should terminate with.
    """
    exit_code = exit_code_for(exc)
    logger.error(
        "cli.error_handled",
        error=str(exc),
        error_type=type(exc).__name__,
        command=command,
        exit_code=exit_code,
        exc_info=True,
    )
    return exit_code

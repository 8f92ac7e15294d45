"""Exception hierarchy shared by the library and the command line."""


class PhaseRetrievalError(Exception):
    """Base class of every error raised on purpose by this package."""

    exit_code: int = 1


class DimensionMismatchError(PhaseRetrievalError, ValueError):
    exit_code = 3


class ZeroGradientError(PhaseRetrievalError):
    """The TV functional gradient vanishes (constant input), no descent possible."""

    exit_code = 4


class ZeroTruthError(PhaseRetrievalError, ValueError):
    exit_code = 5


class NyquistViolationError(PhaseRetrievalError, ValueError):
    """Support extent exceeds half of the computational window."""

    exit_code = 6


class AllZeroInputError(PhaseRetrievalError, ValueError):
    exit_code = 7


class FieldFileError(PhaseRetrievalError):
    """Malformed field container on disk."""

    exit_code = 8


class BadMagicError(FieldFileError):
    exit_code = 9


class TruncatedPayloadError(FieldFileError):
    exit_code = 10


class UnknownKindError(FieldFileError):
    exit_code = 11


class IoFailureError(PhaseRetrievalError, OSError):
    exit_code = 12


def check_same_shape(*shapes: tuple[int, int]) -> None:
    first = shapes[0]
    for shape in shapes[1:]:
        if tuple(shape) != tuple(first):
            raise DimensionMismatchError(
                f'grid shapes differ: {tuple(first)} vs {tuple(shape)}'
            )

"""Exception hierarchy shared by the library and the CLI.

The CLI maps these onto exit codes: usage errors exit 1, data errors
exit 2 and numeric errors exit 3.
"""


class TunableGMMError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 2


class UsageError(TunableGMMError, ValueError):
    """Invalid parameters, e.g. a kernel family missing a required parameter."""

    exit_code = 1


class DataError(TunableGMMError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 2


class ParseError(DataError):
    """A line of a sparse dataset file could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ProvenanceError(DataError):
    """Two sketches or encodings built with different (seed, p, k, dim) were compared."""


class NumericError(TunableGMMError, ArithmeticError):
    """A quantity is undefined for the given inputs (e.g. 0/0 in the GMM ratio)."""

    exit_code = 3


class EmptyVectorError(NumericError):
    """An operation needs at least one nonzero entry and got none."""
